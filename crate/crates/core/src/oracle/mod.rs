//! Golden-model simulator.
//!
//! Works on the validated network with two compressed sparse row matrices
//! (axon → neuron and neuron → neuron) and never touches a memory image, so
//! the compiler is outside its trusted base. Neuron arithmetic is written out
//! here independently of the runtime; only the noise stream is shared.

mod diff;

use thiserror::Error;

pub use diff::{diff_runs, DiffError, Divergence};

use crate::network::{NeuronKind, NeuronModelSpec, SpikeRaster, ValidatedNetwork};
use crate::runtime::NoiseSource;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("input key '{0}' is not an axon of the network")]
    UnknownInput(String),
}

/// Compressed sparse rows: row = presynaptic source, column = target neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i32>,
}

impl Csr {
    fn from_rows<'a>(rows: impl Iterator<Item = &'a [(u32, i16)]>) -> Self {
        let mut row_ptr = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for row in rows {
            for &(t, w) in row {
                cols.push(t);
                vals.push(w as i32);
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// `y += Mᵀ x` for a 0/1 vector `x` given by its support.
    fn spmv_t(&self, support: &[u32], y: &mut [i64]) {
        for &r in support {
            let (lo, hi) = (self.row_ptr[r as usize], self.row_ptr[r as usize + 1]);
            for k in lo..hi {
                y[self.cols[k] as usize] += self.vals[k] as i64;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleState {
    pub membrane: Vec<i32>,
    axons: Csr,
    neurons: Csr,
    models: Vec<NeuronModelSpec>,
    /// Support of last step's neuron spike vector, ascending.
    fired: Vec<u32>,
    noise: NoiseSource,
    step: u64,
    scratch: Vec<i64>,
}

fn clamp32(x: i64) -> i32 {
    x.clamp(i32::MIN as i64, i32::MAX as i64) as i32
}

/// Noise term: the 17-bit sample shifted by `shift`, truncating toward zero.
fn noise_term(sample: i32, shift: i8) -> i32 {
    let s = sample as i64;
    let scaled = if shift >= 0 {
        s * (1i64 << shift)
    } else {
        let d = 1i64 << (-(shift as i64));
        // i64 division truncates toward zero
        s / d
    };
    clamp32(scaled)
}

fn leak_term(v: i32, leak: u8) -> i32 {
    match 1i64.checked_shl(leak as u32).filter(|_| leak < 63) {
        Some(d) => clamp32(v as i64 - v as i64 / d),
        None => v,
    }
}

impl OracleState {
    pub fn new(net: &ValidatedNetwork, seed: u64) -> Self {
        let n = net.num_neurons();
        Self {
            membrane: vec![0; n],
            axons: Csr::from_rows((0..net.num_axons() as u32).map(|a| net.axon_synapses(a))),
            neurons: Csr::from_rows((0..n as u32).map(|i| net.neuron_synapses(i))),
            models: (0..n as u32).map(|i| *net.model_of(i)).collect(),
            fired: Vec::new(),
            noise: NoiseSource::new(seed),
            step: 0,
            scratch: vec![0; n],
        }
    }

    pub fn axon_matrix(&self) -> &Csr {
        &self.axons
    }

    pub fn neuron_matrix(&self) -> &Csr {
        &self.neurons
    }

    /// One step: `v += Aᵀ x_axon + Wᵀ x_neuron(prev)`, then the neuron update.
    /// Returns the neurons that fired, ascending.
    pub fn step(&mut self, inputs: &[u32]) -> Vec<u32> {
        let y = &mut self.scratch;
        y.iter_mut().for_each(|v| *v = 0);
        let mut inputs = inputs.to_vec();
        inputs.sort_unstable();
        inputs.dedup();
        self.axons.spmv_t(&inputs, y);
        self.neurons.spmv_t(&self.fired, y);

        let mut fired = Vec::new();
        for (i, m) in self.models.iter().enumerate() {
            let mut v = clamp32(self.membrane[i] as i64 + y[i]);
            let spike = match m.kind {
                NeuronKind::Binary => {
                    let spike = v > m.threshold;
                    v = 0;
                    spike
                }
                NeuronKind::Lif => {
                    let sample = self.noise.sample(i as u32, self.step);
                    v = clamp32(v as i64 + noise_term(sample, m.shift) as i64);
                    if v > m.threshold {
                        v = 0;
                        true
                    } else {
                        v = leak_term(v, m.leak);
                        false
                    }
                }
            };
            self.membrane[i] = v;
            if spike {
                fired.push(i as u32);
            }
        }
        self.fired.clone_from(&fired);
        self.step += 1;
        fired
    }
}

/// Output of a golden run. Membranes are in neuron key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutput {
    pub raster: SpikeRaster,
    pub final_membranes: Vec<i32>,
    pub traces: Option<Vec<Vec<i32>>>,
    pub fired_per_step: Vec<u64>,
}

pub fn oracle_run(
    net: &ValidatedNetwork,
    raster: &SpikeRaster,
    steps: u64,
    seed: u64,
    traces: bool,
) -> Result<OracleOutput, OracleError> {
    let mut schedule = std::collections::BTreeMap::new();
    for (t, keys) in raster.truncated(steps).iter() {
        let axons = keys
            .iter()
            .map(|k| net.axon_index(k).ok_or_else(|| OracleError::UnknownInput(k.clone())))
            .collect::<Result<Vec<u32>, _>>()?;
        schedule.insert(t, axons);
    }
    let mut state = OracleState::new(net, seed);
    let mut out = OracleOutput {
        raster: SpikeRaster::new(),
        final_membranes: Vec::new(),
        traces: traces.then(Vec::new),
        fired_per_step: Vec::new(),
    };
    for t in 0..steps {
        let fired = state.step(schedule.get(&t).map_or(&[][..], Vec::as_slice));
        out.raster.extend_step(
            t,
            fired.iter().filter(|&&n| net.is_output(n)).map(|&n| net.neuron_keys()[n as usize].as_str()),
        );
        out.fired_per_step.push(fired.len() as u64);
        if let Some(tr) = &mut out.traces {
            tr.push(state.membrane.clone());
        }
    }
    out.final_membranes = state.membrane;
    Ok(out)
}

/// Third, deliberately naive path: the summed axon input each neuron receives
/// over a run, one synapse at a time, ignoring firing, leak and saturation.
/// Equals the oracle's final membranes when thresholds are unreachable,
/// noise is off and nothing leaks.
pub fn naive_accumulation(net: &ValidatedNetwork, raster: &SpikeRaster, steps: u64) -> Result<Vec<i64>, OracleError> {
    let mut sum = vec![0i64; net.num_neurons()];
    for (_, keys) in raster.truncated(steps).iter() {
        for k in keys {
            let a = net.axon_index(k).ok_or_else(|| OracleError::UnknownInput(k.clone()))?;
            for &(t, w) in net.axon_synapses(a) {
                sum[t as usize] += w as i64;
            }
        }
    }
    Ok(sum)
}
