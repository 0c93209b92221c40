use std::collections::BTreeMap;

use super::core::{AccessCounters, Core, RuntimeError};
use crate::compiler::MemoryImage;
use crate::network::SpikeRaster;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    /// Record every neuron's membrane after every step.
    pub traces: bool,
}

/// Everything a batch run produces. Membrane vectors are ordered by global
/// neuron index, which for the full network is key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    /// Spikes of output-flagged neurons, at the step they fired.
    pub raster: SpikeRaster,
    pub counters: AccessCounters,
    pub per_step: Vec<AccessCounters>,
    /// Input axon spikes delivered per step (relay deliveries included).
    pub inputs_per_step: Vec<u64>,
    /// Neurons that fired per step, outputs or not.
    pub fired_per_step: Vec<u64>,
    pub neuron_keys: Vec<String>,
    pub final_membranes: Vec<i32>,
    pub traces: Option<Vec<Vec<i32>>>,
}

impl RunOutput {
    pub(crate) fn empty(neuron_keys: Vec<String>, final_membranes: Vec<i32>, traces: bool) -> Self {
        Self {
            raster: SpikeRaster::new(),
            counters: AccessCounters::default(),
            per_step: Vec::new(),
            inputs_per_step: Vec::new(),
            fired_per_step: Vec::new(),
            neuron_keys,
            final_membranes,
            traces: traces.then(Vec::new),
        }
    }
}

/// Resolves a raster of user-axon keys to per-step local axon lists,
/// dropping events at or after `steps`.
pub fn resolve_inputs(image: &MemoryImage, raster: &SpikeRaster, steps: u64) -> Result<BTreeMap<u64, Vec<u32>>, RuntimeError> {
    let mut out = BTreeMap::new();
    for (t, keys) in raster.truncated(steps).iter() {
        let axons = keys
            .iter()
            .map(|k| image.input_axon(k).ok_or_else(|| RuntimeError::UnknownKey(k.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(t, axons);
    }
    Ok(out)
}

/// Runs one core for `steps` timesteps.
pub fn run(image: MemoryImage, raster: &SpikeRaster, steps: u64, opts: RunOptions) -> Result<RunOutput, RuntimeError> {
    let inputs = resolve_inputs(&image, raster, steps)?;
    let mut core = Core::new(image, opts.seed)?;

    let mut order: Vec<u32> = (0..core.image().num_neurons() as u32).collect();
    order.sort_by_key(|&i| core.global_index(i));
    let keys = order.iter().map(|&i| core.image().neurons()[i as usize].key.clone()).collect();
    let snapshot = |core: &Core| order.iter().map(|&i| core.membranes()[i as usize]).collect::<Vec<i32>>();

    let mut out = RunOutput::empty(keys, snapshot(&core), opts.traces);
    for t in 0..steps {
        let step_inputs = inputs.get(&t).map_or(&[][..], Vec::as_slice);
        let report = core.step(step_inputs)?;
        out.raster.extend_step(
            t,
            report
                .fired
                .iter()
                .filter(|&&n| core.is_output(n))
                .map(|&n| core.image().neurons()[n as usize].key.as_str()),
        );
        out.counters += report.counters;
        out.per_step.push(report.counters);
        out.inputs_per_step.push(step_inputs.len() as u64);
        out.fired_per_step.push(report.fired.len() as u64);
        if let Some(traces) = &mut out.traces {
            traces.push(snapshot(&core));
        }
    }
    out.final_membranes = snapshot(&core);
    Ok(out)
}
