//! Seeded random networks, input rasters and partitions.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::network::{NetworkDef, NeuronModelSpec, SpikeRaster, ValidatedNetwork, MAX_SHIFT, MIN_SHIFT};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub min_neurons: usize,
    pub max_neurons: usize,
    pub max_axons: usize,
    /// Upper bound on total synapses; fanouts are trimmed to respect it.
    pub max_synapses: usize,
    /// Upper bound on any one source's fanout.
    pub max_fanout: usize,
    pub max_models: usize,
    /// Probability that a model is binary rather than LIF.
    pub binary_fraction: f64,
    /// Draw noise shifts from the full range; otherwise every LIF model is silent (shift −17).
    pub noise: bool,
    /// Probability that a neuron has no outgoing synapses.
    pub silent_fraction: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            min_neurons: 1,
            max_neurons: 200,
            max_axons: 16,
            max_synapses: 5_000,
            max_fanout: 40,
            max_models: 4,
            binary_fraction: 0.3,
            noise: true,
            silent_fraction: 0.1,
        }
    }
}

fn random_model<R: Rng>(rng: &mut R, p: &GenParams) -> NeuronModelSpec {
    let threshold = rng.gen_range(0..=60);
    if rng.gen_bool(p.binary_fraction) {
        return NeuronModelSpec::binary(threshold);
    }
    let shift = if p.noise && rng.gen_bool(0.6) {
        // mostly small noise, occasionally large enough to saturate
        if rng.gen_bool(0.9) {
            rng.gen_range(MIN_SHIFT..=-10)
        } else {
            rng.gen_range(MIN_SHIFT..=MAX_SHIFT)
        }
    } else {
        MIN_SHIFT
    };
    let leak = match rng.gen_range(0..4) {
        0 => 63,
        1 => rng.gen_range(0..=3),
        _ => rng.gen_range(0..=63),
    };
    NeuronModelSpec::lif(threshold, shift, leak)
}

fn random_weight<R: Rng>(rng: &mut R) -> i64 {
    match rng.gen_range(0..50) {
        0 => i16::MAX as i64,
        1 => i16::MIN as i64,
        2..=9 => rng.gen_range(-40..=0),
        _ => rng.gen_range(0..=30),
    }
}

/// A random valid network. Neurons are `n<i>`, axons `x<i>`.
pub fn random_network<R: Rng>(rng: &mut R, p: &GenParams) -> NetworkDef {
    let n = rng.gen_range(p.min_neurons.max(1)..=p.max_neurons.max(p.min_neurons.max(1)));
    let a = rng.gen_range(1..=p.max_axons.max(1));
    let mut def = NetworkDef::new();
    let models: Vec<usize> =
        (0..rng.gen_range(1..=p.max_models.max(1))).map(|_| def.add_model(random_model(rng, p))).collect();

    let mut budget = p.max_synapses;
    let mut fanout = |rng: &mut R, silent: bool| -> Vec<(String, i64)> {
        if silent || budget == 0 {
            return Vec::new();
        }
        let k = rng.gen_range(0..=p.max_fanout.min(n)).min(budget);
        budget -= k;
        sample(rng, n, k).into_iter().map(|t| (format!("n{t}"), random_weight(rng))).collect()
    };
    for i in 0..a {
        let syns = fanout(rng, false);
        def.add_axon(format!("x{i}"), syns).expect("fresh key");
    }
    for i in 0..n {
        let silent = rng.gen_bool(p.silent_fraction);
        let syns = fanout(rng, silent);
        let m = models[rng.gen_range(0..models.len())];
        def.add_neuron(format!("n{i}"), m, syns).expect("fresh key");
        if rng.gen_bool(0.3) {
            def.add_output(format!("n{i}")).expect("fresh key");
        }
    }
    def
}

/// Each axon spikes independently with probability `rate` at each step.
pub fn random_raster<R: Rng>(rng: &mut R, net: &ValidatedNetwork, steps: u64, rate: f64) -> SpikeRaster {
    let mut raster = SpikeRaster::new();
    for t in 0..steps {
        for key in net.axon_keys() {
            if rng.gen_bool(rate) {
                raster.insert(t, key.clone());
            }
        }
    }
    raster
}

/// A random core per neuron, with every core used when `neurons >= cores`.
pub fn random_assignment<R: Rng>(rng: &mut R, neurons: usize, cores: usize) -> Vec<u32> {
    let mut a: Vec<u32> = (0..neurons).map(|_| rng.gen_range(0..cores as u32)).collect();
    if neurons >= cores {
        for (c, i) in sample(rng, neurons, cores).into_iter().enumerate() {
            a[i] = c as u32;
        }
    }
    a
}
