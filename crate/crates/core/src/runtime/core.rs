//! Two-phase event-driven execution of one core, straight from its image.

use std::collections::VecDeque;
use std::ops::AddAssign;

use thiserror::Error;

use super::neuron::{integrate, neuron_update, NoiseSource};
use crate::compiler::{LocatorEntry, MemoryImage, SlotRef, SynapseEntry, SLOTS_PER_ROW};
use crate::network::{NeuronKind, NeuronModelSpec, Source};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("input axon {0} out of range")]
    InputOutOfRange(u32),
    #[error("no synapse {pre} -> {post}")]
    NoSuchSynapse { pre: String, post: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{0}' names both an axon and a neuron")]
    AmbiguousKey(String),
    #[error("weight {0} outside the 16-bit signed range")]
    WeightOutOfRange(i64),
    #[error("image has no usable locator for {0}")]
    CorruptImage(String),
}

/// Memory accesses, counted in rows (locator reads count one row each).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct AccessCounters {
    pub locator_reads: u64,
    pub synapse_row_reads: u64,
    pub image_writes: u64,
}

impl AccessCounters {
    pub fn total(&self) -> u64 {
        self.locator_reads + self.synapse_row_reads + self.image_writes
    }
}

impl AddAssign for AccessCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.locator_reads += rhs.locator_reads;
        self.synapse_row_reads += rhs.synapse_row_reads;
        self.image_writes += rhs.image_writes;
    }
}

impl std::iter::Sum for AccessCounters {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = AccessCounters::default();
        for c in iter {
            acc += c;
        }
        acc
    }
}

/// Mutable per-core state.
#[derive(Debug, Clone)]
pub struct CoreState {
    pub membrane: Vec<i32>,
    pub axon_spikes: Vec<bool>,
    pub fired_prev: Vec<bool>,
    /// (owner tag, locator) pairs gathered in phase one.
    pub locator_queue: VecDeque<(u32, LocatorEntry)>,
    pub noise: NoiseSource,
    pub step: u64,
    pub counters: AccessCounters,
}

/// Result of one timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    /// Local neuron indices that fired, ascending.
    pub fired: Vec<u32>,
    /// Accesses made during this step only.
    pub counters: AccessCounters,
}

/// A core loaded with its image.
#[derive(Debug, Clone)]
pub struct Core {
    image: MemoryImage,
    state: CoreState,
    models: Vec<NeuronModelSpec>,
    global: Vec<u32>,
    output: Vec<bool>,
    fired_list: Vec<u32>,
    acc: Vec<i64>,
}

impl Core {
    /// Loads an image. Per-neuron models and output flags are decoded from
    /// the image's locators and entries, not from any side table.
    pub fn new(image: MemoryImage, seed: u64) -> Result<Self, RuntimeError> {
        let n = image.num_neurons();
        let mut models = Vec::with_capacity(n);
        for i in 0..n as u32 {
            let loc = image.neuron_locator(i);
            let model = image
                .models()
                .get(loc.model_id as usize)
                .filter(|_| loc.is_valid())
                .ok_or_else(|| RuntimeError::CorruptImage(image.neurons()[i as usize].key.clone()))?;
            models.push(*model);
        }
        let output = (0..n as u32).map(|i| image.is_output(i)).collect();
        let global = image.neurons().iter().map(|x| x.global).collect();
        let state = CoreState {
            membrane: vec![0; n],
            axon_spikes: vec![false; image.num_axons()],
            fired_prev: vec![false; n],
            locator_queue: VecDeque::new(),
            noise: NoiseSource::new(seed),
            step: 0,
            counters: AccessCounters::default(),
        };
        Ok(Self { image, state, models, global, output, fired_list: Vec::new(), acc: vec![0; n] })
    }

    pub fn image(&self) -> &MemoryImage {
        &self.image
    }

    pub fn into_image(self) -> MemoryImage {
        self.image
    }

    pub fn state(&self) -> &CoreState {
        &self.state
    }

    pub fn membranes(&self) -> &[i32] {
        &self.state.membrane
    }

    pub fn counters(&self) -> AccessCounters {
        self.state.counters
    }

    pub fn is_output(&self, neuron: u32) -> bool {
        self.output[neuron as usize]
    }

    pub fn global_index(&self, neuron: u32) -> u32 {
        self.global[neuron as usize]
    }

    /// Advances one timestep with the given local input axons.
    pub fn step(&mut self, inputs: &[u32]) -> Result<StepReport, RuntimeError> {
        let n_axons = self.image.num_axons() as u32;
        if let Some(&bad) = inputs.iter().find(|&&a| a >= n_axons) {
            return Err(RuntimeError::InputOutOfRange(bad));
        }
        let before = self.state.counters;
        let st = &mut self.state;
        for &a in inputs {
            st.axon_spikes[a as usize] = true;
        }

        // phase 1: gather locators of last step's spikes and this step's inputs
        for &n in &self.fired_list {
            st.locator_queue.push_back((self.image.source_ordinal(Source::Neuron(n)), self.image.neuron_locator(n)));
            st.counters.locator_reads += 1;
        }
        for a in 0..n_axons {
            if std::mem::take(&mut st.axon_spikes[a as usize]) {
                st.locator_queue.push_back((self.image.source_ordinal(Source::Axon(a)), self.image.axon_locator(a)));
                st.counters.locator_reads += 1;
            }
        }

        // phase 2: stream synapse rows into the accumulators
        while let Some((owner, loc)) = st.locator_queue.pop_front() {
            let rows = loc.base_row as u64..loc.base_row as u64 + loc.row_count as u64;
            st.counters.synapse_row_reads += loc.row_count as u64;
            for row in rows {
                for &word in self.image.synapse_row(row) {
                    let e = SynapseEntry::decode(word);
                    // placeholder entries may name lanes with no neuron; they weigh 0 anyway
                    if e.valid && e.owner == owner && e.weight != 0 {
                        self.acc[e.target as usize] += e.weight as i64;
                    }
                }
            }
        }

        // neuron updates
        self.fired_list.clear();
        for i in 0..st.membrane.len() {
            let model = &self.models[i];
            let v = integrate(st.membrane[i], std::mem::take(&mut self.acc[i]));
            let sample = match model.kind {
                NeuronKind::Lif => st.noise.sample(self.global[i], st.step),
                NeuronKind::Binary => 0,
            };
            let (v, fired) = neuron_update(v, model, sample);
            st.membrane[i] = v;
            st.fired_prev[i] = fired;
            if fired {
                self.fired_list.push(i as u32);
            }
        }
        st.step += 1;

        let after = st.counters;
        Ok(StepReport {
            fired: self.fired_list.clone(),
            counters: AccessCounters {
                locator_reads: after.locator_reads - before.locator_reads,
                synapse_row_reads: after.synapse_row_reads - before.synapse_row_reads,
                image_writes: after.image_writes - before.image_writes,
            },
        })
    }

    /// Resolves a presynaptic key on this core: user axons, then local
    /// neurons, then relay axons standing in for remote neurons. A key that
    /// is both a user axon and a neuron is ambiguous.
    pub fn resolve_pre(&self, key: &str) -> Result<Source, RuntimeError> {
        let axon = self.image.input_axon(key).map(Source::Axon);
        let neuron = self
            .image
            .neuron_by_key(key)
            .map(Source::Neuron)
            .or_else(|| self.image.relay_axon(key).map(Source::Axon));
        match (axon, neuron) {
            (Some(_), Some(_)) => Err(RuntimeError::AmbiguousKey(key.to_string())),
            (Some(s), None) | (None, Some(s)) => Ok(s),
            (None, None) => Err(RuntimeError::UnknownKey(key.to_string())),
        }
    }

    fn pre_label(&self, pre: Source) -> String {
        match pre {
            Source::Axon(a) => self.image.axon_labels()[a as usize].key().to_string(),
            Source::Neuron(n) => self.image.neurons()[n as usize].key.clone(),
        }
    }

    /// Scans `pre`'s rows for the entry targeting `post`, counting each row read.
    fn locate(&mut self, pre: Source, post: u32) -> Result<SlotRef, RuntimeError> {
        let missing = |core: &Self| RuntimeError::NoSuchSynapse {
            pre: core.pre_label(pre),
            post: core.image.neurons().get(post as usize).map_or_else(|| post.to_string(), |n| n.key.clone()),
        };
        let loc = self.image.locator(pre);
        if !loc.is_valid() || loc.is_placeholder() {
            return Err(missing(self));
        }
        let owner = self.image.source_ordinal(pre);
        for row in loc.base_row as u64..loc.base_row as u64 + loc.row_count as u64 {
            self.state.counters.synapse_row_reads += 1;
            for col in 0..SLOTS_PER_ROW {
                let e = SynapseEntry::decode(self.image.synapse_row(row)[col]);
                if e.valid && e.owner == owner && e.target == post {
                    return Ok(SlotRef { row, col });
                }
            }
        }
        Err(missing(self))
    }

    pub fn read_synapse(&mut self, pre: Source, post: u32) -> Result<i16, RuntimeError> {
        let at = self.locate(pre, post)?;
        Ok(self.image.synapse_slot(at).weight)
    }

    /// Rewrites a weight in place; target, flags and placement are untouched.
    pub fn write_synapse(&mut self, pre: Source, post: u32, weight: i16) -> Result<(), RuntimeError> {
        let at = self.locate(pre, post)?;
        let mut e = self.image.synapse_slot(at);
        e.weight = weight;
        self.image.set_synapse_slot(at, e);
        self.state.counters.image_writes += 1;
        Ok(())
    }

    fn post_index(&self, key: &str) -> Result<u32, RuntimeError> {
        self.image.neuron_by_key(key).ok_or_else(|| RuntimeError::UnknownKey(key.to_string()))
    }

    pub fn read_synapse_by_key(&mut self, pre: &str, post: &str) -> Result<i16, RuntimeError> {
        let (pre, post) = (self.resolve_pre(pre)?, self.post_index(post)?);
        self.read_synapse(pre, post)
    }

    pub fn write_synapse_by_key(&mut self, pre: &str, post: &str, weight: i64) -> Result<(), RuntimeError> {
        let weight = i16::try_from(weight).map_err(|_| RuntimeError::WeightOutOfRange(weight))?;
        let (pre, post) = (self.resolve_pre(pre)?, self.post_index(post)?);
        self.write_synapse(pre, post, weight)
    }
}
