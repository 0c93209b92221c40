use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::routing::{exchange, RoutingTable, StepTraffic, TrafficStats};
use super::RouterError;
use crate::compiler::MemoryImage;
use crate::runtime::{AccessCounters, Core, RunOptions, RunOutput, RuntimeError};
use crate::network::SpikeRaster;

/// Cores wired together by a routing table. Cores step concurrently; the
/// exchange between steps is the barrier.
#[derive(Debug, Clone)]
pub struct System {
    cores: Vec<Core>,
    table: RoutingTable,
    /// user axon key -> (core, local axon) for every replica
    inputs: HashMap<String, Vec<(u32, u32)>>,
    /// neuron key -> (core, local neuron)
    homes: HashMap<String, (u32, u32)>,
    /// relay inputs due next step, per core
    pending: Vec<Vec<u32>>,
    step: u64,
}

/// What one system step produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemStep {
    /// Local indices fired, per core.
    pub fired: Vec<Vec<u32>>,
    pub counters: Vec<AccessCounters>,
    /// Spikes routed out for the next step.
    pub traffic: StepTraffic,
    /// Axon inputs consumed this step, user and relay, over all cores.
    pub inputs: u64,
}

/// Result of a multi-core run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemOutput {
    /// Merged view: output raster, summed counters, membranes by global index.
    pub run: RunOutput,
    pub per_core: Vec<AccessCounters>,
    pub traffic: TrafficStats,
}

impl System {
    pub fn new(images: Vec<MemoryImage>, table: RoutingTable, seed: u64) -> Result<Self, RouterError> {
        if images.len() != table.cores() {
            return Err(RouterError::InvalidRoute(format!(
                "routing table covers {} cores, {} images given",
                table.cores(),
                images.len()
            )));
        }
        let mut inputs: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        let mut homes = HashMap::new();
        for (c, img) in images.iter().enumerate() {
            for (a, label) in img.axon_labels().iter().enumerate() {
                if let crate::compiler::AxonLabel::Input(k) = label {
                    inputs.entry(k.clone()).or_default().push((c as u32, a as u32));
                }
            }
            for (n, info) in img.neurons().iter().enumerate() {
                homes.insert(info.key.clone(), (c as u32, n as u32));
            }
        }
        let cores = images.into_iter().map(|img| Core::new(img, seed)).collect::<Result<Vec<_>, _>>()?;
        let pending = vec![Vec::new(); cores.len()];
        Ok(Self { cores, table, inputs, homes, pending, step: 0 })
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn table(&self) -> &RoutingTable {
        &self.table
    }

    /// Per-core local axon inputs for a set of user axon keys.
    pub fn route_inputs<'a>(&self, keys: impl IntoIterator<Item = &'a str>) -> Result<Vec<Vec<u32>>, RuntimeError> {
        let mut per_core = vec![Vec::new(); self.cores.len()];
        for k in keys {
            let replicas = self.inputs.get(k).ok_or_else(|| RuntimeError::UnknownKey(k.to_string()))?;
            for &(c, a) in replicas {
                per_core[c as usize].push(a);
            }
        }
        Ok(per_core)
    }

    /// Runs one step on every core and exchanges spikes for the next.
    /// Returns per-core fired lists and the step's traffic.
    pub fn step(&mut self, user_inputs: Vec<Vec<u32>>) -> Result<SystemStep, RouterError> {
        let mut inputs = std::mem::take(&mut self.pending);
        for (dst, extra) in inputs.iter_mut().zip(user_inputs) {
            dst.extend(extra);
        }
        let consumed = inputs.iter().map(|v| v.len() as u64).sum();
        let reports = self
            .cores
            .par_iter_mut()
            .zip(inputs.par_iter())
            .map(|(core, inputs)| core.step(inputs))
            .collect::<Result<Vec<_>, _>>()?;
        let (fired, counters): (Vec<Vec<u32>>, Vec<AccessCounters>) =
            reports.into_iter().map(|r| (r.fired, r.counters)).unzip();
        let (next, traffic) = exchange(&fired, &self.table);
        self.pending = next;
        self.step += 1;
        Ok(SystemStep { fired, counters, traffic, inputs: consumed })
    }

    fn neuron_order(&self) -> Vec<(u32, u32, u32)> {
        let mut order: Vec<(u32, u32, u32)> = self
            .cores
            .iter()
            .enumerate()
            .flat_map(|(c, core)| (0..core.image().num_neurons() as u32).map(move |n| (core.global_index(n), c as u32, n)))
            .collect();
        order.sort_unstable();
        order
    }

    fn snapshot(&self, order: &[(u32, u32, u32)]) -> Vec<i32> {
        order.iter().map(|&(_, c, n)| self.cores[c as usize].membranes()[n as usize]).collect()
    }

    /// Batch run from the current state.
    pub fn run(&mut self, raster: &SpikeRaster, steps: u64, traces: bool) -> Result<SystemOutput, RouterError> {
        let mut schedule = BTreeMap::new();
        for (t, keys) in raster.truncated(steps).iter() {
            schedule.insert(t, self.route_inputs(keys.iter().map(String::as_str))?);
        }
        let order = self.neuron_order();
        let keys = order
            .iter()
            .map(|&(_, c, n)| self.cores[c as usize].image().neurons()[n as usize].key.clone())
            .collect();
        let mut run = RunOutput::empty(keys, self.snapshot(&order), traces);
        let mut per_core = vec![AccessCounters::default(); self.cores.len()];
        let mut traffic = TrafficStats::default();

        for t in 0..steps {
            let user = schedule.remove(&t).unwrap_or_else(|| vec![Vec::new(); self.cores.len()]);
            let SystemStep { fired, counters, traffic: step_traffic, inputs } = self.step(user)?;

            for (c, list) in fired.iter().enumerate() {
                let core = &self.cores[c];
                run.raster.extend_step(
                    t,
                    list.iter().filter(|&&n| core.is_output(n)).map(|&n| core.image().neurons()[n as usize].key.as_str()),
                );
            }
            let step_counters: AccessCounters = counters.iter().copied().sum();
            for (acc, c) in per_core.iter_mut().zip(&counters) {
                *acc += *c;
            }
            run.counters += step_counters;
            run.per_step.push(step_counters);
            run.inputs_per_step.push(inputs);
            run.fired_per_step.push(fired.iter().map(|v| v.len() as u64).sum());
            traffic.record(step_traffic);
            if let Some(tr) = &mut run.traces {
                tr.push(self.snapshot(&order));
            }
        }
        run.final_membranes = self.snapshot(&order);
        Ok(SystemOutput { run, per_core, traffic })
    }

    /// Finds the core that stores `pre -> post`: the one hosting `post`.
    fn host_of_post(&self, pre: &str, post: &str) -> Result<usize, RuntimeError> {
        let &(c, _) = self.homes.get(post).ok_or_else(|| RuntimeError::UnknownKey(post.to_string()))?;
        if !self.homes.contains_key(pre) && !self.inputs.contains_key(pre) {
            return Err(RuntimeError::UnknownKey(pre.to_string()));
        }
        Ok(c as usize)
    }

    fn remap_missing(&self, pre: &str, post: &str, err: RuntimeError) -> RuntimeError {
        match err {
            // the source exists, just not as an input to this core
            RuntimeError::UnknownKey(k) if k == pre => {
                RuntimeError::NoSuchSynapse { pre: pre.to_string(), post: post.to_string() }
            }
            e => e,
        }
    }

    pub fn read_synapse(&mut self, pre: &str, post: &str) -> Result<i16, RuntimeError> {
        if self.inputs.contains_key(pre) && self.homes.contains_key(pre) {
            return Err(RuntimeError::AmbiguousKey(pre.to_string()));
        }
        let c = self.host_of_post(pre, post)?;
        self.cores[c].read_synapse_by_key(pre, post).map_err(|e| self.remap_missing(pre, post, e))
    }

    pub fn write_synapse(&mut self, pre: &str, post: &str, weight: i64) -> Result<(), RuntimeError> {
        if self.inputs.contains_key(pre) && self.homes.contains_key(pre) {
            return Err(RuntimeError::AmbiguousKey(pre.to_string()));
        }
        let c = self.host_of_post(pre, post)?;
        self.cores[c].write_synapse_by_key(pre, post, weight).map_err(|e| self.remap_missing(pre, post, e))
    }

    pub fn counters(&self) -> Vec<AccessCounters> {
        self.cores.iter().map(Core::counters).collect()
    }

    pub fn into_images(self) -> Vec<MemoryImage> {
        self.cores.into_iter().map(Core::into_image).collect()
    }
}

/// Runs a compiled system from a fresh state.
pub fn run_system(
    images: Vec<MemoryImage>,
    table: RoutingTable,
    raster: &SpikeRaster,
    steps: u64,
    opts: RunOptions,
) -> Result<SystemOutput, RouterError> {
    System::new(images, table, opts.seed)?.run(raster, steps, opts.traces)
}
