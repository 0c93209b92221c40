//! Energy and latency estimates from memory-access counts.
//!
//! Energy is modeled as accesses × a per-row-access cost; logic, local memory
//! and links are not modeled. Default coefficients are placeholders, not
//! measured values — supply real ones through the run configuration.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::router::{TrafficStats, LEVELS};
use crate::runtime::{AccessCounters, RunOutput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),
    #[error("an estimate needs at least one step")]
    NoSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Picojoules per row access (placeholder default).
    pub energy_per_row_access_pj: f64,
    /// Nanoseconds per row access on one port (placeholder default).
    pub latency_per_row_access_ns: f64,
    /// Row accesses that can proceed in parallel.
    pub parallel_ports: u32,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { energy_per_row_access_pj: 100.0, latency_per_row_access_ns: 5.0, parallel_ports: 16 }
    }
}

impl CostModel {
    pub fn check(&self) -> Result<(), MetricsError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.energy_per_row_access_pj) {
            return Err(MetricsError::InvalidCostModel("energy_per_row_access_pj must be positive".into()));
        }
        if !positive(self.latency_per_row_access_ns) {
            return Err(MetricsError::InvalidCostModel("latency_per_row_access_ns must be positive".into()));
        }
        if self.parallel_ports == 0 {
            return Err(MetricsError::InvalidCostModel("parallel_ports must be positive".into()));
        }
        Ok(())
    }

    pub fn energy_pj(&self, accesses: u64) -> f64 {
        accesses as f64 * self.energy_per_row_access_pj
    }

    pub fn latency_ns(&self, accesses: u64) -> f64 {
        accesses.div_ceil(self.parallel_ports as u64) as f64 * self.latency_per_row_access_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub accesses: u64,
    pub energy_pj: f64,
    pub energy_per_step_pj: f64,
    /// Latency of an average step, rounding accesses per step up.
    pub latency_per_step_ns: f64,
}

/// Whole-run estimate from summed counters.
pub fn estimate(counters: AccessCounters, model: &CostModel, steps: u64) -> Result<Estimate, MetricsError> {
    model.check()?;
    if steps == 0 {
        return Err(MetricsError::NoSteps);
    }
    let accesses = counters.total();
    let energy_pj = model.energy_pj(accesses);
    Ok(Estimate {
        accesses,
        energy_pj,
        energy_per_step_pj: energy_pj / steps as f64,
        latency_per_step_ns: model.latency_ns(accesses.div_ceil(steps)),
    })
}

/// Step-resolved estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    pub energy_pj: Vec<f64>,
    pub latency_ns: Vec<f64>,
    pub total_energy_pj: f64,
    pub max_latency_ns: f64,
    pub mean_latency_ns: f64,
}

pub fn estimate_trace(per_step: &[AccessCounters], model: &CostModel) -> Result<TraceEstimate, MetricsError> {
    model.check()?;
    let energy_pj: Vec<f64> = per_step.iter().map(|c| model.energy_pj(c.total())).collect();
    let latency_ns: Vec<f64> = per_step.iter().map(|c| model.latency_ns(c.total())).collect();
    let total_energy_pj = model.energy_pj(per_step.iter().map(AccessCounters::total).sum());
    let max_latency_ns = latency_ns.iter().copied().fold(0.0, f64::max);
    let mean_latency_ns =
        if latency_ns.is_empty() { 0.0 } else { latency_ns.iter().sum::<f64>() / latency_ns.len() as f64 };
    Ok(TraceEstimate { energy_pj, latency_ns, total_energy_pj, max_latency_ns, mean_latency_ns })
}

/// Static facts about the simulated network.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NetworkSummary {
    pub neurons: usize,
    pub axons: usize,
    pub synapses: usize,
    pub cores: usize,
    /// Packing density of the synapse region(s).
    pub density: f64,
}

/// Histogram bucket label for a per-step access count: `0`, `1`, `2-3`, `4-7`, ...
fn bucket(accesses: u64) -> (u32, String) {
    match accesses {
        0 => (0, "0".into()),
        1 => (1, "1".into()),
        n => {
            let b = 64 - n.leading_zeros();
            let lo = 1u64 << (b - 1);
            (b, format!("{lo}-{}", (lo << 1) - 1))
        }
    }
}

/// Structured text summary of a run. Same inputs, same bytes.
pub fn report(
    net: &NetworkSummary,
    run: &RunOutput,
    per_core: &[AccessCounters],
    traffic: Option<&TrafficStats>,
    model: &CostModel,
) -> Result<String, MetricsError> {
    let est = estimate_trace(&run.per_step, model)?;
    let c = run.counters;
    let mut s = String::new();
    let _ = writeln!(s, "[network]");
    let _ = writeln!(s, "neurons = {}", net.neurons);
    let _ = writeln!(s, "axons = {}", net.axons);
    let _ = writeln!(s, "synapses = {}", net.synapses);
    let _ = writeln!(s, "cores = {}", net.cores);
    let _ = writeln!(s, "density = {:.6}", net.density);

    let _ = writeln!(s, "\n[run]");
    let _ = writeln!(s, "steps = {}", run.per_step.len());
    let _ = writeln!(s, "input_events = {}", run.inputs_per_step.iter().sum::<u64>());
    let _ = writeln!(s, "fired = {}", run.fired_per_step.iter().sum::<u64>());
    let _ = writeln!(s, "output_spikes = {}", run.raster.event_count());

    let _ = writeln!(s, "\n[counters]");
    let _ = writeln!(s, "locator_reads = {}", c.locator_reads);
    let _ = writeln!(s, "synapse_row_reads = {}", c.synapse_row_reads);
    let _ = writeln!(s, "image_writes = {}", c.image_writes);
    let _ = writeln!(s, "total = {}", c.total());

    let _ = writeln!(s, "\n[estimate]");
    let _ = writeln!(s, "energy_per_row_access_pj = {}", model.energy_per_row_access_pj);
    let _ = writeln!(s, "latency_per_row_access_ns = {}", model.latency_per_row_access_ns);
    let _ = writeln!(s, "parallel_ports = {}", model.parallel_ports);
    let _ = writeln!(s, "energy_pj = {}", est.total_energy_pj);
    let per_step = if run.per_step.is_empty() { 0.0 } else { est.total_energy_pj / run.per_step.len() as f64 };
    let _ = writeln!(s, "energy_per_step_pj = {per_step}");
    let _ = writeln!(s, "latency_per_step_ns_mean = {}", est.mean_latency_ns);
    let _ = writeln!(s, "latency_per_step_ns_max = {}", est.max_latency_ns);

    let _ = writeln!(s, "\n[access_histogram]");
    let mut hist = std::collections::BTreeMap::new();
    for step in &run.per_step {
        let (order, label) = bucket(step.total());
        *hist.entry((order, label)).or_insert(0u64) += 1;
    }
    for ((_, label), n) in hist {
        let _ = writeln!(s, "\"{label}\" = {n}");
    }

    if let Some(t) = traffic {
        let _ = writeln!(s, "\n[traffic]");
        let levels = t.per_level();
        for (l, name) in (0..LEVELS).zip(["board", "server", "network"]) {
            let _ = writeln!(s, "{name} = {}", levels[l]);
        }
        let _ = writeln!(s, "sent = {}", t.sent);
        let _ = writeln!(s, "received = {}", t.received);
        let _ = writeln!(s, "max_inbox = {}", t.max_inbox());
    }
    for (i, pc) in per_core.iter().enumerate() {
        let _ = writeln!(s, "\n[[core]]");
        let _ = writeln!(s, "index = {i}");
        let _ = writeln!(s, "locator_reads = {}", pc.locator_reads);
        let _ = writeln!(s, "synapse_row_reads = {}", pc.synapse_row_reads);
        let _ = writeln!(s, "image_writes = {}", pc.image_writes);
    }
    Ok(s)
}
