//! Analytical memory footprint, computed without building an image.

use std::fmt::Write as _;

use super::geometry::{MemoryGeometry, MAX_SOURCES, MAX_TARGET, ROWS_PER_SEGMENT, SEGMENT_SLOTS, SLOTS_PER_ROW};

/// A synthetic single-core workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workload {
    pub neurons: u64,
    pub axons: u64,
    /// Mean outgoing synapses per neuron.
    pub fanout: f64,
}

/// Rows required under one packing assumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootprintBound {
    pub synapse_rows: u64,
    pub total_rows: u64,
    pub fits: bool,
    /// Available minus required rows; negative when it does not fit.
    pub margin_rows: i64,
    pub margin_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootprintReport {
    pub workload: Workload,
    pub geometry: MemoryGeometry,
    pub synapses: u64,
    pub locator_rows: u64,
    /// Every synapse slot filled: the best any packer can do.
    pub dense: FootprintBound,
    /// Each neuron takes `ceil(fanout / 16)` private segments: no row sharing,
    /// lanes perfectly balanced.
    pub segment_rounded: FootprintBound,
    pub sources_fit_owner_tags: bool,
    pub neurons_fit_target_field: bool,
}

fn bound(geometry: MemoryGeometry, locator_rows: u64, synapse_rows: u64) -> FootprintBound {
    let total_rows = locator_rows + synapse_rows;
    let margin_rows = geometry.total_rows as i64 - total_rows as i64;
    FootprintBound {
        synapse_rows,
        total_rows,
        fits: margin_rows >= 0,
        margin_rows,
        margin_fraction: margin_rows as f64 / geometry.total_rows as f64,
    }
}

pub fn estimate_footprint(workload: Workload, geometry: MemoryGeometry) -> FootprintReport {
    let seg = SEGMENT_SLOTS as u64;
    let rps = ROWS_PER_SEGMENT as u64;
    let locator_rows = workload.axons.div_ceil(seg) * rps + workload.neurons.div_ceil(seg) * rps;
    let synapses = (workload.neurons as f64 * workload.fanout).round() as u64;

    let dense_rows = synapses.div_ceil(SLOTS_PER_ROW as u64);
    let per_neuron_segments = ((workload.fanout / SEGMENT_SLOTS as f64).ceil() as u64).max(1);
    let rounded_rows = workload.neurons * per_neuron_segments * rps;

    FootprintReport {
        workload,
        geometry,
        synapses,
        locator_rows,
        dense: bound(geometry, locator_rows, dense_rows),
        segment_rounded: bound(geometry, locator_rows, rounded_rows),
        sources_fit_owner_tags: workload.neurons + workload.axons <= MAX_SOURCES as u64,
        neurons_fit_target_field: workload.neurons <= MAX_TARGET as u64 + 1,
    }
}

impl FootprintReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &self.workload;
        let _ = writeln!(s, "[footprint]");
        let _ = writeln!(s, "neurons = {}", w.neurons);
        let _ = writeln!(s, "axons = {}", w.axons);
        let _ = writeln!(s, "mean_fanout = {}", w.fanout);
        let _ = writeln!(s, "synapses = {}", self.synapses);
        let _ = writeln!(s, "memory_bytes = {}", self.geometry.total_bytes());
        let _ = writeln!(s, "memory_rows = {}", self.geometry.total_rows);
        let _ = writeln!(s, "locator_rows = {}", self.locator_rows);
        let _ = writeln!(s, "sources_fit_owner_tags = {}", self.sources_fit_owner_tags);
        let _ = writeln!(s, "neurons_fit_target_field = {}", self.neurons_fit_target_field);
        for (name, b) in [("dense", &self.dense), ("segment_rounded", &self.segment_rounded)] {
            let _ = writeln!(s, "\n[footprint.{name}]");
            let _ = writeln!(s, "synapse_rows = {}", b.synapse_rows);
            let _ = writeln!(s, "total_rows = {}", b.total_rows);
            let _ = writeln!(s, "fits = {}", b.fits);
            let _ = writeln!(s, "margin_rows = {}", b.margin_rows);
            let _ = writeln!(s, "margin_percent = {:.3}", b.margin_fraction * 100.0);
        }
        s
    }
}
