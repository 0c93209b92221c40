//! Network-to-memory compiler: partitioning, local indexing, region packing
//! and image emission.

mod binary;
mod footprint;
mod geometry;
mod image;
mod local;
mod pack;
mod partition;
mod stats;

use rayon::prelude::*;
use thiserror::Error;

pub use binary::{emit_image, load_image, ImageFormatError, HEADER_BYTES, IMAGE_MAGIC};
pub use footprint::{estimate_footprint, FootprintBound, FootprintReport, Workload};
pub use geometry::{
    GeometryParseError, LocatorEntry, MemoryGeometry, SynapseEntry, DEFAULT_TOTAL_ROWS, LOC_PLACEHOLDER, LOC_VALID,
    MAX_SOURCES, MAX_TARGET, ROWS_PER_SEGMENT, SEGMENT_SLOTS, SLOTS_PER_ROW, SLOT_BITS,
};
pub use image::{build_memory_image, Allocator, MemoryImage, NeuronInfo, SlotRef};
pub use local::{
    assign_local_indices, localize, sequential_local_indices, AxonLabel, CoreAxon, CoreNetwork, CoreNeuron,
    IndexPolicy,
};
pub use pack::{naive_region, pack_region, DemandProfile, RegionLayout, RowAllocation};
pub use partition::{partition, InterCoreEdge, Placement};
pub use stats::{image_stats, ImageStats};

use crate::network::ValidatedNetwork;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("capacity exceeded: {needed} neurons, {available} available")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("synapse region overflow: {rows_needed} rows needed, {rows_available} available")]
    SynapseRegionOverflow { rows_needed: u64, rows_available: u64 },
    #[error("source {source_ordinal} needs {rows} rows, more than a locator can address")]
    RegionTooLarge { source_ordinal: usize, rows: u64 },
    #[error("{sources} sources on one core exceed the owner-tag limit of {limit}")]
    TooManySources { sources: usize, limit: usize },
    #[error("{neurons} neurons on one core exceed the target-index limit of {limit}")]
    TooManyNeurons { neurons: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub cores: usize,
    /// Neurons per core.
    pub capacity: usize,
    pub geometry: MemoryGeometry,
    pub allocator: Allocator,
    pub index_policy: IndexPolicy,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            cores: 1,
            capacity: usize::MAX,
            geometry: MemoryGeometry::default(),
            allocator: Allocator::Packed,
            index_policy: IndexPolicy::Balanced,
        }
    }
}

/// Per-core images plus the placement that produced them.
#[derive(Debug, Clone)]
pub struct CompiledNetwork {
    pub placement: Placement,
    pub images: Vec<MemoryImage>,
}

pub fn compile(net: &ValidatedNetwork, opts: &CompileOptions) -> Result<CompiledNetwork, CompileError> {
    let placement = partition(net, opts.cores, opts.capacity)?;
    compile_placement(net, placement, opts)
}

/// Builds every core's image for a given placement; cores compile in parallel.
pub fn compile_placement(
    net: &ValidatedNetwork,
    placement: Placement,
    opts: &CompileOptions,
) -> Result<CompiledNetwork, CompileError> {
    let images = (0..placement.cores())
        .into_par_iter()
        .map(|core| {
            let local = localize(net, &placement, core, opts.index_policy);
            build_memory_image(&local, opts.geometry, opts.allocator)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompiledNetwork { placement, images })
}
