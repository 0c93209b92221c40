//! The compiled per-core memory image.
//!
//! Rows are laid out as three consecutive regions:
//!
//! * axon locators, one slot per local axon, in axon order;
//! * neuron locators, local neuron `n` at slot `n` of the region, which puts
//!   it in column `n mod 16` of segment `n div 16`;
//! * synapses, where an entry for target `t` always sits in column `t mod 16`
//!   of its segment.
//!
//! Both locator regions are rounded up to whole segments. Only rows up to the
//! end of the used synapse region are stored; the rest of the modeled memory
//! is implicitly zero.

use std::collections::HashMap;

use super::geometry::{
    LocatorEntry, MemoryGeometry, SynapseEntry, LOC_PLACEHOLDER, LOC_VALID, MAX_SOURCES, MAX_TARGET,
    ROWS_PER_SEGMENT, SEGMENT_SLOTS, SLOTS_PER_ROW,
};
use super::local::{AxonLabel, CoreNetwork};
use super::pack::{naive_region, pack_region, DemandProfile};
use super::CompileError;
use crate::network::{NeuronModelSpec, Source};

/// Synapse-region allocator used by [`build_memory_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Allocator {
    #[default]
    Packed,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronInfo {
    pub key: String,
    /// Index of the neuron in the whole (unpartitioned) network.
    pub global: u32,
}

/// Slot position of a synapse entry, relative to the synapse region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRef {
    pub row: u64,
    pub col: usize,
}

impl SlotRef {
    /// Column within the 16-slot segment.
    pub fn lane(&self) -> usize {
        (self.row as usize % ROWS_PER_SEGMENT) * SLOTS_PER_ROW + self.col
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryImage {
    pub(crate) geometry: MemoryGeometry,
    pub(crate) axon_rows: u32,
    pub(crate) neuron_rows: u32,
    pub(crate) synapse_rows: u32,
    pub(crate) models: Vec<NeuronModelSpec>,
    pub(crate) axons: Vec<AxonLabel>,
    pub(crate) neurons: Vec<NeuronInfo>,
    pub(crate) slots: Vec<u64>,
    pub(crate) index: KeyIndex,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct KeyIndex {
    inputs: HashMap<String, u32>,
    relays: HashMap<String, u32>,
    neurons: HashMap<String, u32>,
}

impl KeyIndex {
    pub(crate) fn build(axons: &[AxonLabel], neurons: &[NeuronInfo]) -> Self {
        let mut index = KeyIndex::default();
        for (i, label) in axons.iter().enumerate() {
            match label {
                AxonLabel::Input(k) => index.inputs.insert(k.clone(), i as u32),
                AxonLabel::Relay(k) => index.relays.insert(k.clone(), i as u32),
            };
        }
        for (i, n) in neurons.iter().enumerate() {
            index.neurons.insert(n.key.clone(), i as u32);
        }
        index
    }
}

fn segment_rows(count: usize) -> u32 {
    (count.div_ceil(SEGMENT_SLOTS) * ROWS_PER_SEGMENT) as u32
}

/// Per-source entries bucketed by column, in definition order.
struct SourcePlan {
    columns: [Vec<(u32, i16)>; SEGMENT_SLOTS],
    placeholder: bool,
}

impl SourcePlan {
    fn new(synapses: &[(u32, i16)], is_neuron: bool) -> Self {
        let mut columns: [Vec<(u32, i16)>; SEGMENT_SLOTS] = Default::default();
        let placeholder = is_neuron && synapses.is_empty();
        if placeholder {
            for (c, col) in columns.iter_mut().enumerate() {
                col.push((c as u32, 0));
            }
        } else {
            for &(t, w) in synapses {
                columns[t as usize % SEGMENT_SLOTS].push((t, w));
            }
        }
        Self { columns, placeholder }
    }

    fn profile(&self) -> DemandProfile {
        let counts: [usize; SEGMENT_SLOTS] = std::array::from_fn(|c| self.columns[c].len());
        DemandProfile::from_column_counts(&counts)
    }
}

/// Maps one core's network into its memory image.
pub fn build_memory_image(
    core: &CoreNetwork,
    geometry: MemoryGeometry,
    allocator: Allocator,
) -> Result<MemoryImage, CompileError> {
    let n_axons = core.axons.len();
    let n_neurons = core.neurons.len();
    if n_axons + n_neurons > MAX_SOURCES {
        return Err(CompileError::TooManySources { sources: n_axons + n_neurons, limit: MAX_SOURCES });
    }
    if n_neurons > MAX_TARGET as usize + 1 {
        return Err(CompileError::TooManyNeurons { neurons: n_neurons, limit: MAX_TARGET as usize + 1 });
    }

    let plans: Vec<SourcePlan> = core
        .axons
        .iter()
        .map(|a| SourcePlan::new(&a.synapses, false))
        .chain(core.neurons.iter().map(|n| SourcePlan::new(&n.synapses, true)))
        .collect();
    let profiles: Vec<DemandProfile> = plans.iter().map(SourcePlan::profile).collect();
    let layout = match allocator {
        Allocator::Packed => pack_region(&profiles),
        Allocator::Naive => naive_region(&profiles),
    };

    let axon_rows = segment_rows(n_axons);
    let neuron_rows = segment_rows(n_neurons);
    let locator_rows = axon_rows as u64 + neuron_rows as u64;
    let available = geometry.total_rows.saturating_sub(locator_rows);
    if layout.total_rows > available {
        return Err(CompileError::SynapseRegionOverflow { rows_needed: layout.total_rows, rows_available: available });
    }
    if layout.total_rows > u32::MAX as u64 {
        return Err(CompileError::SynapseRegionOverflow { rows_needed: layout.total_rows, rows_available: u32::MAX as u64 });
    }

    let stored_rows = locator_rows + layout.total_rows;
    let mut slots = vec![0u64; stored_rows as usize * SLOTS_PER_ROW];
    let syn_base = locator_rows as usize * SLOTS_PER_ROW;
    let neuron_base = axon_rows as usize * SLOTS_PER_ROW;

    for (ordinal, (plan, alloc)) in plans.iter().zip(&layout.allocations).enumerate() {
        let row_count = u16::try_from(alloc.row_count)
            .map_err(|_| CompileError::RegionTooLarge { source_ordinal: ordinal, rows: alloc.row_count })?;
        let neuron = ordinal.checked_sub(n_axons).map(|n| &core.neurons[n]);

        let mut first: Option<usize> = None;
        for (c, entries) in plan.columns.iter().enumerate() {
            for (j, &(target, weight)) in entries.iter().enumerate() {
                let row = alloc.base_row as usize + j * ROWS_PER_SEGMENT + c / SLOTS_PER_ROW;
                let slot = syn_base + row * SLOTS_PER_ROW + c % SLOTS_PER_ROW;
                debug_assert_eq!(slots[slot], 0, "slot collision");
                slots[slot] = SynapseEntry::new(ordinal as u32, target, weight).encode();
                if j == 0 && first.is_none() {
                    first = Some(slot);
                }
            }
        }

        let mut flags = LOC_VALID;
        if let Some(n) = neuron {
            if plan.placeholder {
                flags |= LOC_PLACEHOLDER;
            }
            if n.output {
                // every neuron region holds at least one entry, so the flag always has a home
                let slot = first.expect("neuron regions are never empty");
                let mut e = SynapseEntry::decode(slots[slot]);
                e.output = true;
                slots[slot] = e.encode();
            }
        }
        let locator = LocatorEntry {
            base_row: alloc.base_row as u32,
            row_count,
            model_id: neuron.map_or(0, |n| n.model),
            flags,
        };
        let slot = match neuron {
            None => ordinal,
            Some(_) => neuron_base + (ordinal - n_axons),
        };
        slots[slot] = locator.encode();
    }

    let axons: Vec<AxonLabel> = core.axons.iter().map(|a| a.label.clone()).collect();
    let neurons: Vec<NeuronInfo> =
        core.neurons.iter().map(|n| NeuronInfo { key: n.key.clone(), global: n.global }).collect();
    let index = KeyIndex::build(&axons, &neurons);
    Ok(MemoryImage {
        geometry,
        axon_rows,
        neuron_rows,
        synapse_rows: layout.total_rows as u32,
        models: core.models.clone(),
        axons,
        neurons,
        slots,
        index,
    })
}

impl MemoryImage {
    pub fn geometry(&self) -> MemoryGeometry {
        self.geometry
    }

    pub fn num_axons(&self) -> usize {
        self.axons.len()
    }

    pub fn num_neurons(&self) -> usize {
        self.neurons.len()
    }

    pub fn models(&self) -> &[NeuronModelSpec] {
        &self.models
    }

    pub fn axon_labels(&self) -> &[AxonLabel] {
        &self.axons
    }

    pub fn neurons(&self) -> &[NeuronInfo] {
        &self.neurons
    }

    /// Rows of the axon-locator region.
    pub fn axon_region_rows(&self) -> u32 {
        self.axon_rows
    }

    pub fn neuron_region_rows(&self) -> u32 {
        self.neuron_rows
    }

    /// Rows of the synapse region that are allocated.
    pub fn synapse_region_rows(&self) -> u32 {
        self.synapse_rows
    }

    /// First row of the synapse region.
    pub fn synapse_region_start(&self) -> u64 {
        self.axon_rows as u64 + self.neuron_rows as u64
    }

    /// All stored slots, row-major from row 0.
    pub fn raw_slots(&self) -> &[u64] {
        &self.slots
    }

    pub fn input_axon(&self, key: &str) -> Option<u32> {
        self.index.inputs.get(key).copied()
    }

    pub fn relay_axon(&self, source_key: &str) -> Option<u32> {
        self.index.relays.get(source_key).copied()
    }

    pub fn neuron_by_key(&self, key: &str) -> Option<u32> {
        self.index.neurons.get(key).copied()
    }

    /// Owner tag of a local source: axons first, then neurons.
    pub fn source_ordinal(&self, source: Source) -> u32 {
        match source {
            Source::Axon(a) => a,
            Source::Neuron(n) => self.axons.len() as u32 + n,
        }
    }

    pub fn axon_locator(&self, axon: u32) -> LocatorEntry {
        LocatorEntry::decode(self.slots[axon as usize])
    }

    pub fn neuron_locator(&self, neuron: u32) -> LocatorEntry {
        LocatorEntry::decode(self.slots[self.neuron_locator_slot(neuron)])
    }

    pub fn locator(&self, source: Source) -> LocatorEntry {
        match source {
            Source::Axon(a) => self.axon_locator(a),
            Source::Neuron(n) => self.neuron_locator(n),
        }
    }

    /// Absolute slot index of a neuron's locator.
    pub fn neuron_locator_slot(&self, neuron: u32) -> usize {
        self.axon_rows as usize * SLOTS_PER_ROW + neuron as usize
    }

    /// The eight slots of a synapse-region row (relative row index).
    pub fn synapse_row(&self, row: u64) -> &[u64] {
        let start = (self.synapse_region_start() + row) as usize * SLOTS_PER_ROW;
        &self.slots[start..start + SLOTS_PER_ROW]
    }

    pub fn synapse_slot(&self, at: SlotRef) -> SynapseEntry {
        SynapseEntry::decode(self.synapse_row(at.row)[at.col])
    }

    pub(crate) fn set_synapse_slot(&mut self, at: SlotRef, entry: SynapseEntry) {
        let idx = (self.synapse_region_start() + at.row) as usize * SLOTS_PER_ROW + at.col;
        self.slots[idx] = entry.encode();
    }

    /// Entries owned by `source`, in row-major scan order of its region.
    pub fn region_entries(&self, source: Source) -> impl Iterator<Item = (SlotRef, SynapseEntry)> + '_ {
        let loc = self.locator(source);
        let owner = self.source_ordinal(source);
        let rows = loc.base_row as u64..loc.base_row as u64 + loc.row_count as u64;
        rows.flat_map(move |row| {
            self.synapse_row(row).iter().enumerate().filter_map(move |(col, &word)| {
                let e = SynapseEntry::decode(word);
                (e.valid && e.owner == owner).then_some((SlotRef { row, col }, e))
            })
        })
    }

    /// User synapses of `source` as (local target, weight); placeholder entries are skipped.
    pub fn decode_synapses(&self, source: Source) -> Vec<(u32, i16)> {
        if self.locator(source).is_placeholder() {
            return Vec::new();
        }
        self.region_entries(source).map(|(_, e)| (e.target, e.weight)).collect()
    }

    /// Whether the neuron's region carries the output flag.
    pub fn is_output(&self, neuron: u32) -> bool {
        self.region_entries(Source::Neuron(neuron)).any(|(_, e)| e.output)
    }

    /// Locates the user synapse `source -> target`.
    pub fn find_synapse(&self, source: Source, target: u32) -> Option<SlotRef> {
        if self.locator(source).is_placeholder() {
            return None;
        }
        self.region_entries(source).find(|(_, e)| e.target == target).map(|(at, _)| at)
    }
}
