use super::geometry::{SynapseEntry, SLOTS_PER_ROW};
use super::image::MemoryImage;
use crate::network::Source;

/// Occupancy summary of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStats {
    /// Valid entries in the synapse region, placeholders included.
    pub valid_entries: u64,
    /// Entries that encode user synapses.
    pub user_synapses: u64,
    /// Slots in the allocated synapse rows.
    pub allocated_slots: u64,
    /// `valid_entries / allocated_slots`, or 0 for an empty region.
    pub density: f64,
    pub axon_rows: u32,
    pub neuron_rows: u32,
    pub synapse_rows: u32,
}

pub fn image_stats(img: &MemoryImage) -> ImageStats {
    let start = img.synapse_region_start() as usize * SLOTS_PER_ROW;
    let valid_entries = img.raw_slots()[start..].iter().filter(|&&w| SynapseEntry::decode(w).valid).count() as u64;
    let user_synapses = (0..img.num_axons() as u32)
        .map(Source::Axon)
        .chain((0..img.num_neurons() as u32).map(Source::Neuron))
        .map(|s| img.decode_synapses(s).len() as u64)
        .sum();
    let allocated_slots = img.synapse_region_rows() as u64 * SLOTS_PER_ROW as u64;
    let density = if allocated_slots == 0 { 0.0 } else { valid_entries as f64 / allocated_slots as f64 };
    ImageStats {
        valid_entries,
        user_synapses,
        allocated_slots,
        density,
        axon_rows: img.axon_region_rows(),
        neuron_rows: img.neuron_region_rows(),
        synapse_rows: img.synapse_region_rows(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::local::{AxonLabel, CoreAxon, CoreNetwork, CoreNeuron};
    use crate::compiler::{build_memory_image, Allocator, MemoryGeometry};
    use crate::network::NeuronModelSpec;

    #[test]
    fn one_full_segment_is_dense() {
        let core = CoreNetwork {
            models: vec![NeuronModelSpec::binary(0)],
            axons: vec![CoreAxon { label: AxonLabel::Input("x".into()), synapses: (0..16).map(|t| (t, 1)).collect() }],
            neurons: (0..16)
                .map(|i| CoreNeuron { key: format!("n{i}"), global: i, model: 0, output: false, synapses: vec![(i, 1)] })
                .collect(),
        };
        let img = build_memory_image(&core, MemoryGeometry::with_rows(64), Allocator::Packed).unwrap();
        let stats = image_stats(&img);
        // the axon fills one segment; the 16 self-synapses fill another
        assert_eq!(stats.synapse_rows, 4);
        assert_eq!(stats.valid_entries, 32);
        assert_eq!(stats.user_synapses, 32);
        assert_eq!(stats.density, 1.0);
    }
}
