//! Per-core view of a partitioned network with local indices.

use super::geometry::SEGMENT_SLOTS;
use super::partition::Placement;
use crate::network::{NeuronModelSpec, ValidatedNetwork};

/// What a local axon stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AxonLabel {
    /// A user axon, by key.
    Input(String),
    /// Relay for a neuron on another core, by that neuron's key.
    Relay(String),
}

impl AxonLabel {
    pub fn key(&self) -> &str {
        match self {
            AxonLabel::Input(k) | AxonLabel::Relay(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreAxon {
    pub label: AxonLabel,
    /// (local target, weight) in definition order.
    pub synapses: Vec<(u32, i16)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreNeuron {
    pub key: String,
    pub global: u32,
    pub model: u8,
    pub output: bool,
    /// (local target, weight) for targets on the same core, in definition order.
    pub synapses: Vec<(u32, i16)>,
}

/// Everything needed to build one core's memory image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreNetwork {
    pub models: Vec<NeuronModelSpec>,
    pub axons: Vec<CoreAxon>,
    pub neurons: Vec<CoreNeuron>,
}

/// Orders neurons for local indexing.
///
/// `models[i]` and `in_degree[i]` describe the i-th neuron. Returns, for each
/// local index, the position of the neuron that receives it. Neurons are
/// grouped by ascending model id; inside a group, neurons are taken in
/// decreasing in-degree and each gets a free index from the residue class
/// mod 16 with the least accumulated in-degree so far.
pub fn assign_local_indices(models: &[u8], in_degree: &[u32]) -> Vec<usize> {
    assert_eq!(models.len(), in_degree.len());
    let n = models.len();
    let mut order = vec![usize::MAX; n];
    let mut column_load = [0u64; SEGMENT_SLOTS];

    let mut by_model: Vec<usize> = (0..n).collect();
    by_model.sort_by_key(|&i| (models[i], i));

    let mut start = 0;
    while start < n {
        let model = models[by_model[start]];
        let end = start + by_model[start..].iter().take_while(|&&i| models[i] == model).count();

        let mut group: Vec<usize> = by_model[start..end].to_vec();
        group.sort_by_key(|&i| (std::cmp::Reverse(in_degree[i]), i));

        // Free indices in [start, end) per residue class, ascending.
        let mut next_free = [usize::MAX; SEGMENT_SLOTS];
        for r in 0..SEGMENT_SLOTS {
            let first = start + (r + SEGMENT_SLOTS - start % SEGMENT_SLOTS) % SEGMENT_SLOTS;
            if first < end {
                next_free[r] = first;
            }
        }

        for i in group {
            let r = (0..SEGMENT_SLOTS)
                .filter(|&r| next_free[r] != usize::MAX)
                .min_by_key(|&r| (column_load[r], next_free[r]))
                .expect("group has as many free indices as members");
            let idx = next_free[r];
            order[idx] = i;
            column_load[r] += in_degree[i] as u64;
            next_free[r] = if idx + SEGMENT_SLOTS < end { idx + SEGMENT_SLOTS } else { usize::MAX };
        }
        start = end;
    }
    order
}

/// Identity ordering by model group only, for comparison runs.
pub fn sequential_local_indices(models: &[u8]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by_key(|&i| (models[i], i));
    order
}

/// How local indices are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexPolicy {
    #[default]
    Balanced,
    Sequential,
}

/// Extracts `core` from a placement and assigns local indices.
pub fn localize(net: &ValidatedNetwork, placement: &Placement, core: usize, policy: IndexPolicy) -> CoreNetwork {
    let hosted = placement.neurons_on(core);
    let core_u32 = core as u32;
    let on_core = |t: u32| placement.core_of(t) == core_u32;

    // position of each hosted neuron in `hosted`
    let pos_of = |g: u32| hosted.binary_search(&g).expect("target hosted on this core");

    let mut in_degree = vec![0u32; hosted.len()];
    let mut count = |syns: &[(u32, i16)]| {
        for &(t, _) in syns {
            if on_core(t) {
                in_degree[pos_of(t)] += 1;
            }
        }
    };
    for &a in placement.axons_on(core) {
        count(net.axon_synapses(a));
    }
    for &s in placement.relays_on(core) {
        count(net.neuron_synapses(s));
    }
    for &s in hosted {
        count(net.neuron_synapses(s));
    }

    let models: Vec<u8> = hosted.iter().map(|&g| net.model_id(g)).collect();
    let order = match policy {
        IndexPolicy::Balanced => assign_local_indices(&models, &in_degree),
        IndexPolicy::Sequential => sequential_local_indices(&models),
    };
    let mut local_of_pos = vec![0u32; hosted.len()];
    for (local, &pos) in order.iter().enumerate() {
        local_of_pos[pos] = local as u32;
    }
    let localize_syns = |syns: &[(u32, i16)]| -> Vec<(u32, i16)> {
        syns.iter().filter(|&&(t, _)| on_core(t)).map(|&(t, w)| (local_of_pos[pos_of(t)], w)).collect()
    };

    let mut axons: Vec<CoreAxon> = placement
        .axons_on(core)
        .iter()
        .map(|&a| CoreAxon {
            label: AxonLabel::Input(net.axon_keys()[a as usize].clone()),
            synapses: localize_syns(net.axon_synapses(a)),
        })
        .collect();
    axons.extend(placement.relays_on(core).iter().map(|&s| CoreAxon {
        label: AxonLabel::Relay(net.neuron_keys()[s as usize].clone()),
        synapses: localize_syns(net.neuron_synapses(s)),
    }));

    let neurons = order
        .iter()
        .map(|&pos| {
            let g = hosted[pos];
            CoreNeuron {
                key: net.neuron_keys()[g as usize].clone(),
                global: g,
                model: net.model_id(g),
                output: net.is_output(g),
                synapses: localize_syns(net.neuron_synapses(g)),
            }
        })
        .collect();

    CoreNetwork { models: net.models().to_vec(), axons, neurons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::partition;
    use crate::network::demo_network;

    #[test]
    fn demo_grouping() {
        let net = demo_network().validate().unwrap();
        let p = partition(&net, 1, 16).unwrap();
        let core = localize(&net, &p, 0, IndexPolicy::Balanced);
        let keys: Vec<&str> = core.neurons.iter().map(|n| n.key.as_str()).collect();
        // a, b, c share the first model and take indices 0..3; d takes 3.
        // b and c have in-degree 2, a has 1.
        assert_eq!(keys, ["b", "c", "a", "d"]);
        let models: Vec<u8> = core.neurons.iter().map(|n| n.model).collect();
        assert_eq!(models, [0, 0, 0, 1]);
        // a -> b (local 0), a -> d (local 3)
        assert_eq!(core.neurons[2].synapses, [(0, 1), (3, 2)]);
        assert_eq!(core.axons[0].label, AxonLabel::Input("alpha".into()));
        assert_eq!(core.axons[0].synapses, [(2, 3), (1, 2)]);
    }

    #[test]
    fn sixteen_neurons_fill_one_row_of_locators() {
        let order = assign_local_indices(&[0; 16], &[0; 16]);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
        assert_eq!(order, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn hot_targets_get_distinct_lanes() {
        let mut deg = vec![1u32; 32];
        for &hot in &[3, 19, 7, 23] {
            deg[hot] = 100;
        }
        let order = assign_local_indices(&[0; 32], &deg);
        let lanes: Vec<usize> = (0..32).filter(|&l| deg[order[l]] == 100).map(|l| l % 16).collect();
        assert_eq!(lanes.len(), 4);
        let mut uniq = lanes.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 4, "hot targets share a lane: {lanes:?}");
    }

    #[test]
    fn groups_start_mid_segment() {
        // 5 neurons of model 0 then 20 of model 1: the second group starts at lane 5
        let mut models = vec![0u8; 5];
        models.extend(std::iter::repeat_n(1u8, 20));
        let deg: Vec<u32> = (0..25).map(|i| (i * 7 % 11) as u32).collect();
        let order = assign_local_indices(&models, &deg);
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..25).collect::<Vec<_>>());
        for (local, &pos) in order.iter().enumerate() {
            assert_eq!(models[pos], if local < 5 { 0 } else { 1 });
        }
    }
}
