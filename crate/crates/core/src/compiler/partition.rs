//! Assigning neurons and axons to cores.
//!
//! The default partitioner cuts the neuron index range into contiguous blocks
//! of `ceil(N / cores)` neurons. Any other legal assignment can be supplied
//! through [`Placement::from_assignment`].
//!
//! User axons are replicated onto every core that hosts one of their targets,
//! so an input spike reaches all of its targets in the same step. A synapse
//! from a neuron to a neuron on another core becomes an [`InterCoreEdge`],
//! carried by a relay axon on the destination core.

use super::CompileError;
use crate::network::ValidatedNetwork;

/// One synapse whose source and target live on different cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterCoreEdge {
    pub src_core: u32,
    /// Global index of the presynaptic neuron.
    pub src_neuron: u32,
    pub dst_core: u32,
    /// Local axon index of the relay axon on the destination core.
    pub dst_axon: u32,
    /// Global index of the postsynaptic neuron.
    pub target: u32,
    pub weight: i16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    neuron_core: Vec<u32>,
    core_neurons: Vec<Vec<u32>>,
    core_axons: Vec<Vec<u32>>,
    core_relays: Vec<Vec<u32>>,
    edges: Vec<InterCoreEdge>,
}

/// Contiguous-block partition with a per-core neuron cap.
pub fn partition(net: &ValidatedNetwork, cores: usize, capacity: usize) -> Result<Placement, CompileError> {
    if cores == 0 {
        return Err(CompileError::InvalidPartition("at least one core is required".into()));
    }
    let n = net.num_neurons();
    let available = cores.saturating_mul(capacity);
    if n > available {
        return Err(CompileError::CapacityExceeded { needed: n, available });
    }
    let block = n.div_ceil(cores).max(1);
    let assignment = (0..n).map(|i| (i / block) as u32).collect();
    Placement::from_assignment(net, cores, assignment, Some(capacity))
}

impl Placement {
    /// Builds a placement from an explicit core id per neuron (global index order).
    pub fn from_assignment(
        net: &ValidatedNetwork,
        cores: usize,
        neuron_core: Vec<u32>,
        capacity: Option<usize>,
    ) -> Result<Self, CompileError> {
        if cores == 0 {
            return Err(CompileError::InvalidPartition("at least one core is required".into()));
        }
        if neuron_core.len() != net.num_neurons() {
            return Err(CompileError::InvalidPartition(format!(
                "assignment covers {} neurons, network has {}",
                neuron_core.len(),
                net.num_neurons()
            )));
        }
        let mut core_neurons = vec![Vec::new(); cores];
        for (i, &c) in neuron_core.iter().enumerate() {
            let Some(list) = core_neurons.get_mut(c as usize) else {
                return Err(CompileError::InvalidPartition(format!("neuron {i} assigned to core {c} of {cores}")));
            };
            list.push(i as u32);
        }
        if let Some(cap) = capacity {
            if let Some(full) = core_neurons.iter().find(|l| l.len() > cap) {
                return Err(CompileError::CapacityExceeded { needed: full.len(), available: cap });
            }
        }

        let mut core_axons = vec![Vec::new(); cores];
        for a in 0..net.num_axons() as u32 {
            let mut hosts: Vec<u32> = net.axon_synapses(a).iter().map(|&(t, _)| neuron_core[t as usize]).collect();
            hosts.sort_unstable();
            hosts.dedup();
            if hosts.is_empty() {
                hosts.push(0);
            }
            for c in hosts {
                core_axons[c as usize].push(a);
            }
        }

        let mut core_relays: Vec<Vec<u32>> = vec![Vec::new(); cores];
        for s in 0..net.num_neurons() as u32 {
            let src_core = neuron_core[s as usize];
            let mut last = None;
            let mut dsts: Vec<u32> = net
                .neuron_synapses(s)
                .iter()
                .map(|&(t, _)| neuron_core[t as usize])
                .filter(|&c| c != src_core)
                .collect();
            dsts.sort_unstable();
            for c in dsts {
                if last != Some(c) {
                    core_relays[c as usize].push(s);
                    last = Some(c);
                }
            }
        }

        let mut edges = Vec::new();
        for s in 0..net.num_neurons() as u32 {
            let src_core = neuron_core[s as usize];
            for &(t, weight) in net.neuron_synapses(s) {
                let dst_core = neuron_core[t as usize];
                if dst_core == src_core {
                    continue;
                }
                let relays = &core_relays[dst_core as usize];
                let pos = relays.binary_search(&s).expect("relay registered for every remote source");
                edges.push(InterCoreEdge {
                    src_core,
                    src_neuron: s,
                    dst_core,
                    dst_axon: (core_axons[dst_core as usize].len() + pos) as u32,
                    target: t,
                    weight,
                });
            }
        }

        Ok(Self { neuron_core, core_neurons, core_axons, core_relays, edges })
    }

    pub fn cores(&self) -> usize {
        self.core_neurons.len()
    }

    pub fn core_of(&self, neuron: u32) -> u32 {
        self.neuron_core[neuron as usize]
    }

    pub fn neuron_cores(&self) -> &[u32] {
        &self.neuron_core
    }

    /// Global neuron indices hosted on `core`, ascending.
    pub fn neurons_on(&self, core: usize) -> &[u32] {
        &self.core_neurons[core]
    }

    /// Global user-axon indices replicated on `core`, ascending.
    pub fn axons_on(&self, core: usize) -> &[u32] {
        &self.core_axons[core]
    }

    /// Remote presynaptic neurons served by relay axons on `core`, ascending.
    pub fn relays_on(&self, core: usize) -> &[u32] {
        &self.core_relays[core]
    }

    pub fn edges(&self) -> &[InterCoreEdge] {
        &self.edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{demo_network, NetworkDef, NeuronModelSpec};

    fn ring(n: usize) -> ValidatedNetwork {
        let mut def = NetworkDef::new();
        let m = def.add_model(NeuronModelSpec::lif(1, -17, 0));
        for i in 0..n {
            let next = format!("n{:03}", (i + 1) % n);
            def.add_neuron(format!("n{i:03}"), m, [(next, 2)]).unwrap();
        }
        def.add_axon("in", [("n000".to_string(), 5)]).unwrap();
        def.validate().unwrap()
    }

    #[test]
    fn single_core_has_no_edges() {
        let net = demo_network().validate().unwrap();
        let p = partition(&net, 1, 16).unwrap();
        assert_eq!(p.neurons_on(0), [0, 1, 2, 3]);
        assert_eq!(p.axons_on(0), [0, 1]);
        assert!(p.edges().is_empty());
        assert!(p.relays_on(0).is_empty());
    }

    #[test]
    fn ring_on_four_cores() {
        let net = ring(100);
        let p = partition(&net, 4, 25).unwrap();
        for c in 0..4 {
            assert_eq!(p.neurons_on(c).len(), 25);
        }
        // brute-force count of synapses whose endpoints sit on different cores
        let mut crossing = 0;
        for s in 0..100u32 {
            for &(t, _) in net.neuron_synapses(s) {
                if p.core_of(s) != p.core_of(t) {
                    crossing += 1;
                }
            }
        }
        assert_eq!(crossing, 4);
        assert_eq!(p.edges().len(), 4);
        let last = p.edges().iter().find(|e| e.src_neuron == 99).unwrap();
        assert_eq!((last.src_core, last.dst_core, last.target), (3, 0, 0));
        // core 0 hosts the input axon, so its relay comes after it
        assert_eq!(last.dst_axon, 1);
    }

    #[test]
    fn capacity_exceeded() {
        let net = ring(10);
        assert_eq!(
            partition(&net, 1, 5).unwrap_err(),
            CompileError::CapacityExceeded { needed: 10, available: 5 }
        );
        assert!(matches!(partition(&net, 0, 5), Err(CompileError::InvalidPartition(_))));
    }

    #[test]
    fn explicit_assignment_replicates_axons() {
        let net = demo_network().validate().unwrap();
        // a, b on core 0; c, d on core 1
        let p = Placement::from_assignment(&net, 2, vec![0, 0, 1, 1], None).unwrap();
        assert_eq!(p.axons_on(0), [0, 1]); // alpha -> a, beta -> b
        assert_eq!(p.axons_on(1), [0]); // alpha -> c
        assert_eq!(p.relays_on(1), [0]); // a -> d
        assert!(p.relays_on(0).is_empty()); // d -> c stays on core 1
        assert_eq!(p.edges().len(), 1);
        let e = p.edges()[0];
        assert_eq!((e.src_neuron, e.dst_core, e.dst_axon, e.target, e.weight), (0, 1, 1, 3, 2));
        assert!(Placement::from_assignment(&net, 2, vec![0, 0, 2, 1], None).is_err());
        assert!(Placement::from_assignment(&net, 2, vec![0, 0, 1], None).is_err());
    }
}
