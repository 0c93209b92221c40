mod common;

use proptest::prelude::*;

use hiaer_core::compiler::{compile, emit_image, load_image, CompileOptions, MemoryGeometry, SynapseEntry};
use hiaer_core::generate::{random_network, rng, GenParams};
use hiaer_core::network::{demo_network, parse_network, serialize_network, NetworkDef, Synapse};

fn opts() -> CompileOptions {
    CompileOptions { geometry: MemoryGeometry::with_rows(1 << 20), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn document_round_trip(seed in any::<u64>(), max_neurons in 1usize..=10_000) {
        let p = GenParams { max_neurons, max_synapses: 60_000, ..Default::default() };
        let def = random_network(&mut rng(seed), &p);
        let text = serialize_network(&def);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(&back, &def);
        prop_assert_eq!(serialize_network(&back), text);
    }
}

/// One structural defect per variant, applied to an otherwise valid network.
fn mutate(def: &mut NetworkDef, kind: u8, pick: usize) {
    let keys: Vec<String> = def.neurons.keys().cloned().collect();
    let key = keys[pick % keys.len()].clone();
    match kind {
        0 => def.neurons.get_mut(&key).unwrap().synapses.push(Synapse::new("no-such-neuron", 1)),
        1 => {
            let n = def.neurons.get_mut(&key).unwrap();
            n.synapses.retain(|s| s.target != key);
            n.synapses.push(Synapse::new(key.clone(), 1));
            n.synapses.push(Synapse::new(key.clone(), 2));
        }
        2 => def.neurons.get_mut(&key).unwrap().synapses.push(Synapse::new(key.clone(), 1 << 15)),
        3 => def.neurons.get_mut(&key).unwrap().model = def.models.len(),
        4 => {
            def.outputs.insert("ghost".into());
        }
        5 => {
            let n = def.neurons.remove(&key).unwrap();
            def.neurons.insert(format!("{key} x"), n);
        }
        _ => {
            let n = def.neurons.get_mut(&key).unwrap();
            n.synapses.push(Synapse::new("", 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mutations_are_rejected(seed in any::<u64>(), kind in 0u8..7, pick in any::<usize>()) {
        let p = GenParams { max_neurons: 60, max_synapses: 400, ..Default::default() };
        let mut def = random_network(&mut rng(seed), &p);
        prop_assert!(def.validate().is_ok());
        mutate(&mut def, kind, pick);
        // a mutation may be caught by the document layer or by validation
        let verdict = parse_network(&serialize_network(&def)).map(|d| d.validate());
        prop_assert!(!matches!(verdict, Ok(Ok(_))), "mutation {} accepted", kind);
    }
}

#[test]
fn checker_accepts_clean_images() {
    let net = demo_network().validate().unwrap();
    let c = compile(&net, &opts()).unwrap();
    common::check_images(&net, &c.placement, &c.images).unwrap();
}

#[test]
fn checker_catches_a_moved_target() {
    let net = demo_network().validate().unwrap();
    let c = compile(&net, &opts()).unwrap();
    let img = &c.images[0];
    // retarget one user synapse to a neuron in a different lane
    let (at, e) = img
        .region_entries(hiaer_core::network::Source::Axon(0))
        .next()
        .expect("axon 0 has synapses");
    let moved = SynapseEntry { target: (e.target + 1) % img.num_neurons() as u32, ..e };
    let needle = img.synapse_row(at.row)[at.col].to_le_bytes();
    let mut bytes = emit_image(img);
    let pos = bytes.windows(8).position(|w| w == needle).unwrap();
    bytes[pos..pos + 8].copy_from_slice(&moved.encode().to_le_bytes());
    let corrupt = load_image(&bytes).unwrap();
    let err = common::check_images(&net, &c.placement, &[corrupt]).unwrap_err();
    assert!(err.contains("lane") || err.contains("multiset"), "{err}");
}

#[test]
fn checker_catches_a_changed_weight() {
    let net = demo_network().validate().unwrap();
    let c = compile(&net, &opts()).unwrap();
    let mut def = demo_network();
    def.neurons.get_mut("a").unwrap().synapses[0].weight += 1;
    let other = def.validate().unwrap();
    let err = common::check_images(&other, &c.placement, &c.images).unwrap_err();
    assert!(err.contains("multiset"), "{err}");
}

#[test]
fn scanned_density_matches_stats_on_demo() {
    let net = demo_network().validate().unwrap();
    let c = compile(&net, &opts()).unwrap();
    let stats = hiaer_core::compiler::image_stats(&c.images[0]);
    assert_eq!(common::scan_density(&c.images), stats.density);
    assert_eq!(stats.user_synapses, 6);
}
