//! Helpers shared by the integration test targets.
//!
//! The image checker decodes raw slot words with its own masks rather than
//! the library's decoders, so a layout bug cannot hide behind a matching
//! decode bug.

#![allow(dead_code)]

use hiaer_core::compiler::{AxonLabel, MemoryImage, Placement};
use hiaer_core::network::ValidatedNetwork;

const SLOTS_PER_ROW: usize = 8;
const SEGMENT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawEntry {
    pub weight: i16,
    pub target: u32,
    pub owner: u32,
    pub output: bool,
    pub valid: bool,
}

pub fn raw_entry(w: u64) -> RawEntry {
    RawEntry {
        weight: (w & 0xFFFF) as u16 as i16,
        target: ((w >> 16) & 0xFF_FFFF) as u32,
        owner: ((w >> 40) & 0x3F_FFFF) as u32,
        output: w >> 62 & 1 == 1,
        valid: w >> 63 == 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawLocator {
    pub base: u64,
    pub rows: u64,
    pub model: u8,
    pub valid: bool,
    pub placeholder: bool,
}

pub fn raw_locator(w: u64) -> RawLocator {
    let flags = (w >> 56) as u8;
    RawLocator {
        base: w & 0xFFFF_FFFF,
        rows: (w >> 32) & 0xFFFF,
        model: (w >> 48) as u8,
        valid: flags & 1 == 1,
        placeholder: flags & 2 == 2,
    }
}

/// Synapse-region words of an image, found from its region sizes.
fn region(img: &MemoryImage) -> &[u64] {
    let start = (img.axon_region_rows() + img.neuron_region_rows()) as usize * SLOTS_PER_ROW;
    &img.raw_slots()[start..start + img.synapse_region_rows() as usize * SLOTS_PER_ROW]
}

/// Valid entries over allocated slots, counted bit by bit.
pub fn scan_density(images: &[MemoryImage]) -> f64 {
    let (mut valid, mut slots) = (0u64, 0u64);
    for img in images {
        let r = region(img);
        valid += r.iter().filter(|&&w| w >> 63 == 1).count() as u64;
        slots += r.len() as u64;
    }
    if slots == 0 {
        0.0
    } else {
        valid as f64 / slots as f64
    }
}

/// Checks every structural property of a compiled system against the
/// network it came from. Returns the first violation found.
pub fn check_images(net: &ValidatedNetwork, placement: &Placement, images: &[MemoryImage]) -> Result<(), String> {
    let mut decoded: Vec<(String, u32, i16)> = Vec::new();
    for (c, img) in images.iter().enumerate() {
        check_core(net, placement, c, img, &mut decoded).map_err(|e| format!("core {c}: {e}"))?;
    }
    let mut expected: Vec<(String, u32, i16)> = Vec::new();
    for (a, key) in net.axon_keys().iter().enumerate() {
        for &(t, w) in net.axon_synapses(a as u32) {
            expected.push((format!("axon:{key}"), t, w));
        }
    }
    for (n, key) in net.neuron_keys().iter().enumerate() {
        for &(t, w) in net.neuron_synapses(n as u32) {
            expected.push((format!("neuron:{key}"), t, w));
        }
    }
    decoded.sort();
    expected.sort();
    if decoded != expected {
        return Err(format!("decoded synapse multiset differs: {} decoded vs {} defined", decoded.len(), expected.len()));
    }
    Ok(())
}

fn check_core(
    net: &ValidatedNetwork,
    placement: &Placement,
    core: usize,
    img: &MemoryImage,
    decoded: &mut Vec<(String, u32, i16)>,
) -> Result<(), String> {
    let slots = img.raw_slots();
    let n_axons = img.num_axons();
    let n_neurons = img.num_neurons();
    let neuron_base = img.axon_region_rows() as usize * SLOTS_PER_ROW;
    let syn_rows = img.synapse_region_rows() as u64;
    let words = region(img);

    // locator regions: dense, valid, padded with zeros
    if !(img.axon_region_rows() as usize).is_multiple_of(2) || !(img.neuron_region_rows() as usize).is_multiple_of(2) {
        return Err("locator regions are not whole segments".into());
    }
    if n_axons > neuron_base || n_neurons > img.neuron_region_rows() as usize * SLOTS_PER_ROW {
        return Err("locator region too small".into());
    }
    let neuron_end = neuron_base + img.neuron_region_rows() as usize * SLOTS_PER_ROW;
    for (i, &w) in slots[..neuron_end].iter().enumerate() {
        let used = i < n_axons || (neuron_base..neuron_base + n_neurons).contains(&i);
        if used != (w != 0) || (used && !raw_locator(w).valid) {
            return Err(format!("locator slot {i} occupancy is wrong"));
        }
    }
    let locs: Vec<RawLocator> = (0..n_axons)
        .map(|a| raw_locator(slots[a]))
        .chain((0..n_neurons).map(|n| raw_locator(slots[neuron_base + n])))
        .collect();
    for (o, l) in locs.iter().enumerate() {
        if l.base % 2 != 0 || l.rows % 2 != 0 || l.base + l.rows > syn_rows {
            return Err(format!("source {o}: region [{}, +{}) is not segment-aligned inside the region", l.base, l.rows));
        }
        if o < n_axons && (l.model != 0 || l.placeholder) {
            return Err(format!("axon {o} locator carries neuron fields"));
        }
    }

    // model grouping: local neuron order is sorted by model id
    let models: Vec<u8> = locs[n_axons..].iter().map(|l| l.model).collect();
    if models.windows(2).any(|w| w[0] > w[1]) {
        return Err("neurons are not grouped by model".into());
    }
    for (n, info) in img.neurons().iter().enumerate() {
        if models[n] != net.model_id(info.global) {
            return Err(format!("neuron '{}' has model {} in the image", info.key, models[n]));
        }
    }

    // every entry: owned, inside its owner's region, in its target's lane
    let mut per_owner = vec![Vec::new(); locs.len()];
    for (i, &w) in words.iter().enumerate() {
        let e = raw_entry(w);
        if !e.valid {
            if w != 0 {
                return Err(format!("slot {i}: invalid entry with nonzero bits"));
            }
            continue;
        }
        let row = (i / SLOTS_PER_ROW) as u64;
        let lane = (row as usize % 2) * SLOTS_PER_ROW + i % SLOTS_PER_ROW;
        let o = e.owner as usize;
        let Some(l) = locs.get(o) else {
            return Err(format!("slot {i}: owner {o} does not exist"));
        };
        if row < l.base || row >= l.base + l.rows {
            return Err(format!("slot {i}: entry of source {o} outside its region"));
        }
        if e.target as usize % SEGMENT != lane {
            return Err(format!("slot {i}: target {} in lane {lane}", e.target));
        }
        if e.output && o < n_axons {
            return Err(format!("slot {i}: output flag on an axon entry"));
        }
        per_owner[o].push((lane, e));
    }

    // expected local fanout per source
    let on_core = |t: &u32| placement.core_of(*t) as usize == core;
    for (o, l) in locs.iter().enumerate() {
        let (label, global_syns): (String, &[(u32, i16)]) = if o < n_axons {
            match &img.axon_labels()[o] {
                AxonLabel::Input(k) => {
                    (format!("axon:{k}"), net.axon_synapses(net.axon_index(k).ok_or("unknown input axon")?))
                }
                AxonLabel::Relay(k) => {
                    (format!("neuron:{k}"), net.neuron_synapses(net.neuron_index(k).ok_or("unknown relay source")?))
                }
            }
        } else {
            let info = &img.neurons()[o - n_axons];
            (format!("neuron:{}", info.key), net.neuron_synapses(info.global))
        };
        let local: Vec<(u32, i16)> = global_syns.iter().filter(|(t, _)| on_core(t)).copied().collect();
        let entries = &per_owner[o];

        if o >= n_axons {
            let n = o - n_axons;
            let want_output = net.is_output(img.neurons()[n].global);
            if entries.iter().filter(|(_, e)| e.output).count() != usize::from(want_output) {
                return Err(format!("neuron {n}: output flag count wrong"));
            }
        }

        if local.is_empty() && o >= n_axons {
            let mut lanes: Vec<usize> = entries.iter().map(|(lane, _)| *lane).collect();
            lanes.sort_unstable();
            if !l.placeholder
                || l.rows != 2
                || lanes != (0..SEGMENT).collect::<Vec<_>>()
                || entries.iter().any(|(_, e)| e.weight != 0)
            {
                return Err(format!("zero-fanout neuron {} lacks an exact 16-entry zero segment", o - n_axons));
            }
            continue;
        }
        if l.placeholder {
            return Err(format!("source {o} has fanout but a placeholder locator"));
        }
        if entries.len() != local.len() {
            return Err(format!("source {o}: {} entries for {} local synapses", entries.len(), local.len()));
        }
        for (_, e) in entries {
            let t = img.neurons().get(e.target as usize).ok_or("entry target out of range")?;
            decoded.push((label.clone(), t.global, e.weight));
        }
    }
    Ok(())
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
