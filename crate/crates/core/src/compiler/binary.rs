//! Bit-exact serialization of a [`MemoryImage`].
//!
//! Layout, all fields little-endian:
//!
//! ```text
//! offset size  field
//!      0    8  magic "HAERIMG1"
//!      8    2  slot width in bits (64)
//!     10    1  slots per row (8)
//!     11    1  rows per segment (2)
//!     12    4  model count
//!     16    8  total rows of the modeled memory
//!     24    4  axon-locator region rows
//!     28    4  neuron-locator region rows
//!     32    4  allocated synapse-region rows
//!     36    4  axon count
//!     40    4  neuron count
//!     44    4  reserved (0)
//!     48    8  index-table bytes
//!     56    8  stored slot count
//!     64       index tables, then the slot array
//! ```
//!
//! Index tables: one 8-byte record per model (kind, shift, leak, 0,
//! threshold as i32); per axon a kind byte (0 input, 1 relay), three zero
//! bytes, key length (u32) and key bytes; per neuron its global index (u32),
//! key length (u32) and key bytes. Every record is zero-padded to a multiple
//! of 8 bytes. The slot array stores every row from 0 to the end of the
//! allocated synapse region, eight u64 slots per row.

use thiserror::Error;

use super::geometry::{LocatorEntry, MemoryGeometry, SynapseEntry, ROWS_PER_SEGMENT, SLOTS_PER_ROW, SLOT_BITS};
use super::image::{KeyIndex, MemoryImage, NeuronInfo};
use super::local::AxonLabel;
use crate::network::{NeuronKind, NeuronModelSpec};

pub const IMAGE_MAGIC: &[u8; 8] = b"HAERIMG1";
pub const HEADER_BYTES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageFormatError {
    #[error("not a memory image (bad magic)")]
    BadMagic,
    #[error("image truncated at byte {0}")]
    Truncated(usize),
    #[error("malformed image: {0}")]
    Malformed(String),
}

fn pad8(out: &mut Vec<u8>) {
    while !out.len().is_multiple_of(8) {
        out.push(0);
    }
}

fn put_key(out: &mut Vec<u8>, key: &str) {
    out.extend_from_slice(&(key.len() as u32).to_le_bytes());
    out.extend_from_slice(key.as_bytes());
    pad8(out);
}

pub fn emit_image(img: &MemoryImage) -> Vec<u8> {
    let mut tables = Vec::new();
    for m in &img.models {
        tables.push(m.kind.code());
        tables.push(m.shift as u8);
        tables.push(m.leak);
        tables.push(0);
        tables.extend_from_slice(&m.threshold.to_le_bytes());
    }
    for label in &img.axons {
        let kind = match label {
            AxonLabel::Input(_) => 0u8,
            AxonLabel::Relay(_) => 1u8,
        };
        tables.extend_from_slice(&[kind, 0, 0, 0]);
        put_key(&mut tables, label.key());
    }
    for n in &img.neurons {
        tables.extend_from_slice(&n.global.to_le_bytes());
        put_key(&mut tables, &n.key);
    }

    let mut out = Vec::with_capacity(HEADER_BYTES + tables.len() + img.slots.len() * 8);
    out.extend_from_slice(IMAGE_MAGIC);
    out.extend_from_slice(&SLOT_BITS.to_le_bytes());
    out.push(SLOTS_PER_ROW as u8);
    out.push(ROWS_PER_SEGMENT as u8);
    out.extend_from_slice(&(img.models.len() as u32).to_le_bytes());
    out.extend_from_slice(&img.geometry.total_rows.to_le_bytes());
    out.extend_from_slice(&img.axon_rows.to_le_bytes());
    out.extend_from_slice(&img.neuron_rows.to_le_bytes());
    out.extend_from_slice(&img.synapse_rows.to_le_bytes());
    out.extend_from_slice(&(img.axons.len() as u32).to_le_bytes());
    out.extend_from_slice(&(img.neurons.len() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(tables.len() as u64).to_le_bytes());
    out.extend_from_slice(&(img.slots.len() as u64).to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_BYTES);
    out.extend_from_slice(&tables);
    for slot in &img.slots {
        out.extend_from_slice(&slot.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ImageFormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(ImageFormatError::Truncated(self.buf.len()))?;
        let bytes = &self.buf[self.pos..end];
        self.pos = end;
        Ok(bytes)
    }

    fn u8(&mut self) -> Result<u8, ImageFormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ImageFormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, ImageFormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ImageFormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn zero_pad(&mut self) -> Result<(), ImageFormatError> {
        while !self.pos.is_multiple_of(8) {
            if self.u8()? != 0 {
                return Err(ImageFormatError::Malformed(format!("nonzero padding at byte {}", self.pos - 1)));
            }
        }
        Ok(())
    }

    fn key(&mut self) -> Result<String, ImageFormatError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        let key = std::str::from_utf8(bytes)
            .map_err(|_| ImageFormatError::Malformed(format!("key at byte {} is not UTF-8", self.pos - len)))?
            .to_owned();
        self.zero_pad()?;
        Ok(key)
    }
}

fn malformed(msg: impl Into<String>) -> ImageFormatError {
    ImageFormatError::Malformed(msg.into())
}

/// Rejects locators and entries that would send the runtime out of bounds.
fn check_slots(
    slots: &[u64],
    axon_rows: u32,
    neuron_rows: u32,
    synapse_rows: u32,
    axon_count: usize,
    neuron_count: usize,
    model_count: usize,
) -> Result<(), ImageFormatError> {
    let neuron_base = axon_rows as usize * SLOTS_PER_ROW;
    let locators = (0..axon_count).map(|a| (a, false)).chain((0..neuron_count).map(|n| (neuron_base + n, true)));
    for (slot, is_neuron) in locators {
        let loc = LocatorEntry::decode(slots[slot]);
        if !loc.is_valid() {
            return Err(malformed(format!("slot {slot}: locator not valid")));
        }
        if loc.base_row as u64 + loc.row_count as u64 > synapse_rows as u64 {
            return Err(malformed(format!("slot {slot}: locator region past the synapse region")));
        }
        if is_neuron && loc.model_id as usize >= model_count {
            return Err(malformed(format!("slot {slot}: unknown model id {}", loc.model_id)));
        }
    }
    let syn_start = (axon_rows as usize + neuron_rows as usize) * SLOTS_PER_ROW;
    let sources = axon_count + neuron_count;
    for (i, &word) in slots[syn_start..].iter().enumerate() {
        let e = SynapseEntry::decode(word);
        if e.valid && (e.owner as usize >= sources || (e.weight != 0 && e.target as usize >= neuron_count)) {
            return Err(malformed(format!("synapse slot {i}: owner or target out of range")));
        }
    }
    Ok(())
}

pub fn load_image(bytes: &[u8]) -> Result<MemoryImage, ImageFormatError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8).map_err(|_| ImageFormatError::BadMagic)? != IMAGE_MAGIC {
        return Err(ImageFormatError::BadMagic);
    }
    if r.u16()? != SLOT_BITS || r.u8()? as usize != SLOTS_PER_ROW || r.u8()? as usize != ROWS_PER_SEGMENT {
        return Err(malformed("unsupported slot geometry"));
    }
    let model_count = r.u32()? as usize;
    let total_rows = r.u64()?;
    let axon_rows = r.u32()?;
    let neuron_rows = r.u32()?;
    let synapse_rows = r.u32()?;
    let axon_count = r.u32()? as usize;
    let neuron_count = r.u32()? as usize;
    if r.u32()? != 0 {
        return Err(malformed("reserved header field is nonzero"));
    }
    let table_bytes = r.u64()? as usize;
    let slot_count = r.u64()? as usize;

    let segment = |n: usize| (n.div_ceil(16) * ROWS_PER_SEGMENT) as u32;
    if axon_rows != segment(axon_count) || neuron_rows != segment(neuron_count) {
        return Err(malformed("locator regions do not match axon/neuron counts"));
    }
    let stored_rows = axon_rows as u64 + neuron_rows as u64 + synapse_rows as u64;
    if stored_rows > total_rows {
        return Err(malformed("regions exceed the modeled memory"));
    }
    if slot_count as u64 != stored_rows * SLOTS_PER_ROW as u64 {
        return Err(malformed("slot count does not match region rows"));
    }

    let table_start = r.pos;
    let mut models = Vec::with_capacity(model_count.min(256));
    for i in 0..model_count {
        let kind = NeuronKind::from_code(r.u8()?).ok_or_else(|| malformed(format!("model {i}: unknown kind")))?;
        let shift = r.u8()? as i8;
        let leak = r.u8()?;
        if r.u8()? != 0 {
            return Err(malformed(format!("model {i}: nonzero padding")));
        }
        let threshold = r.u32()? as i32;
        let model = NeuronModelSpec { kind, threshold, shift, leak };
        model.check().map_err(|(f, why)| malformed(format!("model {i}: {f} {why}")))?;
        models.push(model);
    }
    let mut axons = Vec::with_capacity(axon_count.min(bytes.len()));
    for i in 0..axon_count {
        let kind = r.u8()?;
        if r.take(3)? != [0, 0, 0] {
            return Err(malformed(format!("axon {i}: nonzero padding")));
        }
        let key = r.key()?;
        axons.push(match kind {
            0 => AxonLabel::Input(key),
            1 => AxonLabel::Relay(key),
            _ => return Err(malformed(format!("axon {i}: unknown kind {kind}"))),
        });
    }
    let mut neurons = Vec::with_capacity(neuron_count.min(bytes.len()));
    for _ in 0..neuron_count {
        let global = r.u32()?;
        let key = r.key()?;
        neurons.push(NeuronInfo { key, global });
    }
    if r.pos - table_start != table_bytes {
        return Err(malformed("index-table length mismatch"));
    }

    let raw = r.take(slot_count.checked_mul(8).ok_or(ImageFormatError::Truncated(bytes.len()))?)?;
    let slots: Vec<u64> = raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    if r.pos != bytes.len() {
        return Err(malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }

    check_slots(&slots, axon_rows, neuron_rows, synapse_rows, axon_count, neuron_count, models.len())?;

    let index = KeyIndex::build(&axons, &neurons);
    Ok(MemoryImage {
        geometry: MemoryGeometry { total_rows },
        axon_rows,
        neuron_rows,
        synapse_rows,
        models,
        axons,
        neurons,
        slots,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{build_memory_image, localize, partition, Allocator, CoreNetwork, IndexPolicy};
    use crate::network::demo_network;

    fn demo_image() -> MemoryImage {
        let net = demo_network().validate().unwrap();
        let p = partition(&net, 1, 16).unwrap();
        build_memory_image(&localize(&net, &p, 0, IndexPolicy::Balanced), MemoryGeometry::with_rows(256), Allocator::Packed)
            .unwrap()
    }

    #[test]
    fn demo_round_trip() {
        let img = demo_image();
        let bytes = emit_image(&img);
        assert_eq!(&bytes[..8], IMAGE_MAGIC);
        assert_eq!(bytes.len() % 8, 0);
        assert_eq!(load_image(&bytes).unwrap(), img);
        assert_eq!(emit_image(&load_image(&bytes).unwrap()), bytes);
    }

    #[test]
    fn empty_image_is_header_plus_nothing() {
        let core = CoreNetwork { models: vec![], axons: vec![], neurons: vec![] };
        let img = build_memory_image(&core, MemoryGeometry::default(), Allocator::Packed).unwrap();
        let bytes = emit_image(&img);
        assert_eq!(bytes.len(), HEADER_BYTES);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), MemoryGeometry::default().total_rows);
        assert_eq!(load_image(&bytes).unwrap(), img);
    }

    #[test]
    fn header_fields() {
        let img = demo_image();
        let b = emit_image(&img);
        assert_eq!(u16::from_le_bytes([b[8], b[9]]), 64);
        assert_eq!((b[10], b[11]), (8, 2));
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2); // models
        assert_eq!(u32::from_le_bytes(b[24..28].try_into().unwrap()), 2); // axon rows
        assert_eq!(u32::from_le_bytes(b[28..32].try_into().unwrap()), 2); // neuron rows
        assert_eq!(u32::from_le_bytes(b[36..40].try_into().unwrap()), 2); // axons
        assert_eq!(u32::from_le_bytes(b[40..44].try_into().unwrap()), 4); // neurons
    }

    #[test]
    fn rejects_corruption() {
        let bytes = emit_image(&demo_image());
        assert_eq!(load_image(b"NOTANIMG"), Err(ImageFormatError::BadMagic));
        assert_eq!(load_image(b"HAE"), Err(ImageFormatError::BadMagic));
        assert!(matches!(load_image(&bytes[..bytes.len() - 8]), Err(ImageFormatError::Truncated(_))));
        let mut extra = bytes.clone();
        extra.extend_from_slice(&[0; 8]);
        assert!(matches!(load_image(&extra), Err(ImageFormatError::Malformed(_))));
        let mut reserved = bytes.clone();
        reserved[44] = 1;
        assert!(matches!(load_image(&reserved), Err(ImageFormatError::Malformed(_))));
        let mut leak = bytes.clone();
        leak[HEADER_BYTES + 2] = 64;
        assert!(matches!(load_image(&leak), Err(ImageFormatError::Malformed(_))));
        // clobber the first axon locator
        let slot0 = bytes.len() - demo_image().raw_slots().len() * 8;
        let mut loc = bytes;
        loc[slot0..slot0 + 8].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(load_image(&loc), Err(ImageFormatError::Malformed(_))));
    }
}
