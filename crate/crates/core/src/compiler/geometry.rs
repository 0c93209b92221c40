//! Memory geometry and slot encodings.
//!
//! A slot is 64 bits. Eight slots form a row and two rows form a segment, so
//! every segment offers sixteen slot columns, one per lane of the core's
//! 16-way neuron parallelism.

use std::fmt;
use std::str::FromStr;

pub const SLOT_BITS: u16 = 64;
pub const SLOTS_PER_ROW: usize = 8;
pub const ROWS_PER_SEGMENT: usize = 2;
pub const SEGMENT_SLOTS: usize = SLOTS_PER_ROW * ROWS_PER_SEGMENT;

const _: () = assert!(SEGMENT_SLOTS == 16);

/// Rows in the default 8 GiB memory.
pub const DEFAULT_TOTAL_ROWS: u64 = (8u64 << 30) / (SLOTS_PER_ROW as u64 * 8);

/// Capacity of one modeled memory, in rows.
///
/// Region bounds are fixed per image at build time; this only caps the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoryGeometry {
    pub total_rows: u64,
}

impl Default for MemoryGeometry {
    fn default() -> Self {
        Self { total_rows: DEFAULT_TOTAL_ROWS }
    }
}

impl MemoryGeometry {
    pub fn with_rows(total_rows: u64) -> Self {
        Self { total_rows }
    }

    pub fn total_slots(&self) -> u64 {
        self.total_rows * SLOTS_PER_ROW as u64
    }

    pub fn total_bytes(&self) -> u64 {
        self.total_slots() * (SLOT_BITS as u64 / 8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad geometry '{0}': expected a row count or a byte size such as 64MiB")]
pub struct GeometryParseError(pub String);

/// Accepts `rows=<n>`, a bare row count, or a byte size with a `KiB`/`MiB`/`GiB` suffix.
impl FromStr for MemoryGeometry {
    type Err = GeometryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GeometryParseError(s.to_owned());
        let t = s.trim();
        let t = t.strip_prefix("rows=").unwrap_or(t);
        let (digits, unit) = match t.find(|c: char| !c.is_ascii_digit()) {
            Some(pos) => t.split_at(pos),
            None => (t, ""),
        };
        let n: u64 = digits.parse().map_err(|_| err())?;
        let bytes_per_row = SLOTS_PER_ROW as u64 * 8;
        let rows = match unit {
            "" => n,
            "KiB" => (n << 10) / bytes_per_row,
            "MiB" => (n << 20) / bytes_per_row,
            "GiB" => (n << 30) / bytes_per_row,
            _ => return Err(err()),
        };
        if rows == 0 {
            return Err(err());
        }
        Ok(Self { total_rows: rows })
    }
}

impl fmt::Display for MemoryGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rows={}", self.total_rows)
    }
}

/// Largest local neuron index a synapse entry can name.
pub const MAX_TARGET: u32 = (1 << 24) - 1;
/// Number of distinct owner tags, which bounds the sources per core.
pub const MAX_SOURCES: usize = 1 << 22;

/// One synapse slot.
///
/// Bit layout, least significant first: weight (16), target (24),
/// owner (22), output flag (1), valid (1). The owner field holds the ordinal
/// of the source whose locator points at this entry (axons first, then
/// neurons), which lets packed sources share rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SynapseEntry {
    pub valid: bool,
    pub output: bool,
    pub owner: u32,
    pub target: u32,
    pub weight: i16,
}

const OWNER_SHIFT: u32 = 40;
const OUTPUT_BIT: u64 = 1 << 62;
const VALID_BIT: u64 = 1 << 63;

impl SynapseEntry {
    pub fn new(owner: u32, target: u32, weight: i16) -> Self {
        debug_assert!(target <= MAX_TARGET && (owner as usize) < MAX_SOURCES);
        Self { valid: true, output: false, owner, target, weight }
    }

    pub fn encode(&self) -> u64 {
        if !self.valid {
            return 0;
        }
        let mut word = (self.weight as u16 as u64)
            | ((self.target as u64 & 0xFF_FFFF) << 16)
            | ((self.owner as u64 & 0x3F_FFFF) << OWNER_SHIFT)
            | VALID_BIT;
        if self.output {
            word |= OUTPUT_BIT;
        }
        word
    }

    pub fn decode(word: u64) -> Self {
        if word & VALID_BIT == 0 {
            return Self::default();
        }
        Self {
            valid: true,
            output: word & OUTPUT_BIT != 0,
            owner: ((word >> OWNER_SHIFT) & 0x3F_FFFF) as u32,
            target: ((word >> 16) & 0xFF_FFFF) as u32,
            weight: word as u16 as i16,
        }
    }
}

/// Locator flag: the slot holds a locator.
pub const LOC_VALID: u8 = 1 << 0;
/// Locator flag: the region is the zero-weight placeholder of a neuron without synapses.
pub const LOC_PLACEHOLDER: u8 = 1 << 1;

/// Points at a contiguous run of synapse-region rows.
///
/// Bit layout, least significant first: base_row (32), row_count (16),
/// model_id (8), flags (8). `base_row` is relative to the synapse region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LocatorEntry {
    pub base_row: u32,
    pub row_count: u16,
    pub model_id: u8,
    pub flags: u8,
}

impl LocatorEntry {
    pub fn is_valid(&self) -> bool {
        self.flags & LOC_VALID != 0
    }

    pub fn is_placeholder(&self) -> bool {
        self.flags & LOC_PLACEHOLDER != 0
    }

    pub fn segments(&self) -> u32 {
        self.row_count as u32 / ROWS_PER_SEGMENT as u32
    }

    pub fn encode(&self) -> u64 {
        self.base_row as u64
            | (self.row_count as u64) << 32
            | (self.model_id as u64) << 48
            | (self.flags as u64) << 56
    }

    pub fn decode(word: u64) -> Self {
        Self {
            base_row: word as u32,
            row_count: (word >> 32) as u16,
            model_id: (word >> 48) as u8,
            flags: (word >> 56) as u8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_geometry_is_8_gib() {
        let g = MemoryGeometry::default();
        assert_eq!(g.total_bytes(), 8 << 30);
        assert_eq!(g.total_slots(), 1 << 30);
    }

    #[test]
    fn parse_geometry() {
        assert_eq!("4096".parse::<MemoryGeometry>().unwrap().total_rows, 4096);
        assert_eq!("rows=12".parse::<MemoryGeometry>().unwrap().total_rows, 12);
        assert_eq!("1MiB".parse::<MemoryGeometry>().unwrap().total_rows, 16384);
        assert_eq!("8GiB".parse::<MemoryGeometry>().unwrap(), MemoryGeometry::default());
        assert!("12TB".parse::<MemoryGeometry>().is_err());
        assert!("0".parse::<MemoryGeometry>().is_err());
        assert!("".parse::<MemoryGeometry>().is_err());
    }

    #[test]
    fn invalid_entry_is_all_zero() {
        assert_eq!(SynapseEntry::default().encode(), 0);
        let junk = SynapseEntry { valid: false, output: true, owner: 3, target: 9, weight: -4 };
        assert_eq!(junk.encode(), 0);
        assert_eq!(SynapseEntry::decode(0x3FFF_FFFF_FFFF_FFFF), SynapseEntry::default());
    }

    #[test]
    fn known_encoding() {
        let mut e = SynapseEntry::new(1, 5, -2);
        e.output = true;
        assert_eq!(e.encode(), 0xC000_0100_0005_FFFE);
        let loc = LocatorEntry { base_row: 2, row_count: 6, model_id: 1, flags: LOC_VALID };
        assert_eq!(loc.encode(), 0x0101_0006_0000_0002);
        assert_eq!(loc.segments(), 3);
    }

    proptest! {
        #[test]
        fn synapse_round_trip(owner in 0u32..(1 << 22), target in 0u32..=MAX_TARGET, weight: i16, output: bool) {
            let e = SynapseEntry { valid: true, output, owner, target, weight };
            let word = e.encode();
            prop_assert_eq!(SynapseEntry::decode(word), e);
            // reserved space is gone: only the layout bits can be set
            prop_assert_eq!(word >> 62 & 1, output as u64);
        }

        #[test]
        fn locator_round_trip(base_row: u32, row_count: u16, model_id: u8, flags: u8) {
            let l = LocatorEntry { base_row, row_count, model_id, flags };
            prop_assert_eq!(LocatorEntry::decode(l.encode()), l);
        }
    }
}
