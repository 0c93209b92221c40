//! Synapse-region allocation.
//!
//! Each source asks for a run of consecutive segments, described by the set
//! of slot columns it occupies in each of them. Two sources may share a
//! segment only if their columns there are disjoint.

use super::geometry::ROWS_PER_SEGMENT;

/// Occupied slot columns per segment of one source's region.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DemandProfile {
    pub masks: Vec<u16>,
}

impl DemandProfile {
    /// Profile for `counts[c]` entries in column `c`: column `c` is used in the
    /// first `counts[c]` segments.
    pub fn from_column_counts(counts: &[usize; 16]) -> Self {
        let segments = counts.iter().copied().max().unwrap_or(0);
        let masks = (0..segments)
            .map(|j| (0..16).filter(|&c| counts[c] > j).fold(0u16, |m, c| m | 1 << c))
            .collect();
        Self { masks }
    }

    pub fn segments(&self) -> usize {
        self.masks.len()
    }

    pub fn slots(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).sum()
    }
}

/// Row range given to one source, relative to the synapse region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowAllocation {
    pub base_row: u64,
    pub row_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionLayout {
    pub allocations: Vec<RowAllocation>,
    pub total_rows: u64,
}

/// First-fit decreasing: sources are placed longest first (ties in request
/// order) at the lowest segment where none of their columns collide.
pub fn pack_region(requests: &[DemandProfile]) -> RegionLayout {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(requests[i].segments()), i));

    let mut occupied: Vec<u16> = Vec::new();
    // every segment below this one is full
    let mut first_open = 0usize;
    let mut base = vec![0usize; requests.len()];

    for i in order {
        let masks = &requests[i].masks;
        if masks.is_empty() {
            continue;
        }
        let mut b = first_open;
        loop {
            let fits = masks
                .iter()
                .enumerate()
                .all(|(j, m)| occupied.get(b + j).is_none_or(|occ| occ & m == 0));
            if fits {
                break;
            }
            b += 1;
        }
        if occupied.len() < b + masks.len() {
            occupied.resize(b + masks.len(), 0);
        }
        for (j, m) in masks.iter().enumerate() {
            occupied[b + j] |= m;
        }
        base[i] = b;
        while first_open < occupied.len() && occupied[first_open] == u16::MAX {
            first_open += 1;
        }
    }

    finish(requests, &base, occupied.len())
}

/// One source per run of fresh segments, in request order. Never shares.
pub fn naive_region(requests: &[DemandProfile]) -> RegionLayout {
    let mut next = 0usize;
    let base: Vec<usize> = requests
        .iter()
        .map(|r| {
            let b = next;
            next += r.segments();
            b
        })
        .collect();
    finish(requests, &base, next)
}

fn finish(requests: &[DemandProfile], base: &[usize], segments: usize) -> RegionLayout {
    let rps = ROWS_PER_SEGMENT as u64;
    let allocations = requests
        .iter()
        .zip(base)
        .map(|(r, &b)| {
            if r.masks.is_empty() {
                RowAllocation { base_row: 0, row_count: 0 }
            } else {
                RowAllocation { base_row: b as u64 * rps, row_count: r.segments() as u64 * rps }
            }
        })
        .collect();
    RegionLayout { allocations, total_rows: segments as u64 * rps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(c: usize, segments: usize) -> DemandProfile {
        let mut counts = [0; 16];
        counts[c] = segments;
        DemandProfile::from_column_counts(&counts)
    }

    #[test]
    fn profile_from_counts() {
        let mut counts = [0; 16];
        counts[5] = 3;
        counts[1] = 1;
        let p = DemandProfile::from_column_counts(&counts);
        assert_eq!(p.masks, [0b10_0010, 0b10_0000, 0b10_0000]);
        assert_eq!(p.slots(), 4);
    }

    #[test]
    fn shorter_source_slides_under_longer_one() {
        let layout = pack_region(&[column(3, 3), column(7, 2)]);
        assert_eq!(layout.allocations[0], RowAllocation { base_row: 0, row_count: 6 });
        assert_eq!(layout.allocations[1], RowAllocation { base_row: 0, row_count: 4 });
        assert_eq!(layout.total_rows, 6);
        assert_eq!(naive_region(&[column(3, 3), column(7, 2)]).total_rows, 10);
    }

    #[test]
    fn same_column_never_shares() {
        let layout = pack_region(&[column(0, 1), column(0, 1)]);
        assert_eq!(layout.allocations[0].base_row, 0);
        assert_eq!(layout.allocations[1].base_row, 2);
        assert_eq!(layout.total_rows, 4);
    }

    #[test]
    fn sixteen_lanes_share_one_segment() {
        let reqs: Vec<_> = (0..16).map(|c| column(c, 1)).collect();
        let layout = pack_region(&reqs);
        assert_eq!(layout.total_rows, 2);
        assert!(layout.allocations.iter().all(|a| a.base_row == 0 && a.row_count == 2));
    }

    #[test]
    fn empty_requests_take_no_rows() {
        let layout = pack_region(&[DemandProfile::default(), column(2, 1)]);
        assert_eq!(layout.allocations[0], RowAllocation { base_row: 0, row_count: 0 });
        assert_eq!(layout.total_rows, 2);
    }

    fn profile() -> impl Strategy<Value = DemandProfile> {
        proptest::collection::vec(0usize..4, 16).prop_map(|v| {
            let mut counts = [0; 16];
            counts.copy_from_slice(&v);
            DemandProfile::from_column_counts(&counts)
        })
    }

    proptest! {
        #[test]
        fn packing_is_collision_free_and_never_worse(reqs in proptest::collection::vec(profile(), 0..40)) {
            let layout = pack_region(&reqs);
            let naive = naive_region(&reqs);
            prop_assert!(layout.total_rows <= naive.total_rows);
            let mut occ = vec![0u16; (layout.total_rows / 2) as usize];
            for (r, a) in reqs.iter().zip(&layout.allocations) {
                prop_assert_eq!(a.row_count, r.segments() as u64 * 2);
                for (j, m) in r.masks.iter().enumerate() {
                    let s = (a.base_row / 2) as usize + j;
                    prop_assert_eq!(occ[s] & m, 0);
                    occ[s] |= m;
                }
            }
        }
    }
}
