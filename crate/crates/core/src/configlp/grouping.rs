//! Linear and geometric grouping.
//!
//! Both work on `(id, size)` entries sorted by non-increasing size. An id may
//! occur more than once, which the iterative scheme uses for copies.

use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::error::{invalid, Result};
use crate::model::{Instance, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Entries of the group in non-increasing size order.
    pub entries: Vec<(usize, u64)>,
    /// The group maximum every rounded entry is raised to.
    pub rounded: u64,
    /// How many of the smallest entries are set aside instead of rounded.
    pub set_aside: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupingResult {
    pub groups: Vec<Group>,
    /// U': set-aside entries with their original sizes.
    pub u_prime: Vec<(usize, u64)>,
    /// U'': remaining entries with rounded sizes.
    pub u_doubleprime: Vec<(usize, u64)>,
}

impl GroupingResult {
    /// Entries of U' and U'' with original sizes, sorted like the input.
    pub fn ungroup(&self) -> Vec<(usize, u64)> {
        let mut out: Vec<(usize, u64)> = self.groups.iter().flat_map(|g| g.entries.iter().copied()).collect();
        sort_entries(&mut out);
        out
    }
}

pub(crate) fn sort_entries(entries: &mut [(usize, u64)]) {
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
}

fn instance_entries(j: &Instance) -> Vec<(usize, u64)> {
    let mut e: Vec<(usize, u64)> = j.sizes().iter().copied().enumerate().collect();
    sort_entries(&mut e);
    e
}

/// Groups of `g` consecutive entries; the first group is set aside.
pub(crate) fn linear_groups(entries: &[(usize, u64)], g: usize) -> GroupingResult {
    let mut out = GroupingResult::default();
    for (gi, chunk) in entries.chunks(g).enumerate() {
        let rounded = chunk[0].1;
        if gi == 0 {
            out.u_prime.extend_from_slice(chunk);
        } else {
            out.u_doubleprime.extend(chunk.iter().map(|&(id, _)| (id, rounded)));
        }
        out.groups.push(Group { entries: chunk.to_vec(), rounded, set_aside: if gi == 0 { chunk.len() } else { 0 } });
    }
    out
}

pub fn linear_grouping(j: &Instance, g: usize) -> Result<GroupingResult> {
    if g < 1 {
        return invalid("group size must be at least 1");
    }
    Ok(linear_groups(&instance_entries(j), g))
}

/// Groups closed once their volume reaches `threshold`; within group `i+1`
/// the smallest `max(0, l_{i+1} - l_i)` entries are set aside, where `l` is
/// the group cardinality.
pub(crate) fn geometric_groups(entries: &[(usize, u64)], threshold: u128) -> GroupingResult {
    let mut chunks: Vec<&[(usize, u64)]> = Vec::new();
    let mut start = 0;
    let mut vol: u128 = 0;
    for (i, &(_, s)) in entries.iter().enumerate() {
        vol += s as u128;
        if vol >= threshold {
            chunks.push(&entries[start..=i]);
            start = i + 1;
            vol = 0;
        }
    }
    if start < entries.len() {
        chunks.push(&entries[start..]);
    }
    let mut out = GroupingResult::default();
    for (gi, chunk) in chunks.iter().enumerate() {
        let rounded = chunk[0].1;
        let set_aside = if gi == 0 { chunk.len() } else { chunk.len().saturating_sub(chunks[gi - 1].len()) };
        let keep = chunk.len() - set_aside;
        out.u_doubleprime.extend(chunk[..keep].iter().map(|&(id, _)| (id, rounded)));
        out.u_prime.extend_from_slice(&chunk[keep..]);
        out.groups.push(Group { entries: chunk.to_vec(), rounded, set_aside });
    }
    out
}

pub fn geometric_grouping(j: &Instance, g: u32, eps: &Rational) -> Result<GroupingResult> {
    if g <= 1 {
        return invalid("g must exceed 1");
    }
    let limit = eps * Rational::from_integer(BigInt::from(j.capacity()));
    if j.sizes().iter().any(|&s| Rational::from_integer(BigInt::from(s)) <= limit) {
        return invalid("every item must be larger than eps times the capacity");
    }
    Ok(geometric_groups(&instance_entries(j), g as u128 * j.capacity() as u128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ratio;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn linear_example() {
        let j = Instance::new(vec![9, 8, 7, 6, 5], 10).unwrap();
        let r = linear_grouping(&j, 2).unwrap();
        assert_eq!(r.u_prime, vec![(0, 9), (1, 8)]);
        assert_eq!(r.u_doubleprime, vec![(2, 7), (3, 7), (4, 5)]);
    }

    #[test]
    fn linear_large_group_sets_everything_aside() {
        let j = Instance::new(vec![3, 1, 2], 10).unwrap();
        let r = linear_grouping(&j, 5).unwrap();
        assert_eq!(r.u_prime.len(), 3);
        assert!(r.u_doubleprime.is_empty());
        let eq = Instance::new(vec![4, 4, 4, 4], 10).unwrap();
        let r = linear_grouping(&eq, 2).unwrap();
        assert_eq!(r.u_doubleprime, vec![(2, 4), (3, 4)]);
        assert!(linear_grouping(&eq, 0).is_err());
    }

    #[test]
    fn geometric_equal_sizes() {
        // ten items of 0.4 with unit capacity
        let j = Instance::new(vec![2; 10], 5).unwrap();
        let r = geometric_grouping(&j, 2, &ratio(1, 5)).unwrap();
        assert_eq!(r.groups.len(), 2);
        assert_eq!(r.groups[0].entries.len(), 5);
        assert_eq!(r.u_prime.len(), 5);
        assert_eq!(r.u_doubleprime.len(), 5);
        assert!(r.u_doubleprime.iter().all(|&(_, s)| s == 2));
    }

    #[test]
    fn geometric_single_group() {
        let j = Instance::new(vec![3, 3], 5).unwrap();
        let r = geometric_grouping(&j, 2, &ratio(1, 5)).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert!(r.u_doubleprime.is_empty());
        assert!(geometric_grouping(&j, 1, &ratio(1, 5)).is_err());
        assert!(geometric_grouping(&j, 2, &ratio(3, 5)).is_err());
    }

    proptest! {
        #[test]
        fn linear_rounding_covers_originals(sizes in prop::collection::vec(1u64..=50, 1..40), g in 1usize..8) {
            let j = Instance::new(sizes.clone(), 50).unwrap();
            let r = linear_grouping(&j, g).unwrap();
            let mut back: Vec<u64> = r.ungroup().into_iter().map(|(_, s)| s).collect();
            let mut orig = sizes.clone();
            back.sort_unstable();
            orig.sort_unstable();
            prop_assert_eq!(back, orig);
            for &(id, s) in &r.u_doubleprime {
                prop_assert!(s >= sizes[id]);
            }
        }

        #[test]
        fn geometric_set_aside_volume(sizes in prop::collection::vec(7u64..=60, 1..80), g in 2u32..4) {
            // capacity 60, eps = 1/10
            let j = Instance::new(sizes.clone(), 60).unwrap();
            let eps = ratio(1, 10);
            let r = geometric_grouping(&j, g, &eps).unwrap();
            let mut back: Vec<u64> = r.ungroup().into_iter().map(|(_, s)| s).collect();
            let mut orig = sizes.clone();
            back.sort_unstable();
            orig.sort_unstable();
            prop_assert_eq!(back, orig);
            for &(id, s) in &r.u_doubleprime {
                prop_assert!(s >= sizes[id]);
            }
            // V(U') <= S g (1 + ln(1/(eps S))) + S with S normalized to 1
            let v: u64 = r.u_prime.iter().map(|&(_, s)| s).sum();
            let bound = 60.0 * g as f64 * (1.0 + libm::log(10.0)) + 60.0;
            prop_assert!((v as f64) <= bound);
        }
    }
}
