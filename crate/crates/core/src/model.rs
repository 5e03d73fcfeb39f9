//! Instances, packings and the validity checker.
//!
//! An [`Instance`] keeps sizes as `u64` multiples of `1/unit`. Integer
//! instances have `unit == 1`; rational ones are scaled by the least common
//! denominator when built with [`Instance::from_rationals`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{invalid, Result};

/// Exact fraction used for LP values, fractions of time and bounds.
pub type Rational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

pub fn rational_ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // numerator and denominator can both overflow f64 when huge, so scale
    let (n, d) = (r.numer(), r.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = d.bits().max(n.bits()).saturating_sub(900);
            let n2: BigInt = n >> shift;
            let d2: BigInt = d >> shift;
            n2.to_f64().unwrap_or(0.0) / d2.to_f64().unwrap_or(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    sizes: Vec<u64>,
    capacity: u64,
    unit: u64,
}

impl Instance {
    pub fn new(sizes: Vec<u64>, capacity: u64) -> Result<Self> {
        Self::with_unit(sizes, capacity, 1)
    }

    /// Real sizes are `sizes[i] / unit`, real capacity is `capacity / unit`.
    pub fn with_unit(sizes: Vec<u64>, capacity: u64, unit: u64) -> Result<Self> {
        if unit == 0 {
            return invalid("unit must be positive");
        }
        if capacity == 0 {
            return invalid("capacity must be positive");
        }
        if sizes.is_empty() {
            return invalid("instance has no items");
        }
        for (i, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return invalid(format!("item {i} has size 0"));
            }
            if s > capacity {
                return invalid(format!("item {i} does not fit into a bin"));
            }
        }
        Ok(Self { sizes, capacity, unit })
    }

    /// Scales every value by the least common denominator.
    pub fn from_rationals(sizes: &[Rational], capacity: &Rational) -> Result<Self> {
        let mut den = capacity.denom().clone();
        for s in sizes {
            if !s.is_positive() {
                return invalid("sizes must be positive");
            }
            den = den.lcm(s.denom());
        }
        if !capacity.is_positive() {
            return invalid("capacity must be positive");
        }
        let scale = |r: &Rational| -> Result<u64> {
            let v = r * Rational::from_integer(den.clone());
            v.to_integer()
                .to_u64()
                .ok_or_else(|| crate::Error::InvalidArgument("value too large".into()))
        };
        let unit = den
            .to_u64()
            .ok_or_else(|| crate::Error::InvalidArgument("denominator too large".into()))?;
        let sizes = sizes.iter().map(scale).collect::<Result<Vec<_>>>()?;
        Self::with_unit(sizes, scale(capacity)?, unit)
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, item: usize) -> u64 {
        self.sizes[item]
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn real_size(&self, item: usize) -> Rational {
        ratio(self.sizes[item], self.unit)
    }

    pub fn real_capacity(&self) -> Rational {
        ratio(self.capacity, self.unit)
    }

    /// V(D) in units.
    pub fn volume_units(&self) -> u128 {
        volume_of(&self.sizes)
    }

    pub fn volume(&self) -> Rational {
        ratio(self.volume_units(), self.unit)
    }

    /// ceil(k V / S), the volume bound for D_k.
    pub fn volume_bound(&self, k: u32) -> u128 {
        ceil_div(k as u128 * self.volume_units(), self.capacity as u128)
    }

    /// max(ceil(k V / S), k).
    pub fn lower_bound(&self, k: u32) -> u128 {
        self.volume_bound(k).max(k as u128)
    }

    /// Item ids sorted by non-increasing size, ties by ascending id.
    pub fn decreasing_order(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.len()).collect();
        ids.sort_by(|&a, &b| self.sizes[b].cmp(&self.sizes[a]).then(a.cmp(&b)));
        ids
    }
}

pub fn volume_of(sizes: &[u64]) -> u128 {
    sizes.iter().map(|&s| s as u128).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemCopy {
    pub item: usize,
    /// 1-based index of the copy of D this entry comes from.
    pub copy: u32,
}

impl ItemCopy {
    pub fn new(item: usize, copy: u32) -> Self {
        Self { item, copy }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bin {
    pub contents: Vec<ItemCopy>,
    pub load: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPacking {
    pub k: u32,
    pub bins: Vec<Bin>,
}

impl KPacking {
    /// Builds bins from raw contents, computing loads from `instance`.
    /// Empty bins are dropped.
    pub fn from_contents(instance: &Instance, k: u32, contents: Vec<Vec<ItemCopy>>) -> Self {
        Self::from_sizes(instance.sizes(), k, contents)
    }

    pub fn from_sizes(sizes: &[u64], k: u32, contents: Vec<Vec<ItemCopy>>) -> Self {
        let bins = contents
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|contents| {
                let load = contents.iter().map(|c| sizes[c.item]).sum();
                Bin { contents, load }
            })
            .collect();
        Self { k, bins }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownItem { bin: usize, item: usize },
    BadCopyIndex { bin: usize, item: usize, copy: u32 },
    LoadMismatch { bin: usize, stored: u64, actual: u128 },
    Overfull { bin: usize, load: u128 },
    DuplicateItem { bin: usize, item: usize },
    CopyCount { item: usize, count: usize },
    EmptyBin { bin: usize },
}

/// Lists every breach of the kBP rules; an empty list means the packing is valid.
pub fn validate(instance: &Instance, packing: &KPacking) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = instance.len();
    let mut counts = vec![0usize; n];
    for (b, bin) in packing.bins.iter().enumerate() {
        if bin.contents.is_empty() {
            out.push(Violation::EmptyBin { bin: b });
        }
        let mut load: u128 = 0;
        let mut seen: Vec<usize> = Vec::with_capacity(bin.contents.len());
        for c in &bin.contents {
            if c.item >= n {
                out.push(Violation::UnknownItem { bin: b, item: c.item });
                continue;
            }
            if c.copy == 0 || c.copy > packing.k {
                out.push(Violation::BadCopyIndex { bin: b, item: c.item, copy: c.copy });
            }
            counts[c.item] += 1;
            load += instance.size(c.item) as u128;
            seen.push(c.item);
        }
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateItem { bin: b, item: w[0] });
            }
        }
        if load != bin.load as u128 {
            out.push(Violation::LoadMismatch { bin: b, stored: bin.load, actual: load });
        }
        if load > instance.capacity() as u128 {
            out.push(Violation::Overfull { bin: b, load });
        }
    }
    for (item, &count) in counts.iter().enumerate() {
        if count != packing.k as usize {
            out.push(Violation::CopyCount { item, count });
        }
    }
    out
}

/// D_k: `k` concatenated copies of the item list.
pub fn replicate(instance: &Instance, k: u32) -> Result<Vec<ItemCopy>> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    Ok((1..=k)
        .flat_map(|copy| (0..instance.len()).map(move |item| ItemCopy { item, copy }))
        .collect())
}

/// Distinct sizes in decreasing order with their multiplicities and members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeClasses {
    pub sizes: Vec<u64>,
    pub counts: Vec<u32>,
    /// Item ids of each class, ascending.
    pub members: Vec<Vec<usize>>,
}

impl SizeClasses {
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    /// Groups arbitrary `(id, size)` pairs.
    pub fn from_pairs(pairs: &[(usize, u64)]) -> Self {
        let mut sorted: Vec<(usize, u64)> = pairs.to_vec();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut out = SizeClasses { sizes: Vec::new(), counts: Vec::new(), members: Vec::new() };
        for (id, s) in sorted {
            if out.sizes.last() != Some(&s) {
                out.sizes.push(s);
                out.counts.push(0);
                out.members.push(Vec::new());
            }
            *out.counts.last_mut().unwrap() += 1;
            out.members.last_mut().unwrap().push(id);
        }
        out
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }
}

pub fn size_classes(instance: &Instance) -> SizeClasses {
    let pairs: Vec<(usize, u64)> = instance.sizes().iter().copied().enumerate().collect();
    SizeClasses::from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Instance {
        Instance::new(vec![2, 1, 1], 3).unwrap()
    }

    fn bins(spec: &[&[(usize, u32)]]) -> Vec<Vec<ItemCopy>> {
        spec.iter().map(|b| b.iter().map(|&(i, c)| ItemCopy::new(i, c)).collect()).collect()
    }

    #[test]
    fn valid_two_times_packing() {
        let inst = sample();
        let p = KPacking::from_contents(
            &inst,
            2,
            bins(&[&[(0, 1), (1, 1)], &[(1, 2), (2, 1)], &[(2, 2), (0, 2)]]),
        );
        assert!(validate(&inst, &p).is_empty());
    }

    #[test]
    fn two_copies_in_one_bin_is_one_violation() {
        let inst = sample();
        let p = KPacking::from_contents(
            &inst,
            2,
            bins(&[&[(0, 1), (1, 1)], &[(1, 2), (2, 1), (2, 2)], &[(0, 2)]]),
        );
        assert_eq!(validate(&inst, &p), vec![Violation::DuplicateItem { bin: 1, item: 2 }]);
    }

    #[test]
    fn single_item_single_bin() {
        let inst = Instance::new(vec![4], 5).unwrap();
        let p = KPacking::from_contents(&inst, 1, bins(&[&[(0, 1)]]));
        assert!(validate(&inst, &p).is_empty());
    }

    #[test]
    fn overfull_and_missing_copies_reported() {
        let inst = sample();
        let p = KPacking::from_contents(&inst, 1, bins(&[&[(0, 1), (1, 1), (2, 1)]]));
        assert_eq!(validate(&inst, &p), vec![Violation::Overfull { bin: 0, load: 4 }]);
        let p = KPacking::from_contents(&inst, 2, bins(&[&[(0, 1), (1, 1)], &[(2, 1)]]));
        assert_eq!(validate(&inst, &p).len(), 3);
    }

    #[test]
    fn replicate_concatenates_copies() {
        let inst = Instance::new(vec![10, 20, 11], 31).unwrap();
        let d2 = replicate(&inst, 2).unwrap();
        let want: Vec<ItemCopy> = [(0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
            .iter()
            .map(|&(i, c)| ItemCopy::new(i, c))
            .collect();
        assert_eq!(d2, want);
        assert_eq!(replicate(&inst, 1).unwrap().len(), 3);
        let one = Instance::new(vec![5], 5).unwrap();
        let d3 = replicate(&one, 3).unwrap();
        assert_eq!(d3.iter().map(|c| c.copy).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(replicate(&inst, 0).is_err());
    }

    #[test]
    fn volumes() {
        assert_eq!(sample().volume_units(), 4);
        let d = Instance::new(vec![371, 659, 113, 47, 485, 3, 228, 419, 468, 581, 626], 1000)
            .unwrap();
        assert_eq!(d.volume_units(), 4000);
        assert_eq!(volume_of(&[]), 0);
    }

    #[test]
    fn classes() {
        let mut sizes = vec![3; 7];
        sizes.extend([4; 6]);
        let c = size_classes(&Instance::new(sizes, 12).unwrap());
        assert_eq!((c.m(), c.sizes.clone(), c.counts.clone()), (2, vec![4, 3], vec![6, 7]));
        let c = size_classes(&Instance::new(vec![5, 5, 5], 5).unwrap());
        assert_eq!(c.counts, vec![3]);
        let c = size_classes(&Instance::new(vec![1, 2, 3], 5).unwrap());
        assert_eq!((c.sizes, c.counts), (vec![3, 2, 1], vec![1, 1, 1]));
    }

    #[test]
    fn rationals_are_scaled_by_common_denominator() {
        let inst =
            Instance::from_rationals(&[ratio(1, 2), ratio(1, 3), int(1)], &int(1)).unwrap();
        assert_eq!(inst.unit(), 6);
        assert_eq!(inst.sizes(), &[3, 2, 6]);
        assert_eq!(inst.real_size(1), ratio(1, 3));
        assert!(Instance::from_rationals(&[int(2)], &int(1)).is_err());
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(Instance::new(vec![], 3).is_err());
        assert!(Instance::new(vec![0], 3).is_err());
        assert!(Instance::new(vec![4], 3).is_err());
    }

    #[test]
    fn huge_rational_converts() {
        let r = ratio((BigInt::from(3) << 2000) + 1, BigInt::from(2) << 2000);
        assert!((rational_to_f64(&r) - 1.5).abs() < 1e-12);
    }
}
