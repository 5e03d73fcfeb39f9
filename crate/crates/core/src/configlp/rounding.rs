//! Turning configuration counts into packings.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{ConfigProgram, Configuration, FractionalSolution};
use crate::error::{invalid, Error, Result};
use crate::firstfit::FirstFit;
use crate::model::{ratio, Instance, ItemCopy, KPacking, Rational, SizeClasses};

/// Per-class round robin: copy 1 of every member, then copy 2, and so on.
/// Taking at most `n_i` consecutive entries never repeats an item.
pub(crate) struct Queues {
    queues: Vec<Vec<ItemCopy>>,
    pos: Vec<usize>,
}

impl Queues {
    pub(crate) fn new(classes: &SizeClasses, k: u32) -> Self {
        let queues: Vec<Vec<ItemCopy>> = classes
            .members
            .iter()
            .map(|ids| (1..=k).flat_map(|copy| ids.iter().map(move |&item| ItemCopy { item, copy })).collect())
            .collect();
        let pos = alloc::vec![0; queues.len()];
        Self { queues, pos }
    }

    pub(crate) fn take(&mut self, config: &Configuration) -> Vec<ItemCopy> {
        let mut bin = Vec::new();
        for (i, &a) in config.counts.iter().enumerate() {
            let q = &self.queues[i];
            let end = (self.pos[i] + a as usize).min(q.len());
            bin.extend_from_slice(&q[self.pos[i]..end]);
            self.pos[i] = end;
        }
        bin
    }

    /// Entries not yet taken, ordered by copy then item.
    pub(crate) fn rest(&self) -> Vec<ItemCopy> {
        let mut out: Vec<ItemCopy> =
            self.queues.iter().zip(&self.pos).flat_map(|(q, &p)| q[p..].iter().copied()).collect();
        out.sort_by_key(|c| (c.copy, c.item));
        out
    }
}

fn check_columns(classes: &SizeClasses, capacity: u64, columns: &[(Configuration, u64)]) -> Result<()> {
    for (j, (c, _)) in columns.iter().enumerate() {
        if c.counts.len() != classes.m() {
            return Err(Error::InvalidConfiguration(format!("column {j} has the wrong length")));
        }
        if c.counts.iter().zip(&classes.counts).any(|(a, n)| a > n) {
            return Err(Error::InvalidConfiguration(format!(
                "column {j} uses more items of a size than exist"
            )));
        }
        if c.load(&classes.sizes) > capacity as u128 {
            return Err(Error::InvalidConfiguration(format!("column {j} overfills a bin")));
        }
    }
    Ok(())
}

/// Builds `count` bins of each configuration, filling slots from the class
/// queues. Slots left once a queue runs dry stay empty; empty bins are dropped.
pub fn realize_integral(
    instance: &Instance,
    classes: &SizeClasses,
    columns: &[(Configuration, u64)],
    k: u32,
) -> Result<KPacking> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    check_columns(classes, instance.capacity(), columns)?;
    let mut q = Queues::new(classes, k);
    let mut bins = Vec::new();
    for (c, count) in columns {
        for _ in 0..*count {
            bins.push(q.take(c));
        }
    }
    Ok(KPacking::from_contents(instance, k, bins))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingPath {
    /// x was integral; nothing was left over.
    Integral,
    /// One extra bin per fractional configuration.
    Fractional,
    /// Left-over copies packed by first fit.
    FirstFit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounded {
    pub packing: KPacking,
    pub path: RoundingPath,
    pub floor_bins: usize,
    /// `1 x + (m + k) / 2`.
    pub bound: Rational,
}

/// Floors `x`, then packs what is left both ways and keeps the smaller.
/// `instance` must be the instance whose classes built `program`.
pub fn round_to_integral(
    instance: &Instance,
    program: &ConfigProgram,
    sol: &FractionalSolution,
) -> Result<Rounded> {
    let k = program.k;
    let classes = &program.classes;
    if classes.total() != instance.len() {
        return invalid("program classes do not match the instance");
    }
    let floors: Vec<(Configuration, u64)> = sol
        .x
        .iter()
        .map(|(j, v)| {
            let f = v.floor().to_integer();
            (program.configs[*j].clone(), u64::try_from(f).unwrap_or(0))
        })
        .collect();
    check_columns(classes, instance.capacity(), &floors)?;
    let mut q = Queues::new(classes, k);
    let mut bins = Vec::new();
    for (c, count) in &floors {
        for _ in 0..*count {
            bins.push(q.take(c));
        }
    }
    let floor_bins = bins.len();
    let left = q.rest();
    let path;
    if left.is_empty() {
        path = RoundingPath::Integral;
    } else {
        let mut fractional = Vec::new();
        for (j, v) in &sol.x {
            if !v.fract().is_zero() {
                fractional.push(q.take(&program.configs[*j]));
            }
        }
        debug_assert!(q.rest().is_empty(), "ceil(x) covers the demand");
        let mut ff = FirstFit::new(instance.sizes(), instance.capacity());
        for c in left {
            ff.place(c);
        }
        let by_ff = ff.into_bins();
        let fractional: Vec<Vec<ItemCopy>> = fractional.into_iter().filter(|b| !b.is_empty()).collect();
        if fractional.len() <= by_ff.len() {
            path = RoundingPath::Fractional;
            bins.extend(fractional);
        } else {
            path = RoundingPath::FirstFit;
            bins.extend(by_ff);
        }
    }
    let packing = KPacking::from_contents(instance, k, bins);
    let bound = &sol.value + ratio(BigInt::from(program.m() as u64 + k as u64), 2);
    Ok(Rounded { packing, path, floor_bins, bound })
}

/// First-fits `k` copies of each small item (copy by copy) into the bins,
/// opening new bins only when nothing admits a copy.
pub fn add_small_items(
    instance: &Instance,
    packing: KPacking,
    small: &[usize],
    eps: &Rational,
) -> Result<KPacking> {
    let limit = eps * Rational::from_integer(BigInt::from(instance.capacity()));
    for &i in small {
        if i >= instance.len() {
            return invalid(format!("unknown item {i}"));
        }
        if Rational::from_integer(BigInt::from(instance.size(i))) > limit {
            return invalid(format!("item {i} is not small"));
        }
    }
    let k = packing.k;
    let existing: Vec<Vec<ItemCopy>> = packing.bins.into_iter().map(|b| b.contents).collect();
    let mut ff = FirstFit::with_bins(instance.sizes(), instance.capacity(), existing);
    for copy in 1..=k {
        for &item in small {
            ff.place(ItemCopy { item, copy });
        }
    }
    Ok(KPacking::from_contents(instance, k, ff.into_bins()))
}
