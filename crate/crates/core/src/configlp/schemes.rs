//! The three grouping-based approximation schemes for kBP.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::grouping::{geometric_groups, linear_groups, sort_entries};
use super::rounding::{add_small_items, realize_integral, round_to_integral};
use super::{solve_fk, ConfigProgram, DEFAULT_CONFIG_CAP};
use crate::error::{invalid, Result};
use crate::exact::{as_columns, min_bins_for_demand};
use crate::firstfit::FirstFit;
use crate::heuristics::ffdk;
use crate::model::{int, ratio, rational_to_f64, size_classes, Instance, ItemCopy, KPacking, Rational, SizeClasses};

/// Node budget for the integral configuration search inside [`dlvl_kbp`].
pub const DLVL_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeReport {
    pub bins: usize,
    pub small_items: usize,
    pub large_items: usize,
    /// Linear grouping size; 0 for the geometric scheme.
    pub group_size: usize,
    /// Size classes of the rounded instance (first round for the geometric scheme).
    pub classes: usize,
    /// Optimum of the fractional program that was rounded, if one was solved.
    pub lin: Option<Rational>,
    /// False if the integral search stopped on its budget.
    pub proven: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeOutput {
    pub packing: KPacking,
    pub report: SchemeReport,
}

fn check(k: u32, eps: &Rational) -> Result<()> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    if !(eps > &Rational::zero() && eps <= &ratio(1, 2)) {
        return invalid("eps must lie in (0, 1/2]");
    }
    Ok(())
}

/// Item ids with size at most `t S`, and the rest as sorted entries.
fn split(d: &Instance, t: &Rational) -> (Vec<usize>, Vec<(usize, u64)>) {
    let limit = t * Rational::from_integer(BigInt::from(d.capacity()));
    let mut small = Vec::new();
    let mut large = Vec::new();
    for (i, &s) in d.sizes().iter().enumerate() {
        if Rational::from_integer(BigInt::from(s)) <= limit {
            small.push(i);
        } else {
            large.push((i, s));
        }
    }
    sort_entries(&mut large);
    (small, large)
}

/// ceil(n eps^2), at least 1.
fn group_size(n: usize, eps: &Rational) -> usize {
    let v = Rational::from_integer(BigInt::from(n)) * eps * eps;
    v.ceil().to_integer().to_usize().unwrap_or(usize::MAX).max(1)
}

/// A standalone instance over `entries` plus the map back to original ids.
fn sub_instance(entries: &[(usize, u64)], capacity: u64) -> Result<(Instance, Vec<usize>)> {
    let map = entries.iter().map(|&(id, _)| id).collect();
    let inst = Instance::new(entries.iter().map(|&(_, s)| s).collect(), capacity)?;
    Ok((inst, map))
}

fn remap(p: KPacking, map: &[usize]) -> Vec<Vec<ItemCopy>> {
    p.bins
        .into_iter()
        .map(|b| b.contents.into_iter().map(|c| ItemCopy { item: map[c.item], copy: c.copy }).collect())
        .collect()
}

fn finish(d: &Instance, k: u32, bins: Vec<Vec<ItemCopy>>, small: &[usize], t: &Rational, mut report: SchemeReport) -> Result<SchemeOutput> {
    let packing = add_small_items(d, KPacking::from_contents(d, k, bins), small, t)?;
    report.bins = packing.len();
    Ok(SchemeOutput { packing, report })
}

pub fn dlvl_kbp(d: &Instance, k: u32, eps: &Rational) -> Result<SchemeOutput> {
    dlvl_kbp_with_budget(d, k, eps, DLVL_BUDGET)
}

/// Linear grouping, then an integral optimum of C_k on the rounded large
/// items (the search falls back to FFDk on them if the budget runs out).
pub fn dlvl_kbp_with_budget(d: &Instance, k: u32, eps: &Rational, budget: u64) -> Result<SchemeOutput> {
    check(k, eps)?;
    let (small, large) = split(d, eps);
    let mut report = SchemeReport {
        bins: 0,
        small_items: small.len(),
        large_items: large.len(),
        group_size: 0,
        classes: 0,
        lin: None,
        proven: true,
        iterations: 0,
    };
    if large.is_empty() {
        return finish(d, k, Vec::new(), &small, eps, report);
    }
    let g = group_size(large.len(), eps);
    let groups = linear_groups(&large, g);
    let rounded: Vec<(usize, u64)> =
        groups.groups.iter().flat_map(|gr| gr.entries.iter().map(move |&(id, _)| (id, gr.rounded))).collect();
    let (u, map) = sub_instance(&rounded, d.capacity())?;
    let classes = size_classes(&u);
    let demand: Vec<u32> = classes.counts.iter().map(|&n| n * k).collect();
    let incumbent = ffdk(&u, k)?;
    let found = min_bins_for_demand(&classes, u.capacity(), &demand, incumbent.len(), budget)?;
    report.group_size = g;
    report.classes = classes.m();
    report.proven = found.proven;
    let local = match found.bins {
        Some(bins) => realize_integral(&u, &classes, &as_columns(&bins), k)?,
        None => incumbent,
    };
    finish(d, k, remap(local, &map), &small, eps, report)
}

/// Large items above `max(1/n, eps) S`; the `g` largest get one bin per copy,
/// the rest are rounded, solved fractionally and rounded to integers.
pub fn kk1_kbp(d: &Instance, k: u32, eps: &Rational) -> Result<SchemeOutput> {
    check(k, eps)?;
    let inv_n = ratio(1, d.len() as u64);
    let t = if inv_n > *eps { inv_n } else { eps.clone() };
    let (small, large) = split(d, &t);
    let mut report = SchemeReport {
        bins: 0,
        small_items: small.len(),
        large_items: large.len(),
        group_size: 0,
        classes: 0,
        lin: None,
        proven: true,
        iterations: 0,
    };
    if large.is_empty() {
        return finish(d, k, Vec::new(), &small, &t, report);
    }
    let g = group_size(large.len(), eps);
    let groups = linear_groups(&large, g);
    report.group_size = g;
    let mut bins: Vec<Vec<ItemCopy>> = Vec::new();
    for &(id, _) in &groups.u_prime {
        for copy in 1..=k {
            bins.push(vec![ItemCopy { item: id, copy }]);
        }
    }
    if !groups.u_doubleprime.is_empty() {
        let (u, map) = sub_instance(&groups.u_doubleprime, d.capacity())?;
        let program = ConfigProgram::new(size_classes(&u), u.capacity(), k)?;
        let sol = solve_fk(&program)?;
        let rounded = round_to_integral(&u, &program, &sol)?;
        report.classes = program.m();
        report.lin = Some(sol.value);
        bins.extend(remap(rounded.packing, &map));
    }
    finish(d, k, bins, &small, &t, report)
}

/// `min(1/2, S / V(D))`: the choice eps = 1/V(D) with the capacity as unit.
pub fn kk2_default_eps(d: &Instance) -> Rational {
    let e = ratio(d.capacity(), d.volume_units());
    if e > ratio(1, 2) {
        ratio(1, 2)
    } else {
        e
    }
}

/// ln(V(D)/S) / ln g + 1.
pub fn kk2_iteration_bound(d: &Instance, g: u32) -> f64 {
    let v = d.volume_units() as f64 / d.capacity() as f64;
    libm::log(v) / libm::log(g as f64) + 1.0
}

/// Iterated geometric grouping over copy entries. Each large item starts
/// with `k` entries; a round solves the fractional program for the rounded
/// entries, keeps the floor bins, first-fits the set-aside entries and
/// repeats while the remaining volume per copy is above the threshold.
pub fn kk2_kbp(d: &Instance, k: u32, eps: &Rational, g: u32) -> Result<SchemeOutput> {
    if g <= 1 {
        return invalid("g must exceed 1");
    }
    check(k, eps)?;
    let cap = d.capacity();
    let (small, large) = split(d, eps);
    let mut report = SchemeReport {
        bins: 0,
        small_items: small.len(),
        large_items: large.len(),
        group_size: 0,
        classes: 0,
        lin: None,
        proven: true,
        iterations: 0,
    };
    let n = d.len();
    let mut rem = vec![0u32; n];
    for &(id, _) in &large {
        rem[id] = k;
    }
    let mut next_copy = vec![1u32; n];
    let mut bins: Vec<Vec<ItemCopy>> = Vec::new();
    let ln_inv_eps = libm::log(1.0 / rational_to_f64(eps));
    let limit = 1.0 + g as f64 / (g as f64 - 1.0) * ln_inv_eps;
    let per_copy_volume = |rem: &[u32]| -> f64 {
        let v: u128 = large.iter().map(|&(id, s)| rem[id] as u128 * s as u128).sum();
        v as f64 / (k as f64 * cap as f64)
    };
    while per_copy_volume(&rem) > limit {
        report.iterations += 1;
        let entries: Vec<(usize, u64)> = large
            .iter()
            .flat_map(|&(id, s)| core::iter::repeat_n((id, s), rem[id] as usize))
            .collect();
        let grouped = geometric_groups(&entries, g as u128 * cap as u128 * k as u128);
        if !grouped.u_doubleprime.is_empty() {
            let (classes, demand, mut class_rem) = entry_classes(&grouped.u_doubleprime, n);
            let program = ConfigProgram::with_demand(classes, cap, k, demand, DEFAULT_CONFIG_CAP)?;
            let sol = solve_fk(&program)?;
            if report.iterations == 1 {
                report.classes = program.m();
                report.lin = Some(sol.value.clone());
            }
            for (j, v) in &sol.x {
                let times = v.floor().to_integer().to_u64().unwrap_or(0);
                let config = &program.configs[*j];
                for _ in 0..times {
                    let mut bin: Vec<ItemCopy> = Vec::new();
                    for (i, &a) in config.counts.iter().enumerate() {
                        let mut pick: Vec<usize> = program.classes.members[i]
                            .iter()
                            .copied()
                            .filter(|&id| class_rem[i][id] > 0 && bin.iter().all(|c| c.item != id))
                            .collect();
                        pick.sort_by(|&x, &y| class_rem[i][y].cmp(&class_rem[i][x]).then(x.cmp(&y)));
                        for &id in pick.iter().take(a as usize) {
                            class_rem[i][id] -= 1;
                            rem[id] -= 1;
                            bin.push(ItemCopy { item: id, copy: next_copy[id] });
                            next_copy[id] += 1;
                        }
                    }
                    if !bin.is_empty() {
                        bins.push(bin);
                    }
                }
            }
        }
        let mut ff = FirstFit::new(d.sizes(), cap);
        for &(id, _) in &grouped.u_prime {
            ff.place(ItemCopy { item: id, copy: next_copy[id] });
            next_copy[id] += 1;
            rem[id] -= 1;
        }
        bins.extend(ff.into_bins());
    }
    // what is left: pack one copy greedily, then stack layers of it
    let left: Vec<usize> = large.iter().map(|&(id, _)| id).filter(|&id| rem[id] > 0).collect();
    let mut ff = FirstFit::new(d.sizes(), cap);
    for &id in &left {
        ff.place(ItemCopy { item: id, copy: 1 });
    }
    let base = ff.into_bins();
    let layers = left.iter().map(|&id| rem[id]).max().unwrap_or(0);
    for layer in 1..=layers {
        for b in &base {
            let bin: Vec<ItemCopy> = b
                .iter()
                .filter(|c| rem[c.item] >= layer)
                .map(|c| {
                    let copy = next_copy[c.item];
                    next_copy[c.item] += 1;
                    ItemCopy { item: c.item, copy }
                })
                .collect();
            if !bin.is_empty() {
                bins.push(bin);
            }
        }
    }
    finish(d, k, bins, &small, eps, report)
}

/// Size classes over rounded entries: multiplicity is the number of distinct
/// items in the class, demand the number of entries. Also returns, per class,
/// the entry count of every item.
fn entry_classes(entries: &[(usize, u64)], n: usize) -> (SizeClasses, Vec<u64>, Vec<Vec<u32>>) {
    let mut sorted = entries.to_vec();
    sort_entries(&mut sorted);
    let mut classes = SizeClasses { sizes: Vec::new(), counts: Vec::new(), members: Vec::new() };
    let mut demand: Vec<u64> = Vec::new();
    let mut per_item: Vec<Vec<u32>> = Vec::new();
    for (id, s) in sorted {
        if classes.sizes.last() != Some(&s) {
            classes.sizes.push(s);
            classes.counts.push(0);
            classes.members.push(Vec::new());
            demand.push(0);
            per_item.push(vec![0; n]);
        }
        let i = classes.sizes.len() - 1;
        if per_item[i][id] == 0 {
            classes.counts[i] += 1;
            classes.members[i].push(id);
        }
        per_item[i][id] += 1;
        demand[i] += 1;
    }
    (classes, demand, per_item)
}

/// `(1 + 2 eps) OPT + k`.
pub fn dlvl_bound(opt: u64, k: u32, eps: &Rational) -> Rational {
    (Rational::one() + int(2) * eps) * int(opt) + int(k)
}

/// `(1 + 2 k eps) OPT + 1/(2 eps^2) + 2k + 1`.
pub fn kk1_bound(opt: u64, k: u32, eps: &Rational) -> Rational {
    (Rational::one() + int(2 * k) * eps) * int(opt) + (int(2) * eps * eps).recip() + int(2 * k as u64 + 1)
}
