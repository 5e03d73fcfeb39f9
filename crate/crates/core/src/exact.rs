//! Exact minimum bin count for kBP by depth-first search over size classes.
//!
//! Items of one size are interchangeable and so are the copies of one item,
//! so a state is just the number of copies still to place per size class.
//! Any sequence of bins whose per-class counts never exceed the class
//! multiplicity can be turned into a valid packing by round robin (see
//! [`crate::configlp::realize_integral`]), which is how the final packing is
//! produced.
//!
//! Pruning: every bin holds a copy of the largest class still open, bins are
//! maximal (nothing available that still fits is left out), and states that
//! failed with a given number of bins are remembered across deepening rounds.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::configlp::{realize_integral, Configuration};
use crate::error::{invalid, Result};
use crate::heuristics::ffdk;
use crate::model::{size_classes, Instance, KPacking, SizeClasses};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub count: usize,
    pub packing: KPacking,
    /// False when the node budget ran out; `count` is then only an upper bound.
    pub proven: bool,
    pub nodes: u64,
}

/// Outcome of a search over configuration sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSearch {
    /// One configuration per bin, if a solution below the given upper bound was found.
    pub bins: Option<Vec<Vec<u32>>>,
    /// True if `bins` (or the upper bound when `bins` is `None`) is optimal.
    pub proven: bool,
    pub nodes: u64,
}

struct Search<'a> {
    sizes: &'a [u64],
    caps: &'a [u32],
    capacity: u64,
    memo: HashMap<Vec<u32>, u32>,
    path: Vec<Vec<u32>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    fn lower(&self, r: &[u32]) -> u32 {
        let mut vol: u128 = 0;
        let mut big: u32 = 0;
        let mut spread: u32 = 0;
        for ((&ri, &size), &cap) in r.iter().zip(self.sizes).zip(self.caps.iter()) {
            if ri == 0 {
                continue;
            }
            vol += ri as u128 * size as u128;
            if 2 * size > self.capacity {
                big += ri;
            }
            spread = spread.max(ri.div_ceil(cap));
        }
        let by_volume = vol.div_ceil(self.capacity as u128) as u32;
        by_volume.max(big).max(spread)
    }

    fn solve(&mut self, r: &mut Vec<u32>, t: u32) -> bool {
        let Some(f) = r.iter().position(|&x| x > 0) else {
            return true;
        };
        if t == 0 || self.lower(r) > t {
            return false;
        }
        if self.memo.get(r.as_slice()).is_some_and(|&bad| bad >= t) {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return false;
        }
        let mut a = vec![0u32; r.len()];
        if self.branch(r, t, f, f, &mut a, self.capacity) {
            return true;
        }
        if !self.aborted {
            let e = self.memo.entry(r.clone()).or_insert(0);
            *e = (*e).max(t);
        }
        false
    }

    fn branch(&mut self, r: &mut Vec<u32>, t: u32, f: usize, i: usize, a: &mut Vec<u32>, room: u64) -> bool {
        if self.aborted {
            return false;
        }
        let m = r.len();
        if i == m {
            let maximal = (f..m).all(|j| a[j] >= self.caps[j].min(r[j]) || self.sizes[j] > room);
            if !maximal {
                return false;
            }
            for j in f..m {
                r[j] -= a[j];
            }
            self.path.push(a.clone());
            if self.solve(r, t - 1) {
                return true;
            }
            self.path.pop();
            for j in f..m {
                r[j] += a[j];
            }
            return false;
        }
        let fit = (room / self.sizes[i]).min(u32::MAX as u64) as u32;
        let hi = self.caps[i].min(r[i]).min(fit);
        let lo = u32::from(i == f);
        if hi < lo {
            return false;
        }
        for v in (lo..=hi).rev() {
            a[i] = v;
            if self.branch(r, t, f, i + 1, a, room - v as u64 * self.sizes[i]) {
                a[i] = 0;
                return true;
            }
        }
        a[i] = 0;
        false
    }
}

/// Fewest bins covering `demand[i]` copies of class `i`, each bin holding at
/// most `classes.counts[i]` of class `i`. Searches only below `upper`.
pub fn min_bins_for_demand(
    classes: &SizeClasses,
    capacity: u64,
    demand: &[u32],
    upper: usize,
    budget: u64,
) -> Result<ClassSearch> {
    if budget == 0 {
        return invalid("node budget must be positive");
    }
    if demand.len() != classes.m() {
        return invalid("demand length differs from class count");
    }
    if classes.sizes.iter().any(|&s| s == 0 || s > capacity) {
        return invalid("class size outside (0, capacity]");
    }
    let mut s = Search {
        sizes: &classes.sizes,
        caps: &classes.counts,
        capacity,
        memo: HashMap::new(),
        path: Vec::new(),
        nodes: 0,
        budget,
        aborted: false,
    };
    let mut r = demand.to_vec();
    let lb = s.lower(&r) as usize;
    for t in lb..upper {
        if s.solve(&mut r, t as u32) {
            return Ok(ClassSearch { bins: Some(s.path), proven: true, nodes: s.nodes });
        }
        if s.aborted {
            return Ok(ClassSearch { bins: None, proven: false, nodes: s.nodes });
        }
    }
    Ok(ClassSearch { bins: None, proven: true, nodes: s.nodes })
}

/// Groups a bin-by-bin configuration list into (configuration, count) runs.
pub(crate) fn as_columns(bins: &[Vec<u32>]) -> Vec<(Configuration, u64)> {
    let mut out: Vec<(Configuration, u64)> = Vec::new();
    for b in bins {
        match out.last_mut() {
            Some((c, n)) if c.counts == *b => *n += 1,
            _ => out.push((Configuration { counts: b.clone() }, 1)),
        }
    }
    out
}

pub fn opt_kbp(instance: &Instance, k: u32, node_budget: u64) -> Result<ExactResult> {
    if node_budget == 0 {
        return invalid("node budget must be positive");
    }
    let incumbent = ffdk(instance, k)?;
    let classes = size_classes(instance);
    let demand: Vec<u32> = classes.counts.iter().map(|&n| n * k).collect();
    let found = min_bins_for_demand(&classes, instance.capacity(), &demand, incumbent.len(), node_budget)?;
    let nodes = found.nodes;
    match found.bins {
        Some(bins) => {
            let packing = realize_integral(instance, &classes, &as_columns(&bins), k)?;
            Ok(ExactResult { count: packing.len(), packing, proven: true, nodes })
        }
        None => Ok(ExactResult { count: incumbent.len(), packing: incumbent, proven: found.proven, nodes }),
    }
}

pub fn opt_bp(instance: &Instance, node_budget: u64) -> Result<ExactResult> {
    opt_kbp(instance, 1, node_budget)
}
