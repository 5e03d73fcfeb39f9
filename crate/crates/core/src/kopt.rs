//! Egalitarian connection time and the smallest k that attains it.
//!
//! Agents with demands share a supply `S`. A schedule is a probability
//! distribution over agent subsets whose demand fits; `r_max` is the largest
//! fraction of time every agent can be guaranteed. A k-times packing of the
//! demands into `q` bins gives every agent `k/q`, and `K(D)` is the smallest
//! `k` for which that reaches `r_max`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::exact::opt_kbp;
use crate::model::{ratio, Instance, Rational};
use crate::simplex::{self, Lp};

pub const DEFAULT_AGENT_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgalResult {
    pub r_max: Rational,
    /// Agent subsets with their share of time; shares sum to one.
    pub witness: Vec<(Vec<usize>, Rational)>,
}

impl EgalResult {
    /// Time share of every agent under the witness schedule.
    pub fn coverage(&self, agents: usize) -> Vec<Rational> {
        let mut c = vec![Rational::zero(); agents];
        for (set, w) in &self.witness {
            for &a in set {
                c[a] += w;
            }
        }
        c
    }
}

/// Feasible subsets to which no further agent can be added.
pub fn maximal_subsets(instance: &Instance) -> Vec<Vec<usize>> {
    fn walk(inst: &Instance, i: usize, room: u64, min_skipped: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == inst.len() {
            if !cur.is_empty() && min_skipped > room {
                out.push(cur.clone());
            }
            return;
        }
        let s = inst.size(i);
        if s <= room {
            cur.push(i);
            walk(inst, i + 1, room - s, min_skipped, cur, out);
            cur.pop();
        }
        walk(inst, i + 1, room, min_skipped.min(s), cur, out);
    }
    let mut out = Vec::new();
    walk(instance, 0, instance.capacity(), u64::MAX, &mut Vec::new(), &mut out);
    out
}

pub fn egalitarian_fraction(instance: &Instance) -> Result<EgalResult> {
    egalitarian_fraction_capped(instance, DEFAULT_AGENT_CAP)
}

/// Solves `min sum(mu)` subject to `sum mu_w w >= 1` over maximal subsets;
/// then `r_max = 1 / sum(mu)` and the schedule weights are `mu r_max`.
pub fn egalitarian_fraction_capped(instance: &Instance, cap: usize) -> Result<EgalResult> {
    let n = instance.len();
    if n > cap {
        return Err(Error::CapacityExceeded(format!("{n} agents exceed the limit of {cap}")));
    }
    let subsets = maximal_subsets(instance);
    let mut columns: Vec<Vec<(usize, i64)>> =
        subsets.iter().map(|s| s.iter().map(|&a| (a, 1)).collect()).collect();
    let mut cost = vec![1i64; columns.len()];
    for a in 0..n {
        columns.push(vec![(a, -1)]);
        cost.push(0);
    }
    let lp = Lp { rows: n, columns, cost, rhs: vec![1; n] };
    let sol = simplex::solve(&lp, None)?;
    let r_max = sol.value.recip();
    let witness = sol
        .x
        .iter()
        .filter(|(j, _)| *j < subsets.len())
        .map(|(j, mu)| (subsets[*j].clone(), mu * &r_max))
        .collect();
    Ok(EgalResult { r_max, witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRow {
    pub k: u32,
    pub opt: usize,
    /// k / OPT(D_k).
    pub fraction: Rational,
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSearchResult {
    pub r_max: Rational,
    pub k_star: Option<u32>,
    /// First k whose optimum could not be settled before `k_star` was found;
    /// while set, no later k is reported as `k_star`.
    pub inconclusive: Option<u32>,
    pub rows: Vec<KRow>,
}

/// Tabulates `k / OPT(D_k)` for `k = 1..=k_max` and finds the first `k`
/// reaching `r_max`. A row whose packing reaches `r_max` certifies that
/// fraction even if not proven optimal, since no packing can beat `r_max`.
pub fn find_optimal_k(instance: &Instance, k_max: u32, node_budget: u64) -> Result<KSearchResult> {
    if k_max < 1 {
        return invalid("k_max must be at least 1");
    }
    let egal = egalitarian_fraction(instance)?;
    let mut out = KSearchResult { r_max: egal.r_max, k_star: None, inconclusive: None, rows: Vec::new() };
    for k in 1..=k_max {
        let r = opt_kbp(instance, k, node_budget)?;
        let fraction = ratio(k, r.count as u64);
        if out.k_star.is_none() && out.inconclusive.is_none() {
            if fraction == out.r_max {
                out.k_star = Some(k);
            } else if !r.proven {
                out.inconclusive = Some(k);
            }
        }
        out.rows.push(KRow { k, opt: r.count, fraction, proven: r.proven });
    }
    Ok(out)
}

/// `n` unit demands with supply `n - 1`.
pub fn unit_lowerbound_instance(n: usize) -> Result<Instance> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    Instance::new(vec![1; n], n as u64 - 1)
}

/// Demands `[4, 2, 5, 3, 2, 1]` with supply 9; here `K = 9`.
pub fn k6_instance() -> Instance {
    Instance::new(vec![4, 2, 5, 3, 2, 1], 9).expect("static instance")
}

const MAX_DET: [u64; 21] = [
    1, 1, 2, 3, 5, 9, 32, 56, 144, 320, 1458, 3645, 9477, 25515, 131072, 327680, 1114112,
    3411968, 19531250, 56640625, 195312500,
];

/// Largest determinant of an `n x n` matrix with 0/1 entries, `1 <= n <= 21`.
pub fn a_table(n: usize) -> Result<u64> {
    if !(1..=MAX_DET.len()).contains(&n) {
        return invalid("a(n) is tabulated for 1 <= n <= 21");
    }
    Ok(MAX_DET[n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DEFAULT_BUDGET;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn three_agents_two_thirds() {
        let d = Instance::new(vec![2, 1, 1], 3).unwrap();
        let e = egalitarian_fraction(&d).unwrap();
        assert_eq!(e.r_max, ratio(2, 3));
        let mut sets: Vec<Vec<usize>> = e.witness.iter().map(|(s, _)| s.clone()).collect();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(e.witness.iter().all(|(_, w)| *w == ratio(1, 3)));
    }

    #[test]
    fn three_agents_pairwise() {
        let d = Instance::new(vec![11, 12, 13], 25).unwrap();
        assert_eq!(egalitarian_fraction(&d).unwrap().r_max, ratio(2, 3));
        let t = find_optimal_k(&d, 3, DEFAULT_BUDGET).unwrap();
        let fr: Vec<Rational> = t.rows.iter().map(|r| r.fraction.clone()).collect();
        assert_eq!(fr, vec![ratio(1, 2), ratio(2, 3), ratio(3, 5)]);
        assert_eq!(t.k_star, Some(2));
    }

    #[test]
    fn all_fit_together() {
        let d = Instance::new(vec![1; 5], 5).unwrap();
        assert_eq!(egalitarian_fraction(&d).unwrap().r_max, Rational::one());
    }

    #[test]
    fn unit_family() {
        for n in 2..=6usize {
            let d = unit_lowerbound_instance(n).unwrap();
            let t = find_optimal_k(&d, n as u32, DEFAULT_BUDGET).unwrap();
            assert_eq!(t.r_max, ratio(n as u64 - 1, n as u64));
            assert_eq!(t.k_star, Some(n as u32 - 1), "n = {n}");
        }
        assert!(unit_lowerbound_instance(1).is_err());
    }

    #[test]
    fn k6_needs_nine() {
        let d = k6_instance();
        let t = find_optimal_k(&d, 9, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.r_max, ratio(9, 17));
        assert_eq!(t.k_star, Some(9));
        assert_eq!(t.rows[8].opt, 17);
        for row in &t.rows[..8] {
            assert!(row.proven);
            assert!(row.opt as u64 * 9 > 17 * row.k as u64);
        }
    }

    #[test]
    fn determinant_table() {
        assert_eq!(a_table(6).unwrap(), 9);
        assert_eq!(a_table(1).unwrap(), 1);
        assert_eq!(a_table(10).unwrap(), 320);
        assert!(a_table(0).is_err());
        assert!(a_table(22).is_err());
    }

    #[test]
    fn agent_cap() {
        let d = Instance::new(vec![1; 21], 5).unwrap();
        assert!(matches!(egalitarian_fraction(&d), Err(Error::CapacityExceeded(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn witness_is_a_schedule_and_dominates(
            sizes in prop::collection::vec(1u64..=10, 1..=6),
            k in 1u32..=3,
        ) {
            let d = Instance::new(sizes, 10).unwrap();
            let e = egalitarian_fraction(&d).unwrap();
            let total: Rational = e.witness.iter().map(|(_, w)| w.clone()).sum();
            prop_assert_eq!(total, Rational::one());
            for (set, _) in &e.witness {
                prop_assert!(set.iter().map(|&a| d.size(a)).sum::<u64>() <= 10);
            }
            for c in e.coverage(d.len()) {
                prop_assert!(c >= e.r_max);
            }
            let r = opt_kbp(&d, k, DEFAULT_BUDGET).unwrap();
            prop_assert!(ratio(k, r.count as u64) <= e.r_max);
        }

        #[test]
        fn k_star_within_determinant_bound(sizes in prop::collection::vec(1u64..=10, 1..=4)) {
            let d = Instance::new(sizes, 10).unwrap();
            let bound = a_table(d.len()).unwrap() as u32;
            let t = find_optimal_k(&d, bound, DEFAULT_BUDGET).unwrap();
            prop_assert!(t.k_star.is_some());
        }
    }
}
