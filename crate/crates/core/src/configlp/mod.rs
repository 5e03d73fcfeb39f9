//! The configuration program C_k and its fractional relaxation F_k.
//!
//! A configuration says how many items of each size class share one bin.
//! Column `j` of the program is configuration `j`; row `i` asks for
//! `demand[i]` copies of class `i` (normally `k` times the multiplicity).

mod grouping;
mod rounding;
mod schemes;

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::model::{Rational, SizeClasses};
use crate::simplex::{self, Lp};

pub use grouping::{geometric_grouping, linear_grouping, Group, GroupingResult};
pub use rounding::{add_small_items, realize_integral, round_to_integral, Rounded, RoundingPath};
pub use schemes::{
    dlvl_bound, dlvl_kbp, dlvl_kbp_with_budget, kk1_bound, kk1_kbp, kk2_default_eps,
    kk2_iteration_bound, kk2_kbp, SchemeOutput, SchemeReport, DLVL_BUDGET,
};

pub const DEFAULT_CONFIG_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub counts: Vec<u32>,
}

impl Configuration {
    pub fn load(&self, sizes: &[u64]) -> u128 {
        self.counts.iter().zip(sizes).map(|(&a, &c)| a as u128 * c as u128).sum()
    }

    pub fn fits(&self, classes: &SizeClasses, capacity: u64) -> bool {
        self.counts.len() == classes.m()
            && self.counts.iter().zip(&classes.counts).all(|(a, n)| a <= n)
            && self.load(&classes.sizes) <= capacity as u128
    }
}

pub fn enumerate_configs(classes: &SizeClasses, capacity: u64) -> Result<Vec<Configuration>> {
    enumerate_configs_capped(classes, capacity, DEFAULT_CONFIG_CAP)
}

/// All nonempty feasible configurations in decreasing lexicographic order.
pub fn enumerate_configs_capped(
    classes: &SizeClasses,
    capacity: u64,
    cap: usize,
) -> Result<Vec<Configuration>> {
    if classes.m() == 0 {
        return invalid("no size classes");
    }
    fn walk(
        classes: &SizeClasses,
        i: usize,
        room: u64,
        cur: &mut Vec<u32>,
        out: &mut Vec<Configuration>,
        cap: usize,
    ) -> Result<()> {
        if i == classes.m() {
            if cur.iter().any(|&a| a > 0) {
                if out.len() == cap {
                    return Err(Error::CapacityExceeded(format!("more than {cap} configurations")));
                }
                out.push(Configuration { counts: cur.clone() });
            }
            return Ok(());
        }
        let s = classes.sizes[i];
        let hi = (classes.counts[i] as u64).min(room / s) as u32;
        for a in (0..=hi).rev() {
            cur.push(a);
            walk(classes, i + 1, room - a as u64 * s, cur, out, cap)?;
            cur.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(classes, 0, capacity, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigProgram {
    pub classes: SizeClasses,
    pub capacity: u64,
    pub k: u32,
    pub demand: Vec<u64>,
    pub configs: Vec<Configuration>,
}

impl ConfigProgram {
    /// C_k with right-hand side `k n` over every feasible configuration.
    pub fn new(classes: SizeClasses, capacity: u64, k: u32) -> Result<Self> {
        let demand = classes.counts.iter().map(|&n| n as u64 * k as u64).collect();
        Self::with_demand(classes, capacity, k, demand, DEFAULT_CONFIG_CAP)
    }

    pub fn with_demand(
        classes: SizeClasses,
        capacity: u64,
        k: u32,
        demand: Vec<u64>,
        cap: usize,
    ) -> Result<Self> {
        if demand.len() != classes.m() {
            return invalid("demand length differs from class count");
        }
        let configs = enumerate_configs_capped(&classes, capacity, cap)?;
        Ok(Self { classes, capacity, k, demand, configs })
    }

    pub fn m(&self) -> usize {
        self.classes.m()
    }

    fn lp(&self) -> Lp {
        let columns = self
            .configs
            .iter()
            .map(|c| {
                c.counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(i, &a)| (i, a as i64))
                    .collect()
            })
            .collect();
        Lp { rows: self.m(), columns, cost: alloc::vec![1; self.configs.len()], rhs: self.demand.clone() }
    }

    fn singleton(&self, i: usize) -> Option<usize> {
        self.configs
            .iter()
            .position(|c| c.counts.iter().enumerate().all(|(j, &a)| a == u32::from(i == j)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalSolution {
    /// Nonzero entries of x as (configuration index, value).
    pub x: Vec<(usize, Rational)>,
    /// LIN: the optimum of F_k.
    pub value: Rational,
    pub basis: Vec<Option<usize>>,
}

impl FractionalSolution {
    pub fn get(&self, j: usize) -> Rational {
        self.x.iter().find(|(i, _)| *i == j).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    }

    /// Exact check of `A x = demand`.
    pub fn satisfies(&self, program: &ConfigProgram) -> bool {
        let mut lhs = alloc::vec![Rational::zero(); program.m()];
        for (j, v) in &self.x {
            for (i, &a) in program.configs[*j].counts.iter().enumerate() {
                lhs[i] += v * Rational::from_integer(BigInt::from(a));
            }
        }
        lhs.iter().zip(&program.demand).all(|(l, &d)| *l == Rational::from_integer(BigInt::from(d)))
    }
}

/// Exact optimum of F_k, starting from the basis of singleton configurations.
pub fn solve_fk(program: &ConfigProgram) -> Result<FractionalSolution> {
    let start: Vec<usize> = (0..program.m())
        .map(|i| program.singleton(i).expect("singleton configurations always fit"))
        .collect();
    let sol = simplex::solve(&program.lp(), Some(&start))?;
    Ok(FractionalSolution { x: sol.x, value: sol.value, basis: sol.basis })
}
