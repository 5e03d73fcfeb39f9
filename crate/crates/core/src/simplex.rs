//! Revised simplex in exact rational arithmetic with Bland's rule.
//!
//! Solves `min c x` subject to `A x = b`, `x >= 0`, with sparse integer
//! columns and a nonnegative integer right-hand side. The basis inverse is
//! kept dense, which is fine for the few dozen rows these programs have.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};
use crate::model::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lp {
    pub rows: usize,
    /// Sparse columns as (row, coefficient).
    pub columns: Vec<Vec<(usize, i64)>>,
    pub cost: Vec<i64>,
    pub rhs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    /// Nonzero variables as (column, value), ascending by column.
    pub x: Vec<(usize, Rational)>,
    pub value: Rational,
    /// Basic column per row; `None` marks a redundant row kept by an artificial.
    pub basis: Vec<Option<usize>>,
    pub pivots: usize,
}

struct Tableau<'a> {
    lp: &'a Lp,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
    /// Columns `>= lp.columns.len()` are artificials, one per row.
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau<'_> {
    fn n(&self) -> usize {
        self.lp.columns.len()
    }

    fn column(&self, j: usize) -> Vec<(usize, i64)> {
        if j < self.n() {
            self.lp.columns[j].clone()
        } else {
            vec![(j - self.n(), 1)]
        }
    }

    fn direction(&self, j: usize) -> Vec<Rational> {
        let m = self.lp.rows;
        let mut d = vec![Rational::zero(); m];
        for (i, a) in self.column(j) {
            let a = Rational::from_integer(BigInt::from(a));
            for (r, dr) in d.iter_mut().enumerate() {
                if !self.binv[r][i].is_zero() {
                    *dr += &self.binv[r][i] * &a;
                }
            }
        }
        d
    }

    /// Dual values scaled to a common integer denominator.
    fn scaled_duals(&self, cost: &dyn Fn(usize) -> i64) -> (Vec<BigInt>, BigInt) {
        let m = self.lp.rows;
        let mut y = vec![Rational::zero(); m];
        for r in 0..m {
            let c = cost(self.basis[r]);
            if c == 0 {
                continue;
            }
            let c = Rational::from_integer(BigInt::from(c));
            for (i, yi) in y.iter_mut().enumerate() {
                if !self.binv[r][i].is_zero() {
                    *yi += &c * &self.binv[r][i];
                }
            }
        }
        let mut den = BigInt::one();
        for yi in &y {
            den = den.lcm(yi.denom());
        }
        let scaled = y.iter().map(|yi| (yi * Rational::from_integer(den.clone())).to_integer()).collect();
        (scaled, den)
    }

    /// First column (Bland) with negative reduced cost among `0..limit`.
    fn entering(&self, limit: usize, cost: &dyn Fn(usize) -> i64) -> Option<usize> {
        let (y, den) = self.scaled_duals(cost);
        let mut in_basis = vec![false; limit];
        for &b in &self.basis {
            if b < limit {
                in_basis[b] = true;
            }
        }
        let small: Option<Vec<i128>> = y.iter().map(|v| v.to_i128()).collect();
        let den_small = den.to_i128();
        if let (Some(ys), Some(ds)) = (small, den_small) {
            if ys.iter().all(|v| v.unsigned_abs() < 1 << 80) && ds < 1 << 80 {
                return (0..limit).find(|&j| {
                    if in_basis[j] {
                        return false;
                    }
                    let mut acc = cost(j) as i128 * ds;
                    for &(i, a) in &self.lp.columns[j] {
                        acc -= ys[i] * a as i128;
                    }
                    acc < 0
                });
            }
        }
        (0..limit).find(|&j| {
            if in_basis[j] {
                return false;
            }
            let mut acc = BigInt::from(cost(j)) * &den;
            for &(i, a) in &self.lp.columns[j] {
                acc -= &y[i] * BigInt::from(a);
            }
            acc.is_negative()
        })
    }

    fn pivot(&mut self, row: usize, col: usize, d: &[Rational]) {
        let m = self.lp.rows;
        let p = d[row].clone();
        for v in self.binv[row].iter_mut() {
            *v /= &p;
        }
        self.xb[row] /= &p;
        let pivot_row = self.binv[row].clone();
        let pivot_x = self.xb[row].clone();
        for (r, f) in d.iter().enumerate().take(m) {
            if r == row || f.is_zero() {
                continue;
            }
            for (v, pv) in self.binv[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= f * pv;
                }
            }
            self.xb[r] -= f * &pivot_x;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs simplex iterations; returns false if unbounded.
    fn optimize(&mut self, limit: usize, cost: &dyn Fn(usize) -> i64) -> bool {
        while let Some(j) = self.entering(limit, cost) {
            let d = self.direction(j);
            let mut best: Option<(usize, Rational)> = None;
            for (r, dr) in d.iter().enumerate().take(self.lp.rows) {
                if !dr.is_positive() {
                    continue;
                }
                let ratio = &self.xb[r] / dr;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(row, j, &d);
        }
        true
    }
}

/// Solves the program. `start` may name a feasible basis (one column per
/// row); otherwise a first phase with artificial variables finds one.
pub fn solve(lp: &Lp, start: Option<&[usize]>) -> Result<LpSolution> {
    let m = lp.rows;
    let n = lp.columns.len();
    if lp.rhs.len() != m || lp.cost.len() != n {
        return invalid("program dimensions disagree");
    }
    if lp.columns.iter().flatten().any(|&(i, _)| i >= m) {
        return invalid("column entry outside the row range");
    }
    let ident = |i: usize| {
        let mut row = vec![Rational::zero(); m];
        row[i] = Rational::one();
        row
    };
    let mut t = Tableau {
        lp,
        binv: (0..m).map(ident).collect(),
        xb: lp.rhs.iter().map(|&b| Rational::from_integer(BigInt::from(b))).collect(),
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    match start {
        Some(cols) => {
            if cols.len() != m {
                return invalid("starting basis has wrong size");
            }
            for &c in cols {
                if c >= n {
                    return invalid("starting basis names an unknown column");
                }
                let d = t.direction(c);
                let Some(row) = (0..m).find(|&r| t.basis[r] >= n && !d[r].is_zero()) else {
                    return invalid("starting basis is singular");
                };
                t.pivot(row, c, &d);
            }
            if t.xb.iter().any(|v| v.is_negative()) {
                return invalid("starting basis is infeasible");
            }
        }
        None => {
            let phase1 = |j: usize| i64::from(j >= n);
            t.optimize(n, &phase1);
            if t.xb.iter().zip(&t.basis).any(|(v, &b)| b >= n && !v.is_zero()) {
                return invalid("program is infeasible");
            }
            // drive zero-level artificials out where a real column can replace them
            for r in 0..m {
                if t.basis[r] < n {
                    continue;
                }
                let replacement = (0..n).find(|&j| !t.basis.contains(&j) && !t.direction(j)[r].is_zero());
                if let Some(j) = replacement {
                    let d = t.direction(j);
                    t.pivot(r, j, &d);
                }
            }
        }
    }
    let cost = |j: usize| if j < n { lp.cost[j] } else { 0 };
    if !t.optimize(n, &cost) {
        return invalid("program is unbounded");
    }
    let mut x: Vec<(usize, Rational)> = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(&b, v)| b < n && !v.is_zero())
        .map(|(&b, v)| (b, v.clone()))
        .collect();
    x.sort_by_key(|(j, _)| *j);
    let value = x.iter().fold(Rational::zero(), |acc, (j, v)| acc + v * Rational::from_integer(BigInt::from(lp.cost[*j])));
    let basis = t.basis.iter().map(|&b| (b < n).then_some(b)).collect();
    Ok(LpSolution { x, value, basis, pivots: t.pivots })
}
