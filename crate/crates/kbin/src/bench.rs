//! Known-optimum benchmark: generated instances with a fixed optimum are
//! packed by the heuristics and every result is checked against its bound.

use kbin_core::gen::generate_instance;
use kbin_core::heuristics::{ffdk, ffk, nfk};
use kbin_core::model::{int, ratio};
use kbin_core::{validate, Instance, KPacking, Rational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{KbinError, Result};
use crate::formats::{parse_rational, rational_string};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Ffk,
    Ffdk,
    Nfk,
}

impl Heuristic {
    pub fn run(self, instance: &Instance, k: u32) -> kbin_core::Result<KPacking> {
        match self {
            Heuristic::Ffk => ffk(instance, k),
            Heuristic::Ffdk => ffdk(instance, k),
            Heuristic::Nfk => nfk(instance, k),
        }
    }

    /// Bin bound for an instance with optimum `opt`, and whether it is proven.
    pub fn bound(self, opt: u32, k: u32) -> (Rational, BoundKind) {
        let (o, kk) = (int(opt), int(k));
        match self {
            Heuristic::Ffk => {
                ((ratio(3, 2) + ratio(1, 5 * k as u64)) * &kk * &o + int(3) * &kk, BoundKind::Theorem)
            }
            Heuristic::Nfk => (int(2) * &kk * &o + int(1), BoundKind::Theorem),
            Heuristic::Ffdk => ((int(11) * &kk * &o + int(6)) / int(9), BoundKind::Conjecture),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Theorem,
    Conjecture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub capacity: u64,
    pub opts: Vec<u32>,
    pub instances: usize,
    pub ks: Vec<u32>,
    pub algorithms: Vec<Heuristic>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub capacity: u64,
    pub opt: u32,
    pub k: u32,
    pub algorithm: Heuristic,
    pub instances: usize,
    pub max_bins: usize,
    pub mean_bins: f64,
    pub bound: String,
    pub bound_kind: BoundKind,
    pub violations: usize,
    /// Instances that could not be generated or packed validly.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    fn count(&self, kind: BoundKind) -> usize {
        self.cells.iter().filter(|c| c.bound_kind == kind).map(|c| c.violations).sum()
    }

    pub fn theorem_violations(&self) -> usize {
        self.count(BoundKind::Theorem)
    }

    pub fn conjecture_violations(&self) -> usize {
        self.count(BoundKind::Conjecture)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.cells.is_empty() {
            w.write_record([
                "capacity", "opt", "k", "algorithm", "instances", "max_bins", "mean_bins", "bound",
                "bound_kind", "violations", "failures",
            ])?;
        }
        for c in &self.cells {
            w.serialize(c)?;
        }
        let bytes = w.into_inner().map_err(|e| KbinError::Format(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let cells = r.deserialize().collect::<std::result::Result<Vec<BenchCell>, _>>()?;
        for c in &cells {
            parse_rational(&c.bound)?;
        }
        Ok(Self { cells })
    }
}

fn check_suite(suite: &Suite) -> Result<()> {
    if suite.opts.is_empty() || suite.ks.is_empty() || suite.algorithms.is_empty() || suite.instances == 0 {
        return Ok(());
    }
    if suite.capacity < 2 {
        return Err(KbinError::InvalidArgument("capacity must exceed 1".into()));
    }
    if suite.opts.contains(&0) || suite.ks.contains(&0) {
        return Err(KbinError::InvalidArgument("opt and k values must be positive".into()));
    }
    Ok(())
}

/// Instances for every optimum, shared by all cells with that optimum.
fn corpus(suite: &Suite, opt: u32) -> Vec<Option<Instance>> {
    (0..suite.instances)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(suite.seed, ((opt as u64) << 32) | i as u64);
            generate_instance(suite.capacity, opt, seed).ok().map(|g| g.instance)
        })
        .collect()
}

fn run_cell(suite: &Suite, opt: u32, k: u32, algo: Heuristic, insts: &[Option<Instance>]) -> BenchCell {
    let (bound, bound_kind) = algo.bound(opt, k);
    let mut bins = Vec::new();
    let mut failures = 0;
    for inst in insts {
        let packed = inst.as_ref().and_then(|d| algo.run(d, k).ok().filter(|p| validate(d, p).is_empty()));
        match packed {
            Some(p) => bins.push(p.len()),
            None => failures += 1,
        }
    }
    let violations = bins.iter().filter(|&&b| int(b as u64) > bound).count();
    let mean_bins = if bins.is_empty() { 0.0 } else { bins.iter().sum::<usize>() as f64 / bins.len() as f64 };
    BenchCell {
        capacity: suite.capacity,
        opt,
        k,
        algorithm: algo,
        instances: insts.len(),
        max_bins: bins.iter().copied().max().unwrap_or(0),
        mean_bins,
        bound: rational_string(&bound),
        bound_kind,
        violations,
        failures,
    }
}

/// Cells come back sorted by (optimum, k, algorithm) whatever the schedule.
pub fn run_bench(suite: &Suite) -> Result<BenchReport> {
    check_suite(suite)?;
    if suite.instances == 0 {
        return Ok(BenchReport::default());
    }
    let mut opts = suite.opts.clone();
    opts.sort_unstable();
    opts.dedup();
    let mut ks = suite.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut algos = suite.algorithms.clone();
    algos.sort_unstable();
    algos.dedup();
    let mut cells = Vec::new();
    for &opt in &opts {
        let insts = corpus(suite, opt);
        let keys: Vec<(u32, Heuristic)> = ks.iter().flat_map(|&k| algos.iter().map(move |&a| (k, a))).collect();
        let done: Vec<BenchCell> = keys.par_iter().map(|&(k, a)| run_cell(suite, opt, k, a, &insts)).collect();
        cells.extend(done);
    }
    Ok(BenchReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(opts: Vec<u32>, instances: usize, ks: Vec<u32>) -> Suite {
        Suite {
            capacity: 100,
            opts,
            instances,
            ks,
            algorithms: vec![Heuristic::Ffk, Heuristic::Ffdk, Heuristic::Nfk],
            seed: 7,
        }
    }

    #[test]
    fn empty_suite() {
        assert!(run_bench(&suite(vec![], 10, vec![2])).unwrap().cells.is_empty());
        assert!(run_bench(&suite(vec![2], 0, vec![2])).unwrap().cells.is_empty());
        let r = BenchReport::default();
        assert_eq!(BenchReport::from_csv(&r.to_csv().unwrap()).unwrap(), r);
    }

    #[test]
    fn bounds() {
        assert_eq!(Heuristic::Ffk.bound(2, 5).0, ratio(3, 2) * int(10) + ratio(2, 5) + int(15));
        assert_eq!(Heuristic::Nfk.bound(3, 2).0, int(13));
        assert_eq!(Heuristic::Ffdk.bound(2, 3), (ratio(72, 9), BoundKind::Conjecture));
    }

    #[test]
    fn small_suite_has_no_violations() {
        let r = run_bench(&suite(vec![2, 3], 15, vec![2, 3])).unwrap();
        assert_eq!(r.cells.len(), 12);
        assert_eq!(r.theorem_violations(), 0);
        assert_eq!(r.failures(), 0);
        let keys: Vec<(u32, u32, Heuristic)> = r.cells.iter().map(|c| (c.opt, c.k, c.algorithm)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for c in &r.cells {
            assert!(c.max_bins as u32 >= c.k * c.opt);
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let r = run_bench(&suite(vec![2, 5], 7, vec![1, 4])).unwrap();
        let text = r.to_csv().unwrap();
        assert_eq!(BenchReport::from_csv(&text).unwrap(), r);
        assert!(text.starts_with("capacity,opt,k,algorithm,"));
    }

    #[test]
    fn single_instance_matches_direct_packing() {
        let s = Suite { algorithms: vec![Heuristic::Ffk], ..suite(vec![3], 1, vec![1]) };
        let r = run_bench(&s).unwrap();
        let seed = derive_seed(7, 3 << 32);
        let inst = generate_instance(100, 3, seed).unwrap().instance;
        assert_eq!(r.cells[0].max_bins, ffk(&inst, 1).unwrap().len());
    }

    #[test]
    fn rejects_bad_suites() {
        assert!(run_bench(&Suite { capacity: 1, ..suite(vec![2], 1, vec![1]) }).is_err());
        assert!(run_bench(&suite(vec![0], 1, vec![1])).is_err());
    }
}
