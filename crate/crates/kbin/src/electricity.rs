//! Sharing a day's electricity supply by k-times packing each hour.
//!
//! Every hour the households' demands are packed `k` times into bins of the
//! day's supply; each bin is then connected for `1/q` of the hour, so every
//! household is served `k/q` of it. Demands are held as integer milliwatts
//! (1e-6 kW) so the supply `S = day total / 24` compares exactly: an hour is
//! packed with sizes `24 d` against capacity `day total`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use kbin_core::heuristics::first_fit_rounds;
use kbin_core::model::{int, ratio, rational_to_f64};
use kbin_core::Rational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{KbinError, Result};

pub const HOURS_PER_DAY: usize = 24;
pub const HOURS_PER_WEEK: usize = 7 * HOURS_PER_DAY;
/// Demand units per kW (one unit is a milliwatt).
pub const UNITS_PER_KW: u64 = 1_000_000;
/// Smallest perturbed demand, 0.001 kW.
pub const PERTURB_FLOOR: u64 = 1_000;
const COMFORT_WEEKS: usize = 4;

/// Hour-by-agent demand matrix in milliwatts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandSeries {
    ids: Vec<String>,
    rows: Vec<Vec<u64>>,
}

fn kw_to_units(kw: f64) -> u64 {
    (kw * UNITS_PER_KW as f64).round() as u64
}

fn units_text(v: u64) -> String {
    format!("{}.{:06}", v / UNITS_PER_KW, v % UNITS_PER_KW)
}

impl DemandSeries {
    pub fn new(ids: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(KbinError::EmptySeries);
        }
        if ids.is_empty() {
            return Err(KbinError::InvalidArgument("demand series has no households".into()));
        }
        if let Some(h) = rows.iter().position(|r| r.len() != ids.len()) {
            return Err(KbinError::InvalidArgument(format!("hour {h} has the wrong number of values")));
        }
        Ok(Self { ids, rows })
    }

    pub fn from_kw(ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for (h, r) in rows.iter().enumerate() {
            let mut row = Vec::with_capacity(r.len());
            for (i, &x) in r.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(KbinError::Parse { row: h, col: i, msg: format!("bad demand {x}") });
                }
                row.push(kw_to_units(x));
            }
            out.push(row);
        }
        Self::new(ids, out)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn hours(&self) -> usize {
        self.rows.len()
    }

    pub fn agents(&self) -> usize {
        self.ids.len()
    }

    pub fn demand(&self, hour: usize, agent: usize) -> u64 {
        self.rows[hour][agent]
    }

    pub fn kw(&self, hour: usize, agent: usize) -> f64 {
        self.rows[hour][agent] as f64 / UNITS_PER_KW as f64
    }
}

/// Reads `hour,<id_1>,...,<id_N>` CSV with kW values.
pub fn read_demands<R: Read>(input: R) -> Result<DemandSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 2 {
        return Err(KbinError::Parse { row: 1, col: header.len(), msg: "expected hour and household columns".into() });
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(KbinError::Parse {
                row: line,
                col: rec.len(),
                msg: format!("expected {} fields", header.len()),
            });
        }
        let mut row = Vec::with_capacity(ids.len());
        for (c, field) in rec.iter().enumerate().skip(1) {
            let x: f64 = field.trim().parse().map_err(|_| KbinError::Parse {
                row: line,
                col: c,
                msg: format!("not a number: {field:?}"),
            })?;
            if !x.is_finite() || x < 0.0 {
                return Err(KbinError::Parse { row: line, col: c, msg: format!("negative or invalid demand {x}") });
            }
            row.push(kw_to_units(x));
        }
        rows.push(row);
    }
    DemandSeries::new(ids, rows)
}

pub fn load_demands(path: &Path) -> Result<DemandSeries> {
    read_demands(std::fs::File::open(path)?)
}

/// Writes six decimals, which reads back to the identical series.
pub fn write_demands<W: Write>(series: &DemandSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["hour".to_owned()];
    head.extend(series.ids.iter().cloned());
    w.write_record(&head)?;
    for (h, row) in series.rows.iter().enumerate() {
        let mut rec = vec![h.to_string()];
        rec.extend(row.iter().map(|&v| units_text(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Diurnal household curves: a base load, a morning and an evening bump,
/// a weekend factor and hourly jitter.
pub fn synth_demands(households: usize, days: usize, seed: u64) -> Result<DemandSeries> {
    if households == 0 || days == 0 {
        return Err(KbinError::InvalidArgument("households and days must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    struct Profile {
        base: f64,
        morning: f64,
        morning_at: f64,
        evening: f64,
        evening_at: f64,
        weekend: f64,
    }
    let profiles: Vec<Profile> = (0..households)
        .map(|_| Profile {
            base: rng.random_range(0.15..0.6),
            morning: rng.random_range(0.2..1.0),
            morning_at: rng.random_range(6.0..9.0),
            evening: rng.random_range(0.5..2.0),
            evening_at: rng.random_range(18.0..21.0),
            weekend: rng.random_range(0.9..1.25),
        })
        .collect();
    let hours = days * HOURS_PER_DAY;
    let mut rows = Vec::with_capacity(hours);
    for h in 0..hours {
        let hod = (h % HOURS_PER_DAY) as f64;
        let weekend = (h / HOURS_PER_DAY) % 7 >= 5;
        let row = profiles
            .iter()
            .map(|p| {
                let m = p.morning * (-(hod - p.morning_at).powi(2) / 2.0).exp();
                let e = p.evening * (-(hod - p.evening_at).powi(2) / 4.5).exp();
                let f = if weekend { p.weekend } else { 1.0 };
                let jitter: f64 = rng.random_range(0.85..1.15);
                kw_to_units((p.base + m + e) * f * jitter).max(10_000)
            })
            .collect();
        rows.push(row);
    }
    let ids = (0..households).map(|i| format!("h{i}")).collect();
    DemandSeries::new(ids, rows)
}

/// Gaussian demand noise, in kW or as a fraction of each demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "sd", rename_all = "lowercase")]
pub enum Noise {
    Absolute(f64),
    Relative(f64),
}

impl Noise {
    fn sd(self) -> f64 {
        match self {
            Noise::Absolute(s) | Noise::Relative(s) => s,
        }
    }
}

/// Treats each entry as the mean of a normal draw; results are clamped at
/// [`PERTURB_FLOOR`]. Zero noise returns the series unchanged.
pub fn perturb(series: &DemandSeries, noise: Noise, seed: u64) -> Result<DemandSeries> {
    let sd = noise.sd();
    if !sd.is_finite() || sd < 0.0 {
        return Err(KbinError::InvalidArgument(format!("standard deviation must be >= 0, got {sd}")));
    }
    if sd == 0.0 {
        return Ok(series.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let rows = series
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    let kw = v as f64 / UNITS_PER_KW as f64;
                    let scale = match noise {
                        Noise::Absolute(s) => s,
                        Noise::Relative(s) => s * kw,
                    };
                    let x = kw + scale * unit.sample(&mut rng);
                    if x <= 0.0 {
                        PERTURB_FLOOR
                    } else {
                        kw_to_units(x).max(PERTURB_FLOOR)
                    }
                })
                .collect()
        })
        .collect();
    Ok(DemandSeries { ids: series.ids.clone(), rows })
}

/// A day's supply per hour, `total / 24`, kept as the total so it stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supply {
    pub day_total: u64,
}

impl Supply {
    /// Supply of `units` every hour.
    pub fn hourly(units: u64) -> Self {
        Self { day_total: units * HOURS_PER_DAY as u64 }
    }

    pub fn per_hour(&self) -> Rational {
        ratio(self.day_total, HOURS_PER_DAY as u64)
    }

    pub fn kw(&self) -> f64 {
        self.day_total as f64 / (HOURS_PER_DAY as f64 * UNITS_PER_KW as f64)
    }
}

/// Mean over each day's 24 hourly total demands.
pub fn daily_supply(series: &DemandSeries) -> Result<Vec<Supply>> {
    if !series.hours().is_multiple_of(HOURS_PER_DAY) {
        return Err(KbinError::InvalidArgument(format!(
            "{} hours is not a whole number of days",
            series.hours()
        )));
    }
    Ok(series
        .rows
        .chunks(HOURS_PER_DAY)
        .map(|day| Supply { day_total: day.iter().flatten().sum() })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ffk,
    Ffdk,
}

impl Algo {
    pub fn label(self) -> &'static str {
        match self {
            Algo::Ffk => "FFk",
            Algo::Ffdk => "FFDk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HourSchedule {
    pub k: u32,
    pub q: usize,
    /// Agents connected together in each slice.
    pub bins: Vec<Vec<usize>>,
    /// Agents whose demand alone exceeds the supply; never connected.
    pub excluded: Vec<usize>,
}

impl HourSchedule {
    /// Share of the hour each packed agent is connected, `k/q`.
    pub fn connection(&self) -> Rational {
        if self.q == 0 {
            Rational::zero()
        } else {
            ratio(self.k, self.q as u64)
        }
    }

    pub fn slice(&self) -> Rational {
        if self.q == 0 {
            Rational::zero()
        } else {
            ratio(1, self.q as u64)
        }
    }

    pub fn is_excluded(&self, agent: usize) -> bool {
        self.excluded.binary_search(&agent).is_ok()
    }
}

pub fn schedule_hour(demands: &[u64], supply: Supply, k: u32, algo: Algo) -> Result<HourSchedule> {
    if k < 1 {
        return Err(KbinError::InvalidArgument("k must be at least 1".into()));
    }
    let cap = supply.day_total;
    let sizes: Vec<u64> = demands.iter().map(|&d| d * HOURS_PER_DAY as u64).collect();
    let (mut order, excluded): (Vec<usize>, Vec<usize>) = (0..sizes.len()).partition(|&i| sizes[i] <= cap);
    if algo == Algo::Ffdk {
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
    }
    let bins: Vec<Vec<usize>> = first_fit_rounds(&sizes, cap, &order, k)
        .into_iter()
        .map(|b| b.into_iter().map(|c| c.item).collect())
        .collect();
    Ok(HourSchedule { k, q: bins.len(), bins, excluded })
}

/// Raw comfort: mean of the same hour of the week over up to four earlier
/// weeks, or the current demand when there is no earlier week.
fn raw_comfort(series: &DemandSeries, hour: usize, agent: usize) -> f64 {
    let past: Vec<u64> = (1..=COMFORT_WEEKS)
        .filter_map(|w| hour.checked_sub(w * HOURS_PER_WEEK))
        .map(|h| series.rows[h][agent])
        .collect();
    if past.is_empty() {
        series.rows[hour][agent] as f64
    } else {
        past.iter().sum::<u64>() as f64 / past.len() as f64
    }
}

/// Comfort of every agent at every hour, each agent normalized by its own maximum.
pub fn comfort_matrix(series: &DemandSeries) -> Vec<Vec<f64>> {
    let (hours, n) = (series.hours(), series.agents());
    let mut m: Vec<Vec<f64>> =
        (0..hours).map(|h| (0..n).map(|i| raw_comfort(series, h, i)).collect()).collect();
    for i in 0..n {
        let top = m.iter().map(|r| r[i]).fold(0.0, f64::max);
        for row in m.iter_mut() {
            row[i] = if top > 0.0 { row[i] / top } else { 0.0 };
        }
    }
    m
}

pub fn comfort(series: &DemandSeries, hour: usize, agent: usize) -> f64 {
    let top = (0..series.hours()).map(|h| raw_comfort(series, h, agent)).fold(0.0, f64::max);
    if top > 0.0 {
        raw_comfort(series, hour, agent) / top
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sum: f64,
    pub avg: f64,
    pub egalitarian: f64,
    pub max_diff: f64,
}

impl Metrics {
    fn of(u: &[f64]) -> Self {
        let sum: f64 = u.iter().sum();
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { sum, avg: sum / u.len() as f64, egalitarian: min, max_diff: max - min }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMetrics {
    pub sum: Rational,
    pub avg: Rational,
    pub egalitarian: Rational,
    pub max_diff: Rational,
}

impl ExactMetrics {
    fn of(u: &[Rational]) -> Self {
        let sum: Rational = u.iter().sum();
        let min = u.iter().min().cloned().unwrap_or_else(Rational::zero);
        let max = u.iter().max().cloned().unwrap_or_else(Rational::zero);
        Self { avg: &sum / int(u.len() as u64), sum, max_diff: max - &min, egalitarian: min }
    }

    pub fn to_f64(&self) -> Metrics {
        Metrics {
            sum: rational_to_f64(&self.sum),
            avg: rational_to_f64(&self.avg),
            egalitarian: rational_to_f64(&self.egalitarian),
            max_diff: rational_to_f64(&self.max_diff),
        }
    }
}

/// Welfare of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Connected hours per agent, exact.
    pub connection: ExactMetrics,
    /// kWh received per agent.
    pub electricity: Metrics,
    /// Connection weighted by comfort.
    pub comfort: Metrics,
    /// Agent-hours lost to exclusion.
    pub excluded: usize,
}

/// `comfort` is [`comfort_matrix`] of `series`.
pub fn evaluate(schedules: &[HourSchedule], series: &DemandSeries, comfort: &[Vec<f64>]) -> Result<Outcome> {
    if schedules.len() != series.hours() || comfort.len() != series.hours() {
        return Err(KbinError::InvalidArgument("need one schedule and comfort row per hour".into()));
    }
    let n = series.agents();
    let mut slots: Vec<BTreeMap<(u32, usize), u64>> = vec![BTreeMap::new(); n];
    let mut elec = vec![0.0f64; n];
    let mut comf = vec![0.0f64; n];
    let mut excluded = 0;
    for (h, s) in schedules.iter().enumerate() {
        excluded += s.excluded.len();
        if s.q == 0 {
            continue;
        }
        let share = s.k as f64 / s.q as f64;
        for i in 0..n {
            if s.is_excluded(i) {
                continue;
            }
            *slots[i].entry((s.k, s.q)).or_insert(0) += 1;
            elec[i] += share * series.kw(h, i);
            comf[i] += share * comfort[h][i];
        }
    }
    let conn: Vec<Rational> = slots
        .iter()
        .map(|m| m.iter().map(|(&(k, q), &c)| ratio(c * k as u64, q as u64)).sum())
        .collect();
    Ok(Outcome {
        connection: ExactMetrics::of(&conn),
        electricity: Metrics::of(&elec),
        comfort: Metrics::of(&comf),
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub k: u32,
    pub algo: Algo,
    pub noise: Noise,
    pub repeats: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation across repeats; 0 for a single repeat.
    pub sd: f64,
}

impl Stat {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub utilitarian_sum: Stat,
    pub utilitarian_avg: Stat,
    pub egalitarian: Stat,
    pub max_utility_difference: Stat,
}

impl ModelReport {
    fn of(model: &str, runs: &[Metrics]) -> Self {
        let col = |f: fn(&Metrics) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
        Self {
            model: model.to_owned(),
            utilitarian_sum: col(|m| m.sum),
            utilitarian_avg: col(|m| m.avg),
            egalitarian: col(|m| m.egalitarian),
            max_utility_difference: col(|m| m.max_diff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub algorithm: String,
    pub k: u32,
    pub noise: Noise,
    pub repeats: usize,
    pub seed: u64,
    pub agents: usize,
    pub hours: usize,
    /// Excluded agent-hours, per repeat.
    pub excluded: Vec<usize>,
    pub models: Vec<ModelReport>,
}

pub const MODELS: [&str; 3] = ["connection_time", "electricity", "comfort"];

pub fn summarize(outcomes: &[Outcome], config: &SimConfig, series: &DemandSeries) -> WelfareReport {
    let conn: Vec<Metrics> = outcomes.iter().map(|o| o.connection.to_f64()).collect();
    let elec: Vec<Metrics> = outcomes.iter().map(|o| o.electricity).collect();
    let comf: Vec<Metrics> = outcomes.iter().map(|o| o.comfort).collect();
    WelfareReport {
        algorithm: config.algo.label().to_owned(),
        k: config.k,
        noise: config.noise,
        repeats: outcomes.len(),
        seed: config.seed,
        agents: series.agents(),
        hours: series.hours(),
        excluded: outcomes.iter().map(|o| o.excluded).collect(),
        models: vec![
            ModelReport::of(MODELS[0], &conn),
            ModelReport::of(MODELS[1], &elec),
            ModelReport::of(MODELS[2], &comf),
        ],
    }
}

pub struct Simulation {
    pub report: WelfareReport,
    pub outcomes: Vec<Outcome>,
    /// Bin count per hour, per repeat.
    pub q: Vec<Vec<usize>>,
}

/// Supply comes from the unperturbed series; each repeat perturbs it with its
/// own seed and schedules the hours in parallel.
pub fn simulate(base: &DemandSeries, config: &SimConfig) -> Result<Simulation> {
    if config.repeats < 1 {
        return Err(KbinError::InvalidArgument("repeats must be at least 1".into()));
    }
    if config.k < 1 {
        return Err(KbinError::InvalidArgument("k must be at least 1".into()));
    }
    let supply = daily_supply(base)?;
    let mut outcomes = Vec::with_capacity(config.repeats);
    let mut q = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let series = perturb(base, config.noise, derive_seed(config.seed, r as u64))?;
        let schedules = (0..series.hours())
            .into_par_iter()
            .map(|h| schedule_hour(&series.rows[h], supply[h / HOURS_PER_DAY], config.k, config.algo))
            .collect::<Result<Vec<_>>>()?;
        let comfort = comfort_matrix(&series);
        outcomes.push(evaluate(&schedules, &series, &comfort)?);
        q.push(schedules.iter().map(|s| s.q).collect());
    }
    let report = summarize(&outcomes, config, base);
    Ok(Simulation { report, outcomes, q })
}

fn with_sd(s: &Stat) -> String {
    format!("{:.4} ({:.4})", s.mean, s.sd)
}

/// One five-column CSV per utility model, in report order.
pub fn report_tables(report: &WelfareReport) -> Vec<(String, String)> {
    report
        .models
        .iter()
        .map(|m| {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "algorithm",
                "utilitarian_sum(sd)",
                "utilitarian_avg",
                "egalitarian(sd)",
                "max_utility_difference(sd)",
            ])
            .expect("in-memory write");
            w.write_record([
                report.algorithm.clone(),
                with_sd(&m.utilitarian_sum),
                format!("{:.4}", m.utilitarian_avg.mean),
                with_sd(&m.egalitarian),
                with_sd(&m.max_utility_difference),
            ])
            .expect("in-memory write");
            let bytes = w.into_inner().expect("in-memory flush");
            (m.model.clone(), String::from_utf8(bytes).expect("utf-8"))
        })
        .collect()
}
