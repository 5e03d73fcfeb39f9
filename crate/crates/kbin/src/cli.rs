//! Argument parsing and subcommand dispatch for the `kbin` binary.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use kbin_core::configlp::{
    dlvl_bound, dlvl_kbp, kk1_bound, kk1_kbp, kk2_default_eps, kk2_iteration_bound, kk2_kbp, SchemeOutput,
};
use kbin_core::exact::{opt_kbp, DEFAULT_BUDGET};
use kbin_core::gen::{
    ffd_lower_instance, generate_instance, johnson_ff_instance, nf_lower_instance, ratio1375_instance,
};
use kbin_core::kopt::find_optimal_k;
use kbin_core::model::int;
use kbin_core::{validate, Instance, KPacking, Rational};
use serde_json::{json, Value};

use crate::bench::{run_bench, Heuristic, Suite};
use crate::electricity::{self, Algo, Noise, SimConfig};
use crate::formats::{
    instance_to_value, packing_to_value, parse_rational, rational_json, rational_string, read_instance,
    write_packing_csv,
};

#[derive(Debug, Parser)]
#[command(name = "kbin", version, about = "k-times bin packing solvers and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Dlvl,
    Kk1,
    Kk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Random,
    Johnson,
    Ratio1375,
    FfdLower,
    NfLower,
    /// Synthetic household demand CSV.
    Demands,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pack with a heuristic; the summary line goes to stderr.
    Pack {
        #[arg(long, value_enum)]
        algo: Heuristic,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Minimum bin count by exhaustive search.
    Exact {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Configuration-LP approximation schemes.
    Lp {
        #[arg(long, value_enum)]
        algo: Scheme,
        #[arg(long)]
        k: u32,
        /// `p/q` or a decimal; kk2 defaults to min(1/2, S/V).
        #[arg(long)]
        eps: Option<String>,
        /// Group volume factor for kk2.
        #[arg(long, default_value_t = 2)]
        g: u32,
        #[arg(long)]
        instance: PathBuf,
        /// Node budget for the optimum used in the bound report.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// r_max and the smallest k reaching it.
    Kopt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        kmax: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Simulate hourly electricity sharing and report welfare.
    Schedule {
        #[arg(long, conflicts_with = "households")]
        demands: Option<PathBuf>,
        /// Use synthetic demands for this many households instead of a file.
        #[arg(long, requires = "days")]
        households: Option<usize>,
        #[arg(long)]
        days: Option<usize>,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "ffdk")]
        algo: Algo,
        /// Demand noise in kW (or a fraction with --relative).
        #[arg(long, default_value_t = 0.05)]
        sd: f64,
        #[arg(long)]
        relative: bool,
        #[arg(long, default_value_t = 9)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write one CSV table per utility model into this directory.
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Generate instances.
    Gen {
        #[arg(long, value_enum)]
        mode: GenMode,
        #[arg(long = "S", alias = "capacity", default_value_t = 100)]
        capacity: u64,
        #[arg(long, default_value_t = 2)]
        opt: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1/1000")]
        delta: String,
        #[arg(long, default_value_t = 10)]
        y: u32,
        #[arg(long, default_value = "1/20")]
        eps: String,
        #[arg(long, default_value_t = 10)]
        households: usize,
        #[arg(long, default_value_t = 7)]
        days: usize,
        /// Write the generating bins of a random instance here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Known-optimum benchmark of the heuristics.
    Bench {
        /// JSON suite file; overrides the grid flags.
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long = "S", alias = "capacity", default_value_t = 100)]
        capacity: u64,
        /// Range `a..b` (inclusive) or list `a,b,c`.
        #[arg(long, default_value = "2..9")]
        opt: String,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value = "2..5")]
        k: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "ffk,ffdk,nfk")]
        algos: Vec<Heuristic>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit with status 2 when a proven bound is violated.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

impl ValueEnum for Algo {
    fn value_variants<'a>() -> &'a [Self] {
        &[Algo::Ffk, Algo::Ffdk]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Algo::Ffk => "ffk",
            Algo::Ffdk => "ffdk",
        }))
    }
}

/// `a..b` inclusive, or a comma list.
pub fn parse_list(text: &str) -> anyhow::Result<Vec<u32>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().with_context(|| format!("bad range {text}"))?;
        let b: u32 = b.trim().parse().with_context(|| format!("bad range {text}"))?;
        return Ok((a..=b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad number {s}")))
        .collect()
}

fn emit_json(out: &mut dyn Write, v: &Value) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn emit_packing(out: &mut dyn Write, p: &KPacking, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Json => emit_json(out, &packing_to_value(p)),
        Format::Csv => Ok(write_packing_csv(p, out)?),
    }
}

fn ensure_valid(inst: &Instance, p: &KPacking) -> anyhow::Result<()> {
    let v = validate(inst, p);
    if !v.is_empty() {
        bail!("internal error: invalid packing {v:?}");
    }
    Ok(())
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Command::Pack { algo, k, instance, format } => {
            let inst = read_instance(&instance)?;
            let p = algo.run(&inst, k)?;
            ensure_valid(&inst, &p)?;
            emit_packing(out, &p, format)?;
            writeln!(err, "bins={} lower_bound={}", p.len(), inst.volume_bound(k))?;
        }
        Command::Exact { k, instance, budget, format } => {
            let inst = read_instance(&instance)?;
            let r = opt_kbp(&inst, k, budget)?;
            match format {
                Format::Json => emit_json(
                    out,
                    &json!({"count": r.count, "proven": r.proven, "packing": packing_to_value(&r.packing)}),
                )?,
                Format::Csv => emit_packing(out, &r.packing, format)?,
            }
            writeln!(err, "count={} proven={}", r.count, r.proven)?;
        }
        Command::Lp { algo, k, eps, g, instance, budget, format } => {
            let inst = read_instance(&instance)?;
            lp_command(&inst, algo, k, eps.as_deref(), g, budget, format, out, err)?;
        }
        Command::Kopt { instance, kmax, budget, format } => {
            let inst = read_instance(&instance)?;
            let t = find_optimal_k(&inst, kmax, budget)?;
            match format {
                Format::Json => {
                    let rows: Vec<Value> = t
                        .rows
                        .iter()
                        .map(|r| {
                            json!({"k": r.k, "opt": r.opt, "fraction": rational_string(&r.fraction), "proven": r.proven})
                        })
                        .collect();
                    emit_json(
                        out,
                        &json!({
                            "r_max": rational_string(&t.r_max),
                            "k_star": t.k_star,
                            "inconclusive": t.inconclusive,
                            "rows": rows,
                        }),
                    )?;
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["k", "opt", "fraction", "proven"])?;
                    for r in &t.rows {
                        w.write_record([
                            r.k.to_string(),
                            r.opt.to_string(),
                            rational_string(&r.fraction),
                            r.proven.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            let k_star = t.k_star.map_or("none".to_owned(), |k| k.to_string());
            writeln!(err, "r_max={} k_star={}", rational_string(&t.r_max), k_star)?;
        }
        Command::Schedule {
            demands,
            households,
            days,
            k,
            algo,
            sd,
            relative,
            repeats,
            seed,
            tables,
            format,
        } => {
            let base = match (demands, households) {
                (Some(path), _) => electricity::load_demands(&path)?,
                (None, Some(n)) => electricity::synth_demands(n, days.unwrap_or(1), seed)?,
                (None, None) => bail!("give --demands FILE or --households N --days D"),
            };
            let noise = if relative { Noise::Relative(sd) } else { Noise::Absolute(sd) };
            let config = SimConfig { k, algo, noise, repeats, seed };
            let sim = electricity::simulate(&base, &config)?;
            let tabs = electricity::report_tables(&sim.report);
            if let Some(dir) = tables {
                std::fs::create_dir_all(&dir)?;
                for (model, text) in &tabs {
                    std::fs::write(dir.join(format!("{model}.csv")), text)?;
                }
            }
            match format {
                Format::Json => emit_json(out, &serde_json::to_value(&sim.report)?)?,
                Format::Csv => {
                    for (i, (model, text)) in tabs.iter().enumerate() {
                        if i > 0 {
                            writeln!(out)?;
                        }
                        writeln!(out, "# {model}")?;
                        out.write_all(text.as_bytes())?;
                    }
                }
            }
            let excluded: usize = sim.report.excluded.iter().sum();
            writeln!(err, "hours={} agents={} excluded_agent_hours={}", base.hours(), base.agents(), excluded)?;
        }
        Command::Gen { mode, capacity, opt, seed, delta, y, eps, households, days, certificate, format } => {
            let inst = match mode {
                GenMode::Demands => {
                    let s = electricity::synth_demands(households, days, seed)?;
                    electricity::write_demands(&s, &mut *out)?;
                    return Ok(0);
                }
                GenMode::Random => {
                    let g = generate_instance(capacity, opt, seed)?;
                    if let Some(path) = certificate {
                        std::fs::write(&path, serde_json::to_string_pretty(&g.certificate)? + "\n")?;
                    }
                    g.instance
                }
                GenMode::Johnson => johnson_ff_instance(),
                GenMode::Ratio1375 => ratio1375_instance(),
                GenMode::FfdLower => ffd_lower_instance(&parse_rational(&delta)?)?,
                GenMode::NfLower => nf_lower_instance(y, &parse_rational(&eps)?)?,
            };
            match format {
                Format::Json => emit_json(out, &instance_to_value(&inst))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["item", "size"])?;
                    for i in 0..inst.len() {
                        w.write_record([i.to_string(), rational_string(&inst.real_size(i))])?;
                    }
                    w.flush()?;
                    writeln!(err, "capacity={}", rational_string(&inst.real_capacity()))?;
                }
            }
        }
        Command::Bench { suite, capacity, opt, instances, k, algos, seed, strict, format } => {
            let suite = match suite {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(&path)?)
                    .with_context(|| format!("reading suite {}", path.display()))?,
                None => Suite { capacity, opts: parse_list(&opt)?, instances, ks: parse_list(&k)?, algorithms: algos, seed },
            };
            let report = run_bench(&suite)?;
            match format {
                Format::Csv => out.write_all(report.to_csv()?.as_bytes())?,
                Format::Json => emit_json(out, &serde_json::to_value(&report)?)?,
            }
            let theorem = report.theorem_violations();
            writeln!(
                err,
                "cells={} theorem_violations={} conjecture_violations={} failures={}",
                report.cells.len(),
                theorem,
                report.conjecture_violations(),
                report.failures()
            )?;
            if strict && theorem > 0 {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn lp_command(
    inst: &Instance,
    algo: Scheme,
    k: u32,
    eps: Option<&str>,
    g: u32,
    budget: u64,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<()> {
    let eps: Rational = match (eps, algo) {
        (Some(text), _) => parse_rational(text)?,
        (None, Scheme::Kk2) => kk2_default_eps(inst),
        (None, _) => bail!("--eps is required for {algo:?}"),
    };
    let SchemeOutput { packing, report } = match algo {
        Scheme::Dlvl => dlvl_kbp(inst, k, &eps)?,
        Scheme::Kk1 => kk1_kbp(inst, k, &eps)?,
        Scheme::Kk2 => kk2_kbp(inst, k, &eps, g)?,
    };
    ensure_valid(inst, &packing)?;
    let exact = opt_kbp(inst, k, budget)?;
    let reference = if exact.proven { exact.count as u64 } else { inst.lower_bound(k) as u64 };
    // bounds are stated for OPT(D_k) directly
    let bins = int(packing.len() as u64);
    let (bound, satisfied): (Option<Rational>, bool) = match algo {
        Scheme::Dlvl => {
            let b = dlvl_bound(reference, k, &eps);
            let ok = bins <= b;
            (Some(b), ok)
        }
        Scheme::Kk1 => {
            let b = kk1_bound(reference, k, &eps);
            let ok = bins <= b;
            (Some(b), ok)
        }
        Scheme::Kk2 => (None, (report.iterations as f64) <= kk2_iteration_bound(inst, g)),
    };
    let iteration_bound = match algo {
        Scheme::Kk2 => json!(kk2_iteration_bound(inst, g)),
        _ => Value::Null,
    };
    let summary = json!({
        "bins": packing.len(),
        "opt_or_lower_bound": reference,
        "opt_proven": exact.proven,
        "theorem_bound": bound.as_ref().map(rational_json),
        "satisfied": satisfied,
        "eps": rational_string(&eps),
        "lin": report.lin.as_ref().map(rational_string),
        "search_proven": report.proven,
        "iterations": report.iterations,
        "iteration_bound": iteration_bound,
    });
    match format {
        Format::Json => emit_json(out, &json!({"packing": packing_to_value(&packing), "report": summary}))?,
        Format::Csv => {
            emit_packing(out, &packing, format)?;
            writeln!(err, "{summary}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_list("1,4, 9").unwrap(), vec![1, 4, 9]);
        assert!(parse_list("a..3").is_err());
        assert!(parse_list("").unwrap().is_empty());
    }

    #[test]
    fn arguments_parse() {
        let c = Cli::try_parse_from(["kbin", "pack", "--algo", "ffdk", "--k", "2", "--instance", "x.json"]).unwrap();
        assert!(matches!(c.command, Command::Pack { algo: Heuristic::Ffdk, k: 2, .. }));
        let c = Cli::try_parse_from(["kbin", "gen", "--mode", "random", "--S", "50", "--opt", "3"]).unwrap();
        assert!(matches!(c.command, Command::Gen { capacity: 50, opt: 3, .. }));
        let c = Cli::try_parse_from(["kbin", "bench", "--algos", "ffk,nfk"]).unwrap();
        match c.command {
            Command::Bench { algos, .. } => assert_eq!(algos, vec![Heuristic::Ffk, Heuristic::Nfk]),
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["kbin", "pack", "--algo", "bf"]).is_err());
    }
}
