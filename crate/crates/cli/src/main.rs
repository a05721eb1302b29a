//! `onalloc`: run allocation algorithms, certify their dual solutions and
//! measure competitive ratios from the command line.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 a requested check failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use onalloc_core::algorithms::Priorities;
use onalloc_core::gfunc::g_exponential;
use onalloc_core::harness::{gen_family, run_random_order, to_csv_string, ExperimentConfig, Family, OrderMode};
use onalloc_core::lp::{factor_revealing_lp, offline_opt};
use onalloc_core::ongap::{adversary_check, ongap_derandomized, ongap_derandomized_with_buckets, ongap_randomized};
use onalloc_core::rational;
use onalloc_core::{check_certificate, primal_value, Algo, Builder, Error, Instance, Precision, TiePolicy};

#[derive(Parser)]
#[command(name = "onalloc", version, about = "Online allocation algorithms with dual-fitting certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoName {
    WaterFilling,
    VirtualWf,
    Greedy,
    IGreedy,
    Ranking,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct AlgoArgs {
    #[arg(long, value_enum)]
    algo: AlgoName,
    /// `global` (buyer index order), `global:SEED` or `per-item:SEED`.
    #[arg(long, default_value = "global")]
    tie: String,
    /// Seeds ranking priorities and random tapes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on the instance's own arrival order.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Exact offline optimum of the LP relaxation.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Build a dual solution and check its certificate.
    Dual {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        builder: Builder,
        /// Defaults to the algorithm the builder certifies.
        #[arg(long, value_enum)]
        algo: Option<AlgoName>,
        #[arg(long, default_value = "global")]
        tie: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Competitive ratio over arrival orders.
    Ratio {
        /// May be repeated; one report row per instance.
        #[arg(long, required = true)]
        instance: Vec<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, default_value = "fixed")]
        order: OrderMode,
        #[command(flatten)]
        output: Output,
    },
    /// Generate an instance, e.g. `--family triangular:5`.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the factor-revealing LP of the k-bundle hard family.
    Frlp {
        #[arg(long)]
        k: usize,
    },
    /// Generalized assignment through the bucketing wrapper, or the
    /// adversary check on the hard family with `--adversary K`.
    Ongap {
        #[arg(long, required_unless_present = "adversary")]
        instance: Option<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Sample one bucket from `--seed` instead of averaging all.
        #[arg(long)]
        randomized: bool,
        #[arg(long, conflicts_with = "instance")]
        adversary: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
}

/// A report was produced but its check did not hold.
struct CheckFailed;

type Status = Result<(), CheckFailed>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CheckFailed)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let check = matches!(e.downcast_ref::<Error>(), Some(Error::InfeasibleAllocation(_)));
            ExitCode::from(if check { 2 } else { 1 })
        }
    }
}

fn execute(command: Command) -> anyhow::Result<Status> {
    match command {
        Command::Run { instance, algo, output } => {
            let inst = load(&instance)?;
            let a = build_algo(&inst, algo.algo, &algo.tie, algo.seed)?;
            let (alloc, _) = a.run(&inst, Precision::Exact)?;
            alloc.check_feasible(&inst)?;
            let edges: Vec<_> = inst
                .edges()
                .iter()
                .zip(alloc.x())
                .filter(|(_, &x)| x > 0.0)
                .map(|(e, x)| json!({"buyer": inst.buyers()[e.buyer].id, "item": inst.items()[e.item].id, "x": x}))
                .collect();
            let report = json!({
                "instance": stem(&instance),
                "algo": a.name(),
                "value": primal_value(&inst, &alloc)?,
                "levels": alloc.normalized_levels(&inst),
                "allocation": edges,
            });
            emit_json(&output, &report)?;
            Ok(Ok(()))
        }
        Command::Opt { instance, output } => {
            let inst = load(&instance)?;
            let (opt, alloc) = offline_opt(&inst)?;
            let report = json!({
                "instance": stem(&instance),
                "opt": rational::format(&opt),
                "opt_f64": rational::to_f64(&opt),
                "x": alloc.x(),
            });
            emit_json(&output, &report)?;
            Ok(Ok(()))
        }
        Command::Dual { instance, builder, algo, tie, seed, trials, output } => {
            let inst = load(&instance)?;
            let name = algo.unwrap_or(match builder {
                Builder::WfWorst | Builder::BoundedDegree => AlgoName::WaterFilling,
                Builder::VwfWorst => AlgoName::VirtualWf,
                Builder::RandomOrder => AlgoName::Greedy,
                Builder::IGreedy => AlgoName::IGreedy,
            });
            let a = build_algo(&inst, name, &tie, seed)?;
            let report = check_certificate(&inst, &a, builder, trials, seed, &g_exponential())?;
            reject_csv(&output)?;
            write(&output, &report.to_json())?;
            Ok(if report.pass() { Ok(()) } else { Err(CheckFailed) })
        }
        Command::Ratio { instance, algo, order, output } => {
            let config = ExperimentConfig { seed: algo.seed, out: output.out.clone(), ..Default::default() };
            let mut reports = Vec::with_capacity(instance.len());
            for path in &instance {
                let inst = load(path)?;
                let a = build_algo(&inst, algo.algo, &algo.tie, algo.seed)?;
                reports.push(run_random_order(&stem(path), &inst, &a, order, &config)?);
            }
            let text = match output.format {
                Format::Csv => to_csv_string(&reports)?,
                Format::Json => serde_json::to_string_pretty(&reports)?,
            };
            write(&output, &text)?;
            Ok(Ok(()))
        }
        Command::Gen { family, seed, out } => {
            let inst = gen_family(&family, seed)?;
            write(&Output { format: Format::Json, out }, &inst.to_json())?;
            Ok(Ok(()))
        }
        Command::Frlp { k } => {
            let fr = factor_revealing_lp(k)?;
            let c: Vec<String> = fr.c.iter().map(rational::format).collect();
            println!("alpha_star={}", rational::format(&fr.alpha_star));
            println!("c={}", c.join(","));
            Ok(Ok(()))
        }
        Command::Ongap { instance, algo, randomized, adversary, output } => {
            if let Some(k) = adversary {
                let probe = gen_family(&Family::OngapHard { k }, 0)?;
                let inner = build_algo(&probe, algo.algo, &algo.tie, algo.seed)?;
                // The wrapper is told the full family's k buckets up front.
                let report = adversary_check(k, |inst| ongap_derandomized_with_buckets(inst, &inner, k).map(|r| r.alloc))?;
                emit_json(&output, &serde_json::to_value(&report)?)?;
                // No online algorithm beats the factor-revealing optimum.
                let pass = report.min_ratio <= report.alpha_star + 1e-9;
                return Ok(if pass { Ok(()) } else { Err(CheckFailed) });
            }
            let path = instance.expect("clap requires --instance without --adversary");
            let inst = load(&path)?;
            let inner = build_algo(&inst, algo.algo, &algo.tie, algo.seed)?;
            let report = if randomized {
                let (alloc, bucket) = ongap_randomized(&inst, &inner, algo.seed)?;
                json!({
                    "instance": stem(&path),
                    "inner": inner.name(),
                    "bucket": bucket,
                    "value": primal_value(&inst, &alloc)?,
                })
            } else {
                let run = ongap_derandomized(&inst, &inner)?;
                json!({
                    "instance": stem(&path),
                    "inner": inner.name(),
                    "bucket_values": run.bucket_values,
                    "value": run.value,
                })
            };
            emit_json(&output, &report)?;
            Ok(Ok(()))
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = Instance::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
    for w in inst.warnings() {
        eprintln!("warning: {}: {w:?}", path.display());
    }
    Ok(inst)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn parse_tie(inst: &Instance, tie: &str) -> anyhow::Result<TiePolicy> {
    let seed = |s: &str| s.parse::<u64>().with_context(|| format!("bad seed in --tie {tie}"));
    Ok(match tie.split_once(':') {
        None if tie == "global" => TiePolicy::ByIndex,
        Some(("global", s)) => TiePolicy::global_seeded(inst, seed(s)?),
        Some(("per-item", s)) => TiePolicy::per_item_seeded(inst, seed(s)?),
        _ => bail!("unknown tie policy `{tie}` (expected global, global:SEED or per-item:SEED)"),
    })
}

fn build_algo(inst: &Instance, name: AlgoName, tie: &str, seed: u64) -> anyhow::Result<Algo> {
    let tie = parse_tie(inst, tie)?;
    Ok(match name {
        AlgoName::WaterFilling => Algo::WaterFilling,
        AlgoName::VirtualWf => Algo::VirtualWaterFilling(g_exponential()),
        AlgoName::Greedy => Algo::Greedy(tie),
        AlgoName::IGreedy => Algo::IGreedy(tie),
        AlgoName::Ranking => Algo::Ranking(Priorities::from_seed(inst.num_buyers(), seed)),
    })
}

fn reject_csv(output: &Output) -> anyhow::Result<()> {
    if output.format == Format::Csv {
        bail!("--format csv is only available for `ratio`");
    }
    Ok(())
}

fn emit_json(output: &Output, value: &serde_json::Value) -> anyhow::Result<()> {
    reject_csv(output)?;
    write(output, &serde_json::to_string_pretty(value)?)
}

fn write(output: &Output, text: &str) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
