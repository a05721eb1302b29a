use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use itertools::Itertools;
use serde::Serialize;

use crate::algorithms::{Algo, Precision};
use crate::allocation::primal_value;
use crate::dualfit::{arrival_from_z, RandomTape};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::offline_opt;
use crate::parallel::map_ordered;
use crate::rational::{self, serde_rational, Rational};

/// Largest item count enumerated in `all` mode.
pub const MAX_ENUMERATED_ITEMS: usize = 9;
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    /// The instance's own arrival order.
    Fixed,
    /// Every permutation, weighted uniformly.
    All,
    /// `n` orders from independent `Z` tapes.
    Sampled(usize),
}

impl fmt::Display for OrderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderMode::Fixed => f.write_str("fixed"),
            OrderMode::All => f.write_str("all"),
            OrderMode::Sampled(n) => write!(f, "sample:{n}"),
        }
    }
}

impl FromStr for OrderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(OrderMode::Fixed),
            "all" => Ok(OrderMode::All),
            _ => s
                .strip_prefix("sample:")
                .and_then(|n| n.parse().ok())
                .map(OrderMode::Sampled)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown order mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Ratios above `1 + ratio_tolerance` are reported as errors.
    pub ratio_tolerance: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { seed: 0, trials: 1000, ratio_tolerance: 1e-12, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub instance: String,
    pub algo: String,
    pub order_mode: String,
    /// Number of orders evaluated.
    pub trials: usize,
    #[serde(with = "serde_rational")]
    pub opt: Rational,
    pub mean_value: f64,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub std_err: f64,
    pub seed: Option<u64>,
}

pub const CSV_HEADER: [&str; 9] =
    ["instance", "algo", "order_mode", "trials", "opt", "mean_ratio", "min_ratio", "std_err", "seed"];

impl RatioReport {
    fn csv_record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            self.algo.clone(),
            self.order_mode.clone(),
            self.trials.to_string(),
            rational::format(&self.opt),
            self.mean_ratio.to_string(),
            self.min_ratio.to_string(),
            self.std_err.to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, reports: &[RatioReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

pub fn to_csv_string(reports: &[RatioReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, reports)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn value_on(inst: &Instance, algo: &Algo, order: &[usize], precision: Precision) -> Result<f64> {
    let (alloc, _) = algo.run_order(inst, order, precision)?;
    primal_value(inst, &alloc)
}

fn chunked(n: usize, f: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<Vec<f64>> {
    let parts = map_ordered(n.div_ceil(CHUNK), |c| -> Result<Vec<f64>> {
        (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).collect()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Competitive ratio of `algo` on `inst` against the exact offline optimum,
/// over the arrival orders selected by `mode`.
pub fn run_random_order(
    name: &str,
    inst: &Instance,
    algo: &Algo,
    mode: OrderMode,
    config: &ExperimentConfig,
) -> Result<RatioReport> {
    let m = inst.num_items();
    let values = match mode {
        OrderMode::Fixed => vec![value_on(inst, algo, inst.arrival(), Precision::Exact)?],
        OrderMode::All => {
            if m > MAX_ENUMERATED_ITEMS {
                return Err(Error::PermutationOverflow { items: m, limit: MAX_ENUMERATED_ITEMS });
            }
            let orders: Vec<Vec<usize>> = (0..m).permutations(m).collect();
            chunked(orders.len(), |t| value_on(inst, algo, &orders[t], Precision::Fast))?
        }
        OrderMode::Sampled(0) => return Err(Error::ZeroTrials),
        OrderMode::Sampled(n) => chunked(n, |t| {
            let tape = RandomTape::z(inst, config.seed, t as u64);
            value_on(inst, algo, &arrival_from_z(&tape.values), Precision::Fast)
        })?,
    };
    let (opt, _) = offline_opt(inst)?;
    let opt_f = rational::to_f64(&opt);
    let ratios: Vec<f64> = values.iter().map(|v| if opt_f > 0.0 { v / opt_f } else { 1.0 }).collect();
    if let Some(r) = ratios.iter().find(|&&r| r > 1.0 + config.ratio_tolerance) {
        return Err(Error::InfeasibleAllocation(format!("{name}: ratio {r} exceeds 1")));
    }
    let n = ratios.len() as f64;
    let mean_ratio = ratios.iter().sum::<f64>() / n;
    let std_err = match mode {
        OrderMode::Sampled(k) if k > 1 => {
            let var = ratios.iter().map(|r| (r - mean_ratio).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        }
        _ => 0.0,
    };
    Ok(RatioReport {
        instance: name.into(),
        algo: algo.name().into(),
        order_mode: mode.to_string(),
        trials: values.len(),
        opt,
        mean_value: values.iter().sum::<f64>() / n,
        mean_ratio,
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        std_err,
        seed: matches!(mode, OrderMode::Sampled(_)).then_some(config.seed),
    })
}
