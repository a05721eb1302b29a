use serde::Serialize;

use crate::algorithms::{Algo, Precision, Priorities};
use crate::error::{Error, Result};
use crate::gfunc::GFunction;
use crate::instance::Instance;
use crate::parallel::map_ordered;

use super::builders::{
    build_dual_bounded_degree, build_dual_igreedy, build_dual_random_order, build_dual_wf_worst, worst_case,
    worst_case_expected,
};
use super::{arrival_from_z, Builder, DualSolution, ExpectationMode, RandomTape};

/// Allowed shortfall of a closed-form expectation below its requirement.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Allowed shortfall of a deterministic (per-realization) check.
pub const DETERMINISTIC_TOL: f64 = 1e-12;
/// Monte Carlo verdicts allow `mean >= required - SE_MULTIPLIER * se`.
pub const SE_MULTIPLIER: f64 = 3.0;
/// Tapes used to measure the property-1 residual of closed-form builders.
const RESIDUAL_TAPES: usize = 64;
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeVerdict {
    pub buyer: String,
    pub item: String,
    /// Mean (or exact expectation) of the constraint LHS `w α_i + β_j`.
    pub mean_slack: f64,
    pub se: f64,
    pub required: f64,
    pub pass: bool,
}

/// `dual <= primal/F - g'(0)/(2dF) Σ (Δp)²` for the deterministic
/// bounded-degree dual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band1 {
    pub degree: usize,
    pub dual: f64,
    pub primal: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `E[dual] <= factor · E[primal]` checked on the paired difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveBound {
    pub factor: f64,
    pub mean_dual: f64,
    pub mean_primal: f64,
    pub se: f64,
    pub pass: bool,
    /// Realizations with `dual > factor · primal`; informational.
    pub realization_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub builder: String,
    pub algo: String,
    #[serde(rename = "F")]
    pub f: f64,
    pub mode: ExpectationMode,
    /// Largest `|dual - primal|` over the realizations examined; absent for
    /// builders that do not balance the primal.
    pub property1_residual: Option<f64>,
    /// Realized `β_j < 0` occurrences (allowed; only expectations count).
    pub negative_beta: usize,
    pub edges: Vec<EdgeVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band1: Option<Band1>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_bound: Option<ObjectiveBound>,
}

impl FeasibilityReport {
    pub fn edges_pass(&self) -> bool {
        self.edges.iter().all(|e| e.pass)
    }

    /// Every edge verdict and every attached inequality holds.
    pub fn pass(&self) -> bool {
        self.edges_pass()
            && self.band1.as_ref().is_none_or(|b| b.pass)
            && self.objective_bound.as_ref().is_none_or(|b| b.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One Monte Carlo realization.
struct Sample {
    lhs: Vec<f64>,
    residual: f64,
    negative: usize,
    dual: f64,
    primal: f64,
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
    residual: f64,
    negative: usize,
    gap_sum: f64,
    gap_sq: f64,
    dual: f64,
    primal: f64,
    violations: usize,
}

impl Moments {
    fn add(&mut self, s: Sample, factor: f64) {
        if self.sum.is_empty() {
            self.sum = vec![0.0; s.lhs.len()];
            self.sq = vec![0.0; s.lhs.len()];
        }
        for (k, v) in s.lhs.iter().enumerate() {
            self.sum[k] += v;
            self.sq[k] += v * v;
        }
        self.n += 1;
        self.residual = self.residual.max(s.residual);
        self.negative += s.negative;
        let gap = s.dual - factor * s.primal;
        self.gap_sum += gap;
        self.gap_sq += gap * gap;
        self.dual += s.dual;
        self.primal += s.primal;
        if gap > DETERMINISTIC_TOL {
            self.violations += 1;
        }
    }

    fn merge(&mut self, other: Moments) {
        if self.n == 0 {
            *self = other;
            return;
        }
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sq[k] += other.sq[k];
        }
        self.n += other.n;
        self.residual = self.residual.max(other.residual);
        self.negative += other.negative;
        self.gap_sum += other.gap_sum;
        self.gap_sq += other.gap_sq;
        self.dual += other.dual;
        self.primal += other.primal;
        self.violations += other.violations;
    }
}

fn mean_se(sum: f64, sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn monte_carlo<F>(inst: &Instance, trials: usize, factor: f64, sample: F) -> Result<Moments>
where
    F: Fn(u64) -> Result<Sample> + Sync + Send,
{
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let chunks = trials.div_ceil(CHUNK);
    let parts = map_ordered(chunks, |c| -> Result<Moments> {
        let mut m = Moments::default();
        for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            m.add(sample(t as u64)?, factor);
        }
        Ok(m)
    });
    let mut total = Moments::default();
    for p in parts {
        total.merge(p?);
    }
    if total.sum.is_empty() {
        total.sum = vec![0.0; inst.num_edges()];
        total.sq = vec![0.0; inst.num_edges()];
    }
    Ok(total)
}

fn realization(inst: &Instance, d: &DualSolution, primal: f64, balanced: f64) -> Sample {
    let dual = d.objective(inst);
    Sample {
        lhs: (0..inst.num_edges()).map(|k| d.lhs(inst, k)).collect(),
        residual: (dual - balanced - primal).abs(),
        negative: d.negative_beta().len(),
        dual,
        primal,
    }
}

fn verdicts(inst: &Instance, means: &[(f64, f64)], required: impl Fn(usize) -> f64, tol: impl Fn(f64) -> f64) -> Vec<EdgeVerdict> {
    inst.edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (mean, se) = means[k];
            let req = required(k);
            EdgeVerdict {
                buyer: inst.buyers()[e.buyer].id.clone(),
                item: inst.items()[e.item].id.clone(),
                mean_slack: mean,
                se,
                required: req,
                pass: mean >= req - tol(se),
            }
        })
        .collect()
}

fn incompatible(builder: Builder, algo: &Algo) -> Error {
    Error::IncompatibleBuilder { builder: builder.name().into(), algo: algo.name().into() }
}

/// Checks the dual-fitting certificate of `builder` for `algo` on `inst`.
///
/// Closed-form builders (wf-worst on water-filling, vwf-worst) use exact
/// expectations over `U`; random-order, igreedy and wf-worst on RANKING
/// sample `trials` tapes from `(seed, trial)`; bounded-degree is
/// deterministic. Each edge passes when the expected LHS reaches `F · b_ij`
/// (`b_ij` for bounded-degree) within the mode's tolerance.
pub fn check_certificate(
    inst: &Instance,
    algo: &Algo,
    builder: Builder,
    trials: usize,
    seed: u64,
    g: &GFunction,
) -> Result<FeasibilityReport> {
    let f = g.factor();
    let scaled = |k: usize| f * inst.bid_f64(k);
    let mut report = FeasibilityReport {
        builder: builder.name().into(),
        algo: algo.name().into(),
        f,
        mode: ExpectationMode::ClosedForm,
        property1_residual: None,
        negative_beta: 0,
        edges: Vec::new(),
        band1: None,
        objective_bound: None,
    };
    let mc = |m: &Moments| -> Vec<(f64, f64)> {
        (0..m.sum.len()).map(|k| mean_se(m.sum[k], m.sq[k], m.n)).collect()
    };
    let mc_tol = |se: f64| SE_MULTIPLIER * se + DETERMINISTIC_TOL;

    match (builder, algo) {
        (Builder::WfWorst, Algo::WaterFilling) | (Builder::VwfWorst, Algo::VirtualWaterFilling(_)) => {
            let precision = if builder == Builder::WfWorst { Precision::Exact } else { Precision::Fast };
            let (_, trace) = algo.run(inst, precision)?;
            let expected = worst_case_expected(inst, &trace, g);
            let mut residual: f64 = 0.0;
            for t in 0..trials.clamp(1, RESIDUAL_TAPES) {
                let d = worst_case(inst, &trace, &RandomTape::u(inst, seed, t as u64), g)?;
                residual = residual.max((d.objective(inst) - trace.primal()).abs());
                report.negative_beta += d.negative_beta().len();
            }
            report.property1_residual = Some(residual);
            let means: Vec<_> = expected.edges.iter().map(|e| (e.mean_lhs, 0.0)).collect();
            report.edges = verdicts(inst, &means, scaled, |_| CLOSED_FORM_TOL);
        }
        (Builder::WfWorst, Algo::Ranking(_)) => {
            let m = monte_carlo(inst, trials, 1.0, |t| {
                let tape = RandomTape::u(inst, seed, t);
                let algo = Algo::Ranking(Priorities::from_values(&tape.values));
                let (_, trace) = algo.run(inst, Precision::Fast)?;
                let d = build_dual_wf_worst(inst, &trace, &tape, g)?;
                Ok(realization(inst, &d, trace.primal(), 0.0))
            })?;
            report.mode = ExpectationMode::MonteCarlo { trials, seed };
            report.property1_residual = Some(m.residual);
            report.negative_beta = m.negative;
            report.edges = verdicts(inst, &mc(&m), scaled, mc_tol);
        }
        (Builder::RandomOrder, Algo::Greedy(_)) => {
            let m = monte_carlo(inst, trials, 1.0, |t| {
                let tape = RandomTape::z(inst, seed, t);
                let (_, trace) = algo.run_order(inst, &arrival_from_z(&tape.values), Precision::Fast)?;
                let d = build_dual_random_order(inst, &trace, &tape, g)?;
                Ok(realization(inst, &d, trace.primal(), 0.0))
            })?;
            report.mode = ExpectationMode::MonteCarlo { trials, seed };
            report.property1_residual = Some(m.residual);
            report.negative_beta = m.negative;
            report.edges = verdicts(inst, &mc(&m), scaled, mc_tol);
        }
        (Builder::IGreedy, Algo::IGreedy(policy)) => {
            let factor = 1.0 + inst.max_bid_budget_ratio();
            let m = monte_carlo(inst, trials, factor, |t| {
                let r = build_dual_igreedy(inst, &RandomTape::z(inst, seed, t), g, policy)?;
                Ok(realization(inst, &r.dual, r.primal, r.skipped_mass))
            })?;
            report.mode = ExpectationMode::MonteCarlo { trials, seed };
            report.property1_residual = Some(m.residual);
            report.negative_beta = m.negative;
            report.edges = verdicts(inst, &mc(&m), scaled, mc_tol);
            let (gap, se) = mean_se(m.gap_sum, m.gap_sq, m.n);
            report.objective_bound = Some(ObjectiveBound {
                factor,
                mean_dual: m.dual / m.n as f64,
                mean_primal: m.primal / m.n as f64,
                se,
                pass: gap <= SE_MULTIPLIER * se + DETERMINISTIC_TOL,
                realization_violations: m.violations,
            });
        }
        (Builder::BoundedDegree, Algo::WaterFilling) => {
            let (_, trace) = algo.run(inst, Precision::Exact)?;
            let bd = build_dual_bounded_degree(inst, &trace, g)?;
            let means: Vec<_> = (0..inst.num_edges()).map(|k| (bd.dual.lhs(inst, k), 0.0)).collect();
            report.edges = verdicts(inst, &means, |k| inst.bid_f64(k), |_| DETERMINISTIC_TOL);
            report.negative_beta = bd.dual.negative_beta().len();
            let dual = bd.dual.objective(inst);
            let bound = bd.band1_bound(g);
            report.band1 = Some(Band1 {
                degree: bd.degree,
                dual,
                primal: bd.primal,
                bound,
                pass: dual <= bound + DETERMINISTIC_TOL,
            });
        }
        _ => return Err(incompatible(builder, algo)),
    }
    Ok(report)
}

/// Builders that can certify `algo`.
pub fn compatible_builders(algo: &Algo) -> Vec<Builder> {
    match algo {
        Algo::WaterFilling => vec![Builder::WfWorst, Builder::BoundedDegree],
        Algo::VirtualWaterFilling(_) => vec![Builder::VwfWorst],
        Algo::Greedy(_) => vec![Builder::RandomOrder],
        Algo::IGreedy(_) => vec![Builder::IGreedy],
        Algo::Ranking(_) => vec![Builder::WfWorst],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::TiePolicy;
    use crate::gfunc::g_exponential;
    use crate::instance::load_instance;

    fn tri2() -> Instance {
        load_instance(
            r#"{"kind":"matching","buyers":[{"id":"b1"},{"id":"b2"}],
                "items":[{"id":"j1","edges":[{"buyer":"b1"},{"buyer":"b2"}]},
                         {"id":"j2","edges":[{"buyer":"b2"}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn water_filling_closed_form_passes() {
        let r = check_certificate(&tri2(), &Algo::WaterFilling, Builder::WfWorst, 0, 1, &g_exponential()).unwrap();
        assert!(r.pass());
        assert!(r.property1_residual.unwrap() <= 1e-12);
        assert_eq!(r.edges.len(), 3);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["builder", "F", "property1_residual", "edges"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        for key in ["buyer", "item", "mean_slack", "se", "required", "pass"] {
            assert!(json["edges"][0].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn greedy_random_order_passes_on_triangular() {
        let algo = Algo::Greedy(TiePolicy::Global(vec![0, 1]));
        let r = check_certificate(&tri2(), &algo, Builder::RandomOrder, 20_000, 5, &g_exponential()).unwrap();
        assert!(r.pass(), "{}", r.to_json());
        assert!(r.property1_residual.unwrap() <= 1e-9);
        // j1 always goes to b1, so that edge's LHS is exactly 1 in every order
        assert_eq!((r.edges[0].mean_slack, r.edges[0].se), (1.0, 0.0));
        assert!(r.edges[1].se > 0.0);
    }

    #[test]
    fn zero_trials_rejected_for_sampling_builders() {
        let algo = Algo::Greedy(TiePolicy::ByIndex);
        let err = check_certificate(&tri2(), &algo, Builder::RandomOrder, 0, 1, &g_exponential()).unwrap_err();
        assert_eq!(err, Error::ZeroTrials);
    }

    #[test]
    fn incompatible_pairs_rejected() {
        let err = check_certificate(&tri2(), &Algo::WaterFilling, Builder::RandomOrder, 10, 1, &g_exponential())
            .unwrap_err();
        assert!(matches!(err, Error::IncompatibleBuilder { .. }));
        for b in compatible_builders(&Algo::WaterFilling) {
            check_certificate(&tri2(), &Algo::WaterFilling, b, 10, 1, &g_exponential()).unwrap();
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let algo = Algo::Greedy(TiePolicy::ByIndex);
        let run = || check_certificate(&tri2(), &algo, Builder::RandomOrder, 3000, 8, &g_exponential()).unwrap();
        let one = crate::parallel::with_workers(1, run);
        let four = crate::parallel::with_workers(4, run);
        assert_eq!(one.to_json(), four.to_json());
    }
}
