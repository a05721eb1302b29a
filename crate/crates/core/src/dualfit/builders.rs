use serde::Serialize;

use crate::algorithms::{Algo, Precision, TiePolicy};
use crate::allocation::{Outcome, Producer, RunTrace, Step};
use crate::error::{Error, Result};
use crate::gfunc::GFunction;
use crate::instance::{Instance, Kind};

use super::{arrival_from_z, DualSolution, EdgeExpectation, ExpectationMode, ExpectedDual, RandomTape, TapeKind};

fn require(trace: &RunTrace, builder: &str, allowed: &[Producer]) -> Result<()> {
    if allowed.contains(&trace.producer) {
        Ok(())
    } else {
        Err(Error::IncompatibleBuilder { builder: builder.into(), algo: trace.producer.name().into() })
    }
}

fn normalized(inst: &Instance, buyer: usize, level: f64) -> f64 {
    let b = inst.budget_f64(buyer);
    if b > 0.0 {
        level / b
    } else {
        1.0
    }
}

/// `α_i = g(U_i)` once `ȳ_i` reaches `U_i`; `β_j` absorbs the rest of the
/// primal gain so each step is dual-balanced.
pub(super) fn worst_case(inst: &Instance, trace: &RunTrace, tape: &RandomTape, g: &GFunction) -> Result<DualSolution> {
    tape.expect(TapeKind::U, inst.num_buyers())?;
    let mut d = DualSolution::zeros(inst);
    for step in &trace.steps {
        let mut spent = 0.0;
        for t in step.raised() {
            let u = tape.values[t.buyer];
            let after = if u <= normalized(inst, t.buyer, t.after) { g.g(u) } else { 0.0 };
            spent += inst.budget_f64(t.buyer) * (after - d.alpha[t.buyer]);
            d.alpha[t.buyer] = after;
        }
        d.beta[step.item] = step.delta_primal - spent;
    }
    Ok(d)
}

/// `E[α_i] = G(ȳ_i)` and `E[β_j] = Δp_j - Σ_{L(j)} B_i (G(ȳ_new) - G(ȳ_old))`.
pub(super) fn worst_case_expected(inst: &Instance, trace: &RunTrace, g: &GFunction) -> ExpectedDual {
    let mut alpha = vec![0.0; inst.num_buyers()];
    let mut beta = vec![0.0; inst.num_items()];
    for step in &trace.steps {
        let mut spent = 0.0;
        for t in step.raised() {
            let gain = g.antiderivative(normalized(inst, t.buyer, t.after))
                - g.antiderivative(normalized(inst, t.buyer, t.before));
            spent += inst.budget_f64(t.buyer) * gain;
            alpha[t.buyer] += gain;
        }
        beta[step.item] = step.delta_primal - spent;
    }
    let edges = inst
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| EdgeExpectation { mean_lhs: inst.weight_f64(k) * alpha[e.buyer] + beta[e.item], se: 0.0 })
        .collect();
    ExpectedDual { alpha, beta, mode: ExpectationMode::ClosedForm, edges }
}

/// Worst-case dual for water-filling, or RANKING with priorities from the
/// same `U` tape.
pub fn build_dual_wf_worst(
    inst: &Instance,
    trace: &RunTrace,
    tape: &RandomTape,
    g: &GFunction,
) -> Result<DualSolution> {
    require(trace, "wf-worst", &[Producer::WaterFilling, Producer::Ranking])?;
    worst_case(inst, trace, tape, g)
}

pub fn expected_dual_wf_worst(inst: &Instance, trace: &RunTrace, g: &GFunction) -> Result<ExpectedDual> {
    require(trace, "wf-worst", &[Producer::WaterFilling])?;
    Ok(worst_case_expected(inst, trace, g))
}

/// Worst-case dual for virtual water-filling; thresholds on `ȳ = y/B`.
pub fn build_dual_vwf_worst(
    inst: &Instance,
    trace: &RunTrace,
    tape: &RandomTape,
    g: &GFunction,
) -> Result<DualSolution> {
    require(trace, "vwf-worst", &[Producer::VirtualWaterFilling])?;
    worst_case(inst, trace, tape, g)
}

pub fn expected_dual_vwf_worst(inst: &Instance, trace: &RunTrace, g: &GFunction) -> Result<ExpectedDual> {
    require(trace, "vwf-worst", &[Producer::VirtualWaterFilling])?;
    Ok(worst_case_expected(inst, trace, g))
}

/// Splits each step's gain: `(1 - g(Z_j))` share to the buyers by spend,
/// `g(Z_j)` share to the item.
fn random_order_steps<'a>(
    inst: &Instance,
    steps: impl Iterator<Item = &'a Step>,
    z: &[f64],
    g: &GFunction,
    d: &mut DualSolution,
) {
    for step in steps {
        let gz = g.g(z[step.item]);
        for t in &step.touches {
            let b = inst.budget_f64(t.buyer);
            if t.x > 0.0 && b > 0.0 {
                d.alpha[t.buyer] += inst.bid_f64(t.edge) * t.x * (1.0 - gz) / b;
            }
        }
        d.beta[step.item] = step.delta_primal * gz;
    }
}

/// Random-order dual for greedy run on the order induced by the `Z` tape.
pub fn build_dual_random_order(
    inst: &Instance,
    trace: &RunTrace,
    tape: &RandomTape,
    g: &GFunction,
) -> Result<DualSolution> {
    require(trace, "random-order", &[Producer::Greedy])?;
    tape.expect(TapeKind::Z, inst.num_items())?;
    if arrival_from_z(&tape.values) != trace.order {
        return Err(Error::TapeMismatch("trace order is not the sorted order of the Z tape".into()));
    }
    let mut d = DualSolution::zeros(inst);
    random_order_steps(inst, trace.steps.iter(), &tape.values, g, &mut d);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDegreeDual {
    pub dual: DualSolution,
    /// Max item degree `d`.
    pub degree: usize,
    /// `Σ_j (Δprimal_j)²`.
    pub quadratic: f64,
    pub primal: f64,
}

impl BoundedDegreeDual {
    /// `primal/F - g'(0)/(2dF) · Σ (Δp)²`; with no edges the correction is 0.
    pub fn band1_bound(&self, g: &GFunction) -> f64 {
        let f = g.factor();
        let correction = if self.degree == 0 {
            0.0
        } else {
            g.slope_at_zero() / (2.0 * self.degree as f64 * f) * self.quadratic
        };
        self.primal / f - correction
    }
}

/// Deterministic dual `α_i = G(y_i)/F`, `β_j = 1 - G(l_j)/F` where `l_j`
/// is the level `L(j)` was raised to, or 1 if `j` was not fully matched.
pub fn build_dual_bounded_degree(inst: &Instance, trace: &RunTrace, g: &GFunction) -> Result<BoundedDegreeDual> {
    require(trace, "bounded-degree", &[Producer::WaterFilling])?;
    if inst.kind() != Kind::Matching {
        return Err(Error::UnsupportedKind { algo: "bounded-degree", kind: inst.kind().name() });
    }
    let f = g.factor();
    let mut dual = DualSolution::zeros(inst);
    for (i, y) in trace.final_levels.iter().enumerate() {
        dual.alpha[i] = g.antiderivative(*y) / f;
    }
    for step in &trace.steps {
        let level = if step.mass < 1.0 - 1e-12 {
            1.0
        } else {
            step.raised().map(|t| t.after).fold(0.0, f64::max)
        };
        dual.beta[step.item] = 1.0 - g.antiderivative(level) / f;
    }
    Ok(BoundedDegreeDual {
        dual,
        degree: inst.max_item_degree(),
        quadratic: trace.steps.iter().map(|s| s.delta_primal * s.delta_primal).sum(),
        primal: trace.primal(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IGreedyDual {
    pub dual: DualSolution,
    /// `1 + max b_ij / B_i`.
    pub factor: f64,
    pub trace: RunTrace,
    pub primal: f64,
    /// `F · Σ_{skipped j} max_i b_ij`, the part of the objective not
    /// matched by primal gain.
    pub skipped_mass: f64,
}

/// Runs I-greedy on the `Z`-induced order, builds the random-order dual on
/// the assigned subsequence and prices each skipped item at `F · max bid`.
pub fn build_dual_igreedy(
    inst: &Instance,
    tape: &RandomTape,
    g: &GFunction,
    policy: &TiePolicy,
) -> Result<IGreedyDual> {
    tape.expect(TapeKind::Z, inst.num_items())?;
    let order = arrival_from_z(&tape.values);
    let (_, trace) = Algo::IGreedy(policy.clone()).run_order(inst, &order, Precision::Fast)?;
    let mut dual = DualSolution::zeros(inst);
    let kept = trace.steps.iter().filter(|s| s.outcome == Outcome::Allocated);
    random_order_steps(inst, kept, &tape.values, g, &mut dual);
    let mut skipped_mass = 0.0;
    for step in trace.skipped() {
        let top = inst.item_edges(step.item).map(|k| inst.bid_f64(k)).fold(0.0, f64::max);
        dual.beta[step.item] = g.factor() * top;
        skipped_mass += dual.beta[step.item];
    }
    Ok(IGreedyDual {
        dual,
        factor: 1.0 + inst.max_bid_budget_ratio(),
        primal: trace.primal(),
        trace,
        skipped_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{greedy_fractional, i_greedy, virtual_water_filling, water_filling};
    use crate::gfunc::g_exponential;
    use crate::instance::load_instance;

    const E: f64 = std::f64::consts::E;

    fn one_by_one() -> Instance {
        load_instance(r#"{"kind":"matching","buyers":[{"id":"b"}],"items":[{"id":"j","edges":[{"buyer":"b"}]}]}"#)
            .unwrap()
    }

    fn tri2() -> Instance {
        load_instance(
            r#"{"kind":"matching","buyers":[{"id":"b1"},{"id":"b2"}],
                "items":[{"id":"j1","edges":[{"buyer":"b1"},{"buyer":"b2"}]},
                         {"id":"j2","edges":[{"buyer":"b2"}]}]}"#,
        )
        .unwrap()
    }

    fn u(values: &[f64]) -> RandomTape {
        RandomTape::from_values(TapeKind::U, values.to_vec()).unwrap()
    }

    #[test]
    fn wf_worst_single_edge() {
        let inst = one_by_one();
        let g = g_exponential();
        let (_, trace) = water_filling(&inst).unwrap();
        let d = build_dual_wf_worst(&inst, &trace, &u(&[0.3]), &g).unwrap();
        assert!((d.alpha[0] - (-0.7f64).exp()).abs() < 1e-15);
        assert!((d.alpha[0] - 0.4966).abs() < 1e-4);
        assert!((d.beta[0] - 0.5034).abs() < 1e-4);
        assert!((d.objective(&inst) - 1.0).abs() < 1e-15);
        for k in 0..=10 {
            let d = build_dual_wf_worst(&inst, &trace, &u(&[k as f64 / 10.0]), &g).unwrap();
            assert!((d.objective(&inst) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn wf_worst_threshold_on_triangular() {
        let inst = tri2();
        let g = g_exponential();
        let (_, trace) = water_filling(&inst).unwrap();
        let d = build_dual_wf_worst(&inst, &trace, &u(&[0.8, 0.2]), &g).unwrap();
        assert_eq!(d.alpha[0], 0.0);
        assert!((d.objective(&inst) - 1.5).abs() < 1e-12);

        let ex = expected_dual_wf_worst(&inst, &trace, &g).unwrap();
        assert!((ex.alpha[0] - ((-0.5f64).exp() - (-1.0f64).exp())).abs() < 1e-15);
        assert!((ex.alpha[0] - 0.2387).abs() < 1e-4);
    }

    #[test]
    fn wf_expected_single_edge() {
        let inst = one_by_one();
        let g = g_exponential();
        let (_, trace) = water_filling(&inst).unwrap();
        let ex = expected_dual_wf_worst(&inst, &trace, &g).unwrap();
        assert!((ex.alpha[0] - (1.0 - 1.0 / E)).abs() < 1e-15);
        assert!((ex.beta[0] - 1.0 / E).abs() < 1e-15);
        assert!((ex.edges[0].mean_lhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vwf_expected_budget_two() {
        let inst = load_instance(
            r#"{"kind":"onbap","buyers":[{"id":"b","budget":2}],"items":[{"id":"j","edges":[{"buyer":"b","bid":2}]}]}"#,
        )
        .unwrap();
        let g = g_exponential();
        let (_, trace) = virtual_water_filling(&inst, &g).unwrap();
        let ex = expected_dual_vwf_worst(&inst, &trace, &g).unwrap();
        assert!((ex.alpha[0] - (1.0 - 1.0 / E)).abs() < 1e-12);
        assert!((ex.beta[0] - 2.0 / E).abs() < 1e-12);
        assert!((ex.edges[0].mean_lhs - 2.0).abs() < 1e-12);
        assert!(expected_dual_wf_worst(&inst, &trace, &g).is_err());
    }

    #[test]
    fn random_order_single_edge() {
        let inst = one_by_one();
        let g = g_exponential();
        let (_, trace) = greedy_fractional(&inst, &TiePolicy::ByIndex).unwrap();
        let z = RandomTape::from_values(TapeKind::Z, vec![0.5]).unwrap();
        let d = build_dual_random_order(&inst, &trace, &z, &g).unwrap();
        assert!((d.alpha[0] - 0.3935).abs() < 1e-4);
        assert!((d.beta[0] - 0.6065).abs() < 1e-4);
        assert!((d.objective(&inst) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_order_rejects_foreign_order() {
        let inst = tri2();
        let (_, trace) = greedy_fractional(&inst, &TiePolicy::ByIndex).unwrap();
        let z = RandomTape::from_values(TapeKind::Z, vec![0.9, 0.1]).unwrap();
        assert!(matches!(
            build_dual_random_order(&inst, &trace, &z, &g_exponential()),
            Err(Error::TapeMismatch(_))
        ));
        let (_, wf) = water_filling(&inst).unwrap();
        assert!(matches!(
            build_dual_random_order(&inst, &wf, &z, &g_exponential()),
            Err(Error::IncompatibleBuilder { .. })
        ));
    }

    #[test]
    fn bounded_degree_single_edge() {
        let inst = one_by_one();
        let g = g_exponential();
        let (_, trace) = water_filling(&inst).unwrap();
        let bd = build_dual_bounded_degree(&inst, &trace, &g).unwrap();
        assert!((bd.dual.alpha[0] - 1.0).abs() < 1e-15);
        assert!(bd.dual.beta[0].abs() < 1e-15);
        let bound = bd.band1_bound(&g);
        assert!((bound - 1.2910).abs() < 1e-4, "{bound}");
        assert!(bd.dual.objective(&inst) <= bound);
    }

    #[test]
    fn igreedy_skip_priced_at_max_bid() {
        let inst = load_instance(
            r#"{"kind":"onbap","buyers":[{"id":"b","budget":1}],
                "items":[{"id":"j1","edges":[{"buyer":"b","bid":0.6}]},
                         {"id":"j2","edges":[{"buyer":"b","bid":0.6}]}]}"#,
        )
        .unwrap();
        let g = g_exponential();
        let z = RandomTape::from_values(TapeKind::Z, vec![0.2, 0.7]).unwrap();
        let r = build_dual_igreedy(&inst, &z, &g, &TiePolicy::ByIndex).unwrap();
        let f = g.factor();
        assert!((r.factor - 1.6).abs() < 1e-15);
        assert!((r.primal - 0.6).abs() < 1e-15);
        assert!((r.dual.objective(&inst) - (0.6 + f * 0.6)).abs() < 1e-12);
        assert!((r.dual.objective(&inst) - 0.9793).abs() < 1e-4);
        assert!(r.dual.objective(&inst) > r.factor * r.primal);
    }

    #[test]
    fn igreedy_without_skips_is_random_order_dual() {
        let inst = load_instance(
            r#"{"kind":"onbap","buyers":[{"id":"a","budget":3},{"id":"b","budget":2}],
                "items":[{"id":"1","edges":[{"buyer":"a","bid":1},{"buyer":"b","bid":2}]},
                         {"id":"2","edges":[{"buyer":"a","bid":1}]}]}"#,
        )
        .unwrap();
        let g = g_exponential();
        let z = RandomTape::from_values(TapeKind::Z, vec![0.6, 0.3]).unwrap();
        let r = build_dual_igreedy(&inst, &z, &g, &TiePolicy::ByIndex).unwrap();
        assert_eq!(r.skipped_mass, 0.0);
        let ordered = inst.with_arrival(arrival_from_z(&z.values)).unwrap();
        let (_, trace) = greedy_fractional(&ordered, &TiePolicy::ByIndex).unwrap();
        let d = build_dual_random_order(&ordered, &trace, &z, &g).unwrap();
        for (a, b) in d.alpha.iter().zip(&r.dual.alpha).chain(d.beta.iter().zip(&r.dual.beta)) {
            assert!((a - b).abs() < 1e-15);
        }
        let (_, it) = i_greedy(&ordered, &TiePolicy::ByIndex).unwrap();
        assert_eq!(it.skipped().count(), 0);
    }
}
