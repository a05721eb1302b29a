//! Virtual water-filling for budgeted allocation.

use crate::allocation::{Allocation, Outcome, Producer, RunTrace};
use crate::error::{Error, Result};
use crate::gfunc::GFunction;
use crate::instance::Instance;

use super::state::{check_order, RunState};

const MAX_ITERATIONS: usize = 200;
const MASS_TOL: f64 = 1e-13;
const RESIDUAL_LIMIT: f64 = 1e-9;

/// Virtual level `b (g(y/B) - 1)` of a buyer for an edge with bid `b`.
pub fn virtual_level(g: &GFunction, bid: f64, level: f64, budget: f64) -> f64 {
    bid * (g.g(level / budget) - 1.0)
}

/// Each arriving item raises the minimum virtual level among its
/// unexhausted neighbours, all raised virtual levels moving together.
pub fn virtual_water_filling(inst: &Instance, g: &GFunction) -> Result<(Allocation, RunTrace)> {
    virtual_water_filling_on(inst, inst.arrival(), g)
}

pub(crate) fn virtual_water_filling_on(
    inst: &Instance,
    order: &[usize],
    g: &GFunction,
) -> Result<(Allocation, RunTrace)> {
    check_order(inst, order)?;
    let mut st = RunState::<f64>::new(inst);
    for (rank, &j) in order.iter().enumerate() {
        st.begin(j);
        let active: Vec<usize> = st.live_edges(j).into_iter().filter(|&k| st.has_room(st.buyer(k))).collect();
        fill_item(&mut st, &active, g)?;
        st.end(j, rank, Outcome::Allocated);
    }
    Ok(st.finish(Producer::VirtualWaterFilling, order))
}

fn fill_item(st: &mut RunState<'_, f64>, active: &[usize], g: &GFunction) -> Result<()> {
    if active.is_empty() {
        return Ok(());
    }
    // free consumption absorbs the whole item
    if let Some(&k) = active.iter().find(|&&k| st.weight[k] <= 0.0) {
        st.x[k] += 1.0;
        return Ok(());
    }
    let old: Vec<f64> = active.iter().map(|&k| st.y[st.buyer(k)]).collect();
    let target = |v: f64| -> Vec<f64> {
        active
            .iter()
            .zip(&old)
            .map(|(&k, &y0)| {
                let b = st.budget[st.buyer(k)];
                let y = b * g.inverse(1.0 + v / st.bid[k]);
                (y.min(b) - y0).max(0.0)
            })
            .collect()
    };
    let mass = |d: &[f64]| -> f64 { active.iter().zip(d).map(|(&k, dy)| dy / st.weight[k]).sum() };

    let full: Vec<f64> = active.iter().zip(&old).map(|(&k, y0)| st.budget[st.buyer(k)] - y0).collect();
    let raise = if mass(&full) <= 1.0 {
        full
    } else {
        let mut lo = active
            .iter()
            .zip(&old)
            .map(|(&k, &y0)| virtual_level(g, st.bid[k], y0, st.budget[st.buyer(k)]))
            .fold(f64::INFINITY, f64::min);
        let mut hi = 0.0;
        let mut at_lo = target(lo);
        for _ in 0..MAX_ITERATIONS {
            if 1.0 - mass(&at_lo) <= MASS_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let d = target(mid);
            if mass(&d) <= 1.0 {
                lo = mid;
                at_lo = d;
            } else {
                hi = mid;
            }
        }
        let residual = 1.0 - mass(&at_lo);
        if residual > RESIDUAL_LIMIT {
            return Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual });
        }
        at_lo
    };
    for ((&k, y0), dy) in active.iter().zip(&old).zip(&raise) {
        let b = st.buyer(k);
        st.x[k] += dy / st.weight[k];
        st.y[b] = if y0 + dy >= st.budget[b] { st.budget[b] } else { y0 + dy };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::water_filling::water_filling;
    use crate::gfunc::g_exponential;
    use crate::instance::load_instance;

    /// Pours `eps` at a time into the neighbour of minimum virtual level.
    fn discretized(inst: &Instance, eps: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let g = g_exponential();
        let mut y = vec![0.0; inst.num_buyers()];
        let mut x = vec![0.0; inst.num_edges()];
        let mut history = Vec::new();
        for &j in inst.arrival() {
            let edges: Vec<usize> = inst.item_edges(j).collect();
            for _ in 0..(1.0 / eps).round() as usize {
                let key = |k: usize| {
                    let i = inst.edges()[k].buyer;
                    virtual_level(&g, inst.bid_f64(k), y[i], inst.budget_f64(i))
                };
                let best = edges
                    .iter()
                    .copied()
                    .filter(|&k| {
                        let i = inst.edges()[k].buyer;
                        y[i] + eps * inst.weight_f64(k) <= inst.budget_f64(i) + 1e-12
                    })
                    .min_by(|&a, &b| key(a).total_cmp(&key(b)));
                let Some(k) = best else { break };
                x[k] += eps;
                y[inst.edges()[k].buyer] += eps * inst.weight_f64(k);
                history.push(y.clone());
            }
        }
        (x, history)
    }

    #[test]
    fn unit_instance_matches_water_filling() {
        let inst = load_instance(
            r#"{"kind":"matching","buyers":[{"id":"a"},{"id":"b"},{"id":"c"}],
                "items":[{"id":"1","edges":[{"buyer":"a"},{"buyer":"b"},{"buyer":"c"}]},
                         {"id":"2","edges":[{"buyer":"b"},{"buyer":"c"}]},
                         {"id":"3","edges":[{"buyer":"c"}]},
                         {"id":"4","edges":[{"buyer":"a"},{"buyer":"c"}]}]}"#,
        )
        .unwrap();
        let (v, _) = virtual_water_filling(&inst, &g_exponential()).unwrap();
        let (w, _) = water_filling(&inst).unwrap();
        for (a, b) in v.x().iter().zip(w.x()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn higher_bidder_fills_alone_until_breakpoint() {
        let inst = load_instance(
            r#"{"kind":"onbap","buyers":[{"id":"b1"},{"id":"b2"}],
                "items":[{"id":"j","edges":[{"buyer":"b1","bid":1},{"buyer":"b2","bid":2}]}]}"#,
        )
        .unwrap();
        let breakpoint = 1.0 + ((1.0 + (-1.0f64).exp()) / 2.0).ln();
        assert!((breakpoint - 0.6201).abs() < 1e-4);

        let (_, history) = discretized(&inst, 1e-6);
        // the last state with b1 still empty marks where b1 joins
        let joined = history.iter().take_while(|y| y[0] == 0.0).last().unwrap();
        assert!((joined[1] - breakpoint).abs() < 1e-5, "{}", joined[1]);

        let (x, trace) = virtual_water_filling(&inst, &g_exponential()).unwrap();
        assert!(trace.final_levels[1] > breakpoint && trace.final_levels[1] < 1.0);
        let (oracle, _) = discretized(&inst, 1e-6);
        for (a, b) in x.x().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn item_split_matches_oracle_with_room_left() {
        let inst = load_instance(
            r#"{"kind":"onbap","buyers":[{"id":"b1","budget":3},{"id":"b2","budget":2}],
                "items":[{"id":"j1","edges":[{"buyer":"b1","bid":1},{"buyer":"b2","bid":"1/2"}]},
                         {"id":"j2","edges":[{"buyer":"b1","bid":2},{"buyer":"b2","bid":1}]}]}"#,
        )
        .unwrap();
        let (x, _) = virtual_water_filling(&inst, &g_exponential()).unwrap();
        let (oracle, _) = discretized(&inst, 1e-6);
        for (a, b) in x.x().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
        for j in 0..inst.num_items() {
            assert!((x.item_mass(&inst, j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discontinuous_g_does_not_converge() {
        let step = GFunction::custom(
            |t| if t < 0.5 { (-1.0f64).exp() } else { 1.0 },
            |t| t,
            0.5,
            0.0,
        );
        let inst = load_instance(
            r#"{"kind":"matching","buyers":[{"id":"a"},{"id":"b"},{"id":"c"}],
                "items":[{"id":"j","edges":[{"buyer":"a"},{"buyer":"b"},{"buyer":"c"}]}]}"#,
        )
        .unwrap();
        assert!(matches!(
            virtual_water_filling(&inst, &step),
            Err(Error::NonConvergence { .. })
        ));
    }
}
