//! Event-driven water-filling for fractional matching.

use crate::allocation::{Allocation, Outcome, Producer, RunTrace};
use crate::error::{Error, Result};
use crate::instance::{Instance, Kind};

use super::scalar::{min, Field};
use super::state::{check_order, RunState};

/// Exact water-filling on the instance's arrival order.
pub fn water_filling(inst: &Instance) -> Result<(Allocation, RunTrace)> {
    water_filling_on::<crate::rational::Rational>(inst, inst.arrival())
}

/// Each arriving item raises its lowest unsaturated neighbours together;
/// the simulation jumps from one event (levels merge, a buyer saturates,
/// the item runs out) to the next.
pub(crate) fn water_filling_on<T: Field>(inst: &Instance, order: &[usize]) -> Result<(Allocation, RunTrace)> {
    if inst.kind() != Kind::Matching {
        return Err(Error::UnsupportedKind { algo: "water-filling", kind: inst.kind().name() });
    }
    check_order(inst, order)?;
    let mut st = RunState::<T>::new(inst);
    for (rank, &j) in order.iter().enumerate() {
        st.begin(j);
        let edges = st.live_edges(j);
        let mut rest = T::one();
        while rest.is_positive() {
            let active: Vec<usize> = edges.iter().copied().filter(|&k| st.has_room(st.buyer(k))).collect();
            let Some(low) = active.iter().map(|&k| st.y[st.buyer(k)].clone()).reduce(min) else {
                break;
            };
            let (lowest, higher): (Vec<usize>, Vec<usize>) =
                active.iter().partition(|&&k| st.y[st.buyer(k)] == low);
            let next = higher
                .iter()
                .map(|&k| st.y[st.buyer(k)].clone())
                .fold(T::one(), min);
            let width = T::from_count(lowest.len());
            let need = width.clone() * (next.clone() - low.clone());
            if need <= rest {
                for &k in &lowest {
                    let b = st.buyer(k);
                    st.x[k] = st.x[k].clone() + (next.clone() - low.clone());
                    st.y[b] = next.clone();
                }
                rest = rest - need;
            } else {
                let d = rest / width;
                for &k in &lowest {
                    let b = st.buyer(k);
                    st.x[k] = st.x[k].clone() + d.clone();
                    st.y[b] = st.y[b].clone() + d.clone();
                }
                rest = T::zero();
            }
        }
        st.end(j, rank, Outcome::Allocated);
    }
    Ok(st.finish(Producer::WaterFilling, order))
}

#[cfg(test)]
pub(crate) mod oracle {
    use crate::instance::Instance;

    /// Water-filling by tiny increments: each `eps` of mass goes to the
    /// lowest unsaturated neighbour. Returns per-edge `x`.
    pub fn discretized(inst: &Instance, eps: f64) -> Vec<f64> {
        let mut y = vec![0.0; inst.num_buyers()];
        let mut x = vec![0.0; inst.num_edges()];
        let steps = (1.0 / eps).round() as usize;
        for &j in inst.arrival() {
            let edges: Vec<usize> = inst.item_edges(j).collect();
            for _ in 0..steps {
                let best = edges
                    .iter()
                    .copied()
                    .filter(|&k| y[inst.edges()[k].buyer] + eps <= 1.0 + 1e-12)
                    .min_by(|&a, &b| {
                        y[inst.edges()[a].buyer].partial_cmp(&y[inst.edges()[b].buyer]).unwrap()
                    });
                let Some(k) = best else { break };
                x[k] += eps;
                y[inst.edges()[k].buyer] += eps;
            }
        }
        x
    }
}
