//! Max-bid greedy rules, fractional and integral.

use crate::allocation::{Allocation, Outcome, Producer, RunTrace};
use crate::error::Result;
use crate::instance::Instance;
use crate::rational::Rational;

use super::scalar::Field;
use super::state::{check_order, RunState};
use super::tie::TiePolicy;

/// Fractional greedy: pour the item into the highest bidder that still
/// has budget, moving on to the next bidder whenever one runs dry.
pub fn greedy_fractional(inst: &Instance, policy: &TiePolicy) -> Result<(Allocation, RunTrace)> {
    greedy_on::<Rational>(inst, inst.arrival(), policy)
}

/// Integral greedy: the whole item goes to the max bidder with unexhausted
/// budget if it fits, otherwise the item is skipped.
pub fn i_greedy(inst: &Instance, policy: &TiePolicy) -> Result<(Allocation, RunTrace)> {
    i_greedy_on::<Rational>(inst, inst.arrival(), policy)
}

/// Buyers tied at the maximum bid among live edges with room.
fn max_bidders<T: Field>(st: &RunState<'_, T>, edges: &[usize]) -> Vec<usize> {
    let open: Vec<usize> = edges.iter().copied().filter(|&k| st.has_room(st.buyer(k))).collect();
    let Some(top) = open.iter().map(|&k| st.bid[k].clone()).reduce(|a, b| if b > a { b } else { a }) else {
        return Vec::new();
    };
    open.into_iter().filter(|&k| st.bid[k] == top).collect()
}

fn pick_edge<T: Field>(st: &RunState<'_, T>, item: usize, tied: &[usize], policy: &TiePolicy) -> usize {
    let buyers: Vec<usize> = tied.iter().map(|&k| st.buyer(k)).collect();
    let chosen = policy.pick(item, &buyers, |b| st.normalized(b));
    tied[buyers.iter().position(|&b| b == chosen).unwrap()]
}

pub(crate) fn greedy_on<T: Field>(
    inst: &Instance,
    order: &[usize],
    policy: &TiePolicy,
) -> Result<(Allocation, RunTrace)> {
    check_order(inst, order)?;
    let mut st = RunState::<T>::new(inst);
    for (rank, &j) in order.iter().enumerate() {
        st.begin(j);
        let edges = st.live_edges(j);
        let mut rest = T::one();
        while rest.is_positive() {
            let tied = max_bidders(&st, &edges);
            if tied.is_empty() {
                break;
            }
            let k = pick_edge(&st, j, &tied, policy);
            let b = st.buyer(k);
            let w = st.weight[k].clone();
            let fits = !w.is_positive() || w.clone() * rest.clone() <= st.remaining(b);
            if fits {
                st.x[k] = st.x[k].clone() + rest.clone();
                st.y[b] = st.y[b].clone() + w * rest;
                rest = T::zero();
            } else {
                let take = st.remaining(b) / w;
                st.x[k] = st.x[k].clone() + take.clone();
                st.y[b] = st.budget[b].clone();
                rest = rest - take;
            }
        }
        st.end(j, rank, Outcome::Allocated);
    }
    Ok(st.finish(Producer::Greedy, order))
}

pub(crate) fn i_greedy_on<T: Field>(
    inst: &Instance,
    order: &[usize],
    policy: &TiePolicy,
) -> Result<(Allocation, RunTrace)> {
    check_order(inst, order)?;
    let mut st = RunState::<T>::new(inst);
    for (rank, &j) in order.iter().enumerate() {
        st.begin(j);
        let edges = st.live_edges(j);
        let tied = max_bidders(&st, &edges);
        let outcome = if tied.is_empty() {
            Outcome::Allocated
        } else {
            let k = pick_edge(&st, j, &tied, policy);
            let b = st.buyer(k);
            if st.weight[k] <= st.remaining(b) {
                st.x[k] = T::one();
                st.y[b] = st.y[b].clone() + st.weight[k].clone();
                Outcome::Allocated
            } else {
                Outcome::Skipped { max_bidder: b }
            }
        };
        st.end(j, rank, outcome);
    }
    Ok(st.finish(Producer::IGreedy, order))
}
