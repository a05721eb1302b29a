use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allocation::{Allocation, Outcome, Producer, RunTrace};
use crate::error::{Error, Result};
use crate::instance::{Instance, Kind};

use super::scalar::Field;
use super::state::{check_order, RunState};
use super::tie::random_rank;

/// Distinct per-buyer ranks; rank 0 is the highest priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Priorities(pub Vec<usize>);

impl Priorities {
    pub fn from_seed(num_buyers: usize, seed: u64) -> Self {
        Priorities(random_rank(num_buyers, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    /// Ascending values get higher priority (ties by buyer index).
    pub fn from_values(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut rank = vec![0; values.len()];
        for (r, &b) in order.iter().enumerate() {
            rank[b] = r;
        }
        Priorities(rank)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        if self.0.len() != n {
            return Err(Error::InvalidParameter(format!("{} priorities for {n} buyers", self.0.len())));
        }
        for &r in &self.0 {
            match seen.get_mut(r) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidParameter("priorities must be distinct ranks".into())),
            }
        }
        Ok(())
    }
}

/// RANKING: each arriving item goes to its highest-priority unmatched neighbour.
pub fn ranking(inst: &Instance, priorities: &Priorities) -> Result<(Allocation, RunTrace)> {
    ranking_on::<crate::rational::Rational>(inst, inst.arrival(), priorities)
}

pub(crate) fn ranking_on<T: Field>(
    inst: &Instance,
    order: &[usize],
    priorities: &Priorities,
) -> Result<(Allocation, RunTrace)> {
    if inst.kind() != Kind::Matching {
        return Err(Error::UnsupportedKind { algo: "ranking", kind: inst.kind().name() });
    }
    priorities.validate(inst.num_buyers())?;
    check_order(inst, order)?;
    let mut st = RunState::<T>::new(inst);
    for (rank, &j) in order.iter().enumerate() {
        st.begin(j);
        let best = st
            .live_edges(j)
            .into_iter()
            .filter(|&k| st.has_room(st.buyer(k)))
            .min_by_key(|&k| priorities.0[st.buyer(k)]);
        if let Some(k) = best {
            let b = st.buyer(k);
            st.x[k] = T::one();
            st.y[b] = T::one();
        }
        st.end(j, rank, Outcome::Allocated);
    }
    Ok(st.finish(Producer::Ranking, order))
}
