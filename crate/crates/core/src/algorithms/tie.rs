use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::Instance;

/// Rule that picks among equally attractive buyers.
///
/// Each variant is deterministic given the arriving item, the tied
/// candidates and the current normalized levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TiePolicy {
    /// Lowest buyer index first.
    ByIndex,
    /// `rank[i]` orders buyers for every item; lower is preferred.
    Global(Vec<usize>),
    /// `rank[item][buyer]`, a separate fixed order per arriving item.
    PerItem(Vec<Vec<usize>>),
    /// Prefer the buyer with the highest normalized level. Not
    /// allocation-monotone; kept as a counterexample for the probe.
    FullestFirst,
}

impl TiePolicy {
    /// Independent uniformly random buyer order for each item.
    pub fn per_item_seeded(inst: &Instance, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ranks = (0..inst.num_items())
            .map(|_| random_rank(inst.num_buyers(), &mut rng))
            .collect();
        TiePolicy::PerItem(ranks)
    }

    pub fn global_seeded(inst: &Instance, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TiePolicy::Global(random_rank(inst.num_buyers(), &mut rng))
    }

    pub fn pick(&self, item: usize, tied: &[usize], levels: impl Fn(usize) -> f64) -> usize {
        debug_assert!(!tied.is_empty());
        let key = |b: usize| -> (f64, usize) {
            match self {
                TiePolicy::ByIndex => (0.0, b),
                TiePolicy::Global(rank) => (0.0, rank.get(b).copied().unwrap_or(usize::MAX - b)),
                TiePolicy::PerItem(ranks) => (
                    0.0,
                    ranks.get(item).and_then(|r| r.get(b)).copied().unwrap_or(usize::MAX - b),
                ),
                TiePolicy::FullestFirst => (-levels(b), b),
            }
        };
        *tied
            .iter()
            .min_by(|&&a, &&b| key(a).partial_cmp(&key(b)).unwrap().then(a.cmp(&b)))
            .unwrap()
    }
}

pub(crate) fn random_rank(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut rank = vec![0; n];
    for (r, &b) in order.iter().enumerate() {
        rank[b] = r;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_rank_wins_over_index() {
        let p = TiePolicy::Global(vec![2, 0, 1]);
        assert_eq!(p.pick(0, &[0, 1, 2], |_| 0.0), 1);
        assert_eq!(TiePolicy::ByIndex.pick(0, &[2, 1], |_| 0.0), 1);
    }

    #[test]
    fn per_item_orders_differ() {
        let p = TiePolicy::PerItem(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(p.pick(0, &[0, 1], |_| 0.0), 0);
        assert_eq!(p.pick(1, &[0, 1], |_| 0.0), 1);
    }

    #[test]
    fn fullest_first_uses_levels() {
        let lv = [0.2, 0.7];
        assert_eq!(TiePolicy::FullestFirst.pick(0, &[0, 1], |b| lv[b]), 1);
        assert_eq!(TiePolicy::FullestFirst.pick(0, &[0, 1], |_| 0.0), 0);
    }
}
