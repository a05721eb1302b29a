use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instance::Instance;

use super::generators::{gen_family, Family};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub name: String,
    pub inst: Instance,
}

fn named(family: Family, seed: u64) -> Result<NamedInstance> {
    let inst = gen_family(&family, seed)?;
    Ok(NamedInstance { name: format!("{family}@{seed}"), inst })
}

/// Sequence of seeds derived from `seed`, one per corpus member.
fn seeds(seed: u64) -> impl Iterator<Item = u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || rng.random::<u64>())
}

/// 100 small instances: 40 unit-budget matchings (triangular, complete,
/// random) and 60 budgeted instances with `b <= B`. Most have at most 7
/// items so they can be enumerated over all arrival orders.
pub fn mixed_corpus(seed: u64) -> Result<Vec<NamedInstance>> {
    let mut out = Vec::with_capacity(100);
    let mut s = seeds(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for n in 2..=7 {
        out.push(named(Family::Triangular { n }, 0)?);
    }
    for (n, m) in [(2, 3), (3, 3), (3, 2), (4, 4)] {
        out.push(named(Family::Complete { n, m }, 0)?);
    }
    while out.len() < 40 {
        let (n, m) = (rng.random_range(2..=5), rng.random_range(2..=8));
        let p = [0.3, 0.5, 0.7][rng.random_range(0..3)];
        out.push(named(Family::RandomMatching { n, m, p }, s.next().unwrap())?);
    }
    while out.len() < 100 {
        let (n, m) = (rng.random_range(2..=4), rng.random_range(2..=8));
        let p = [0.4, 0.6, 0.8][rng.random_range(0..3)];
        out.push(named(Family::random_onbap(n, m, p), s.next().unwrap())?);
    }
    Ok(out)
}

/// Budgeted instances with `b <= B`, 2-4 buyers and 2-6 items.
pub fn onbap_corpus(count: usize, seed: u64) -> Result<Vec<NamedInstance>> {
    let mut s = seeds(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    (0..count)
        .map(|_| {
            let (n, m) = (rng.random_range(2..=4), rng.random_range(2..=6));
            named(Family::random_onbap(n, m, 0.6), s.next().unwrap())
        })
        .collect()
}

/// Matchings whose max item degree is exactly `d`.
pub fn degree_corpus(d: usize, count: usize, seed: u64) -> Result<Vec<NamedInstance>> {
    let mut s = seeds(seed ^ d as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
    (0..count)
        .map(|_| {
            let n = rng.random_range(d.max(2)..=6);
            let m = rng.random_range(2..=10);
            named(Family::BoundedDegree { n, m, d }, s.next().unwrap())
        })
        .collect()
}

/// Random generalized-assignment instances with `η` up to 16.
pub fn ongap_corpus(count: usize, seed: u64) -> Result<Vec<NamedInstance>> {
    let mut s = seeds(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    (0..count)
        .map(|_| {
            let (n, m) = (rng.random_range(1..=4), rng.random_range(2..=10));
            let eta = [2, 4, 8, 16][rng.random_range(0..4)];
            named(Family::random_ongap(n, m, 0.6, eta), s.next().unwrap())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Kind;

    #[test]
    fn mixed_corpus_composition() {
        let c = mixed_corpus(1).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c.iter().filter(|n| n.inst.kind() == Kind::Matching).count(), 40);
        assert!(c.iter().all(|n| n.inst.warnings().is_empty()));
        assert!(c.iter().filter(|n| n.inst.num_items() <= 7).count() >= 60);
        assert_eq!(c, mixed_corpus(1).unwrap());
    }

    #[test]
    fn degree_corpora_have_exact_degree() {
        for d in 1..=3 {
            assert!(degree_corpus(d, 10, 4).unwrap().iter().all(|n| n.inst.max_item_degree() == d));
        }
    }

    #[test]
    fn other_corpora_sizes() {
        assert_eq!(onbap_corpus(50, 2).unwrap().len(), 50);
        assert!(ongap_corpus(20, 3).unwrap().iter().all(|n| n.inst.kind() == Kind::Ongap));
    }
}
