use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

use super::{Algo, Precision};

const LEVEL_TOL: f64 = 1e-9;

/// A pair of prefixes with `y_old(short) ⪯ y_old(long)` whose common next
/// item leaves `y_new(short)[buyer] > y_new(long)[buyer]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub short: Vec<usize>,
    pub long: Vec<usize>,
    pub item: usize,
    pub buyer: usize,
    pub short_level: f64,
    pub long_level: f64,
}

/// Searches for counterexamples to allocation monotonicity by sampling
/// `long` prefixes and deleting random items from them to get `short`.
pub fn probe_allocation_monotonicity(
    algo: &Algo,
    inst: &Instance,
    trials: usize,
    seed: u64,
) -> Result<Vec<Violation>> {
    if !algo.is_fractional() {
        return Err(Error::InvalidParameter(format!("{} is not a fractional algorithm", algo.name())));
    }
    let mut out = Vec::new();
    if inst.num_items() == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = |order: &[usize]| -> Result<Vec<f64>> {
        Ok(algo.run_order(inst, order, Precision::Fast)?.1.final_levels)
    };
    for _ in 0..trials {
        let mut rest: Vec<usize> = (0..inst.num_items()).collect();
        rest.shuffle(&mut rng);
        let item = rest.pop().unwrap();
        let len = rng.random_range(0..=rest.len());
        let long: Vec<usize> = rest[..len].to_vec();
        let short: Vec<usize> = long.iter().copied().filter(|_| rng.random_bool(0.5)).collect();

        let (old_s, old_l) = (levels(&short)?, levels(&long)?);
        if old_s.iter().zip(&old_l).any(|(s, l)| s > &(l + LEVEL_TOL)) {
            continue;
        }
        let with = |p: &[usize]| [p, &[item]].concat();
        let (new_s, new_l) = (levels(&with(&short))?, levels(&with(&long))?);
        if let Some(buyer) = (0..new_s.len()).find(|&i| new_s[i] > new_l[i] + LEVEL_TOL) {
            out.push(Violation {
                short,
                long,
                item,
                buyer,
                short_level: new_s[buyer],
                long_level: new_l[buyer],
            });
        }
    }
    Ok(out)
}
