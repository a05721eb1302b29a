//! Dual-fitting certificates. Each builder turns a run (and a random tape)
//! into a dual `(α, β)` whose objective equals the primal value; scaled
//! by `1/F` it is feasible in expectation.

mod builders;
mod certificate;

pub use builders::{
    build_dual_bounded_degree, build_dual_igreedy, build_dual_random_order, build_dual_vwf_worst,
    build_dual_wf_worst, expected_dual_vwf_worst, expected_dual_wf_worst, BoundedDegreeDual, IGreedyDual,
};
pub use certificate::{check_certificate, compatible_builders, Band1, EdgeVerdict, FeasibilityReport, ObjectiveBound};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TapeKind {
    /// One value per buyer.
    U,
    /// One value per item.
    Z,
}

/// Independent uniform `[0, 1)` draws, reproducible from `(seed, stream)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomTape {
    pub kind: TapeKind,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl RandomTape {
    pub fn sample(kind: TapeKind, len: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let values = (0..len).map(|_| rng.random::<f64>()).collect();
        RandomTape { kind, values, seed, stream }
    }

    pub fn u(inst: &Instance, seed: u64, stream: u64) -> Self {
        Self::sample(TapeKind::U, inst.num_buyers(), seed, stream)
    }

    pub fn z(inst: &Instance, seed: u64, stream: u64) -> Self {
        Self::sample(TapeKind::Z, inst.num_items(), seed, stream)
    }

    /// A tape with given values; each must lie in `[0, 1]`.
    pub fn from_values(kind: TapeKind, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("tape value {v} outside [0, 1]")));
        }
        Ok(RandomTape { kind, values, seed: 0, stream: 0 })
    }

    pub(crate) fn expect(&self, kind: TapeKind, len: usize) -> Result<()> {
        if self.kind != kind || self.values.len() != len {
            return Err(Error::TapeMismatch(format!(
                "expected a {kind:?} tape of length {len}, got {:?} of length {}",
                self.kind,
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// Items sorted by their `Z` value, ties by item index.
pub fn arrival_from_z(z: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    order
}

/// Dual variables for one realization. Constraint for edge `(i, j)`:
/// `w_ij α_i + β_j ≥ b_ij` (both are 1 for matching).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl DualSolution {
    pub fn zeros(inst: &Instance) -> Self {
        DualSolution { alpha: vec![0.0; inst.num_buyers()], beta: vec![0.0; inst.num_items()] }
    }

    /// `Σ B_i α_i + Σ β_j`.
    pub fn objective(&self, inst: &Instance) -> f64 {
        let a: f64 = self.alpha.iter().enumerate().map(|(i, a)| inst.budget_f64(i) * a).sum();
        a + self.beta.iter().sum::<f64>()
    }

    /// Left-hand side `w α_i + β_j` of the edge constraint.
    pub fn lhs(&self, inst: &Instance, edge: usize) -> f64 {
        let e = &inst.edges()[edge];
        inst.weight_f64(edge) * self.alpha[e.buyer] + self.beta[e.item]
    }

    /// `lhs - b_ij`.
    pub fn slack(&self, inst: &Instance, edge: usize) -> f64 {
        self.lhs(inst, edge) - inst.bid_f64(edge)
    }

    /// Items whose `β` realization is negative.
    pub fn negative_beta(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&j| self.beta[j] < 0.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ExpectationMode {
    ClosedForm,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeExpectation {
    pub mean_lhs: f64,
    pub se: f64,
}

/// Expected dual variables with per-edge expected constraint LHS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedDual {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mode: ExpectationMode,
    pub edges: Vec<EdgeExpectation>,
}

/// Dual construction to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    WfWorst,
    VwfWorst,
    RandomOrder,
    BoundedDegree,
    IGreedy,
}

impl Builder {
    pub const ALL: [Builder; 5] =
        [Builder::WfWorst, Builder::VwfWorst, Builder::RandomOrder, Builder::BoundedDegree, Builder::IGreedy];

    pub fn name(self) -> &'static str {
        match self {
            Builder::WfWorst => "wf-worst",
            Builder::VwfWorst => "vwf-worst",
            Builder::RandomOrder => "random-order",
            Builder::BoundedDegree => "bounded-degree",
            Builder::IGreedy => "igreedy",
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builder::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown builder `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tapes_are_reproducible_and_streams_differ() {
        let a = RandomTape::sample(TapeKind::U, 5, 9, 0);
        assert_eq!(a, RandomTape::sample(TapeKind::U, 5, 9, 0));
        assert_ne!(a.values, RandomTape::sample(TapeKind::U, 5, 9, 1).values);
        assert!(a.values.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn z_ties_break_by_index() {
        assert_eq!(arrival_from_z(&[0.5, 0.1, 0.5, 0.0]), vec![3, 1, 0, 2]);
    }

    #[test]
    fn builder_names_round_trip() {
        for b in Builder::ALL {
            assert_eq!(b.name().parse::<Builder>().unwrap(), b);
        }
        assert!("nope".parse::<Builder>().is_err());
    }

    #[test]
    fn tape_values_checked() {
        assert!(RandomTape::from_values(TapeKind::Z, vec![0.2, 1.5]).is_err());
    }
}
