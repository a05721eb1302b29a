//! Exact linear programming over arbitrary-precision rationals.
//!
//! Dense two-phase tableau simplex with Bland's rule. Every optimal
//! solution is returned with a dual certificate that is checked exactly
//! before it leaves [`solve_lp`].

mod offline;
mod simplex;

pub use offline::{factor_revealing_lp, offline_opt, FactorRevealing};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `opt c·x  s.t.  rows, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(direction: Direction, objective: Vec<Rational>) -> Self {
        Self { direction, objective, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.num_vars();
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Dimension(format!(
                    "constraint {r} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `primal`/`dual` are empty unless optimal. `dual[r]`
/// is the multiplier of constraint `r`, signed so that
/// `Σ rhs_r · dual_r = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub value: Option<Rational>,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
}

impl LpSolution {
    fn without_optimum(status: Status) -> Self {
        Self { status, value: None, primal: Vec::new(), dual: Vec::new() }
    }

    /// Exact optimality certificate: primal feasibility, dual feasibility
    /// with correct multiplier signs, strong duality, complementary slackness.
    pub fn verify(&self, lp: &LinearProgram) -> Result<()> {
        let fail = |m: String| Err(Error::Solver(format!("certificate check failed: {m}")));
        let Some(value) = &self.value else {
            return Ok(());
        };
        let n = lp.num_vars();
        if self.primal.len() != n || self.dual.len() != lp.constraints.len() {
            return fail("vector lengths".into());
        }
        if self.primal.iter().any(|v| v < &Rational::zero()) {
            return fail("negative primal".into());
        }
        let objective: Rational = lp.objective.iter().zip(&self.primal).map(|(c, x)| c * x).sum();
        if &objective != value {
            return fail("objective mismatch".into());
        }
        let max = lp.direction == Direction::Maximize;
        for (r, (c, y)) in lp.constraints.iter().zip(&self.dual).enumerate() {
            let lhs: Rational = c.coeffs.iter().zip(&self.primal).map(|(a, x)| a * x).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Eq => lhs == c.rhs,
                Sense::Ge => lhs >= c.rhs,
            };
            if !ok {
                return fail(format!("row {r} violated"));
            }
            // For max: Le >= 0, Ge <= 0; flipped for min.
            let sign_ok = match (c.sense, max) {
                (Sense::Eq, _) => true,
                (Sense::Le, true) | (Sense::Ge, false) => y >= &Rational::zero(),
                (Sense::Ge, true) | (Sense::Le, false) => y <= &Rational::zero(),
            };
            if !sign_ok {
                return fail(format!("dual sign on row {r}"));
            }
            if !y.is_zero() && lhs != c.rhs {
                return fail(format!("complementary slackness on row {r}"));
            }
        }
        let dual_value: Rational = lp.constraints.iter().zip(&self.dual).map(|(c, y)| &c.rhs * y).sum();
        if &dual_value != value {
            return fail("strong duality".into());
        }
        for j in 0..n {
            let col: Rational = lp.constraints.iter().zip(&self.dual).map(|(c, y)| &c.coeffs[j] * y).sum();
            let reduced = &col - &lp.objective[j];
            let ok = if max { reduced >= Rational::zero() } else { reduced <= Rational::zero() };
            if !ok {
                return fail(format!("dual infeasible at column {j}"));
            }
            if !self.primal[j].is_zero() && !reduced.is_zero() {
                return fail(format!("complementary slackness at column {j}"));
            }
        }
        Ok(())
    }
}

/// Solve exactly. Infeasible and unbounded programs are statuses, not errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check_dims()?;
    let sol = simplex::solve(lp);
    sol.verify(lp)?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn lp_max(obj: &[i64]) -> LinearProgram {
        LinearProgram::new(Direction::Maximize, obj.iter().map(|&c| int(c)).collect())
    }

    fn row(c: &[i64]) -> Vec<Rational> {
        c.iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn single_variable() {
        let mut lp = lp_max(&[1]);
        lp.add(row(&[1]), Sense::Le, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.value, Some(int(1)));
    }

    #[test]
    fn degenerate_tie_terminates() {
        let mut lp = lp_max(&[1, 1]);
        lp.add(row(&[1, 1]), Sense::Le, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, Some(int(1)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = lp_max(&[1]);
        lp.add(row(&[1]), Sense::Le, int(1)).add(row(&[1]), Sense::Ge, int(2));
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);

        let mut lp = lp_max(&[1, 1]);
        lp.add(row(&[1, -1]), Sense::Le, int(1));
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn minimisation_with_ge_and_eq() {
        // min 2x + 3y  s.t. x + y >= 4, x - y = 1  ->  x = 5/2, y = 3/2, value 19/2
        let mut lp = LinearProgram::new(Direction::Minimize, row(&[2, 3]));
        lp.add(row(&[1, 1]), Sense::Ge, int(4)).add(row(&[1, -1]), Sense::Eq, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, Some(ratio(19, 2)));
        assert_eq!(s.primal, vec![ratio(5, 2), ratio(3, 2)]);
        assert_eq!(s.dual, vec![ratio(5, 2), ratio(-1, 2)]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut lp = lp_max(&[1, 1]);
        lp.add(row(&[1]), Sense::Le, int(1));
        assert!(matches!(solve_lp(&lp), Err(Error::Dimension(_))));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Classic cycling example under Dantzig's rule; Bland's rule must finish.
        let mut lp = LinearProgram::new(
            Direction::Maximize,
            vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)],
        );
        lp.add(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Sense::Le, int(0))
            .add(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Sense::Le, int(0))
            .add(vec![int(0), int(0), int(1), int(0)], Sense::Le, int(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, Some(ratio(1, 20)));
    }

    #[test]
    fn empty_program() {
        let lp = lp_max(&[]);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, Some(int(0)));
    }
}
