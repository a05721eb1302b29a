use num_traits::{One, Zero};

use super::{solve_lp, Direction, LinearProgram, Sense, Status};
use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{pow2, Rational};

/// Exact optimum of the instance's primal LP:
/// `max Σ b x  s.t.  Σ_j w_ij x_ij <= B_i,  Σ_i x_ij <= 1,  x >= 0`.
pub fn offline_opt(inst: &Instance) -> Result<(Rational, Allocation)> {
    let n = inst.num_edges();
    let mut lp = LinearProgram::new(
        Direction::Maximize,
        inst.edges().iter().map(|e| e.bid.clone()).collect(),
    );
    for (i, buyer) in inst.buyers().iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        let mut any = false;
        for (k, e) in inst.edges().iter().enumerate() {
            if e.buyer == i && !e.weight.is_zero() {
                row[k] = e.weight.clone();
                any = true;
            }
        }
        if any {
            lp.add(row, Sense::Le, buyer.budget.clone());
        }
    }
    for j in 0..inst.num_items() {
        let range = inst.item_edges(j);
        if range.is_empty() {
            continue;
        }
        let mut row = vec![Rational::zero(); n];
        for k in range {
            row[k] = Rational::one();
        }
        lp.add(row, Sense::Le, Rational::one());
    }
    let sol = solve_lp(&lp)?;
    match (sol.status, sol.value) {
        (Status::Optimal, Some(value)) => Ok((value, Allocation::from_exact(sol.primal))),
        (status, _) => Err(Error::Solver(format!("offline LP ended {status:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorRevealing {
    pub alpha_star: Rational,
    /// Budget share `c_t` spent on bundle `t`.
    pub c: Vec<Rational>,
}

/// `max α  s.t.  Σ_{t<k} c_t <= 1,  α <= Σ_{t<=s} c_t 2^{t-s}  (s < k)`.
/// Upper-bounds the competitive ratio of any online algorithm on the
/// k-bundle hard family.
pub fn factor_revealing_lp(k: usize) -> Result<FactorRevealing> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    // variables: c_0..c_{k-1}, α
    let mut objective = vec![Rational::zero(); k + 1];
    objective[k] = Rational::one();
    let mut lp = LinearProgram::new(Direction::Maximize, objective);
    let mut budget = vec![Rational::one(); k + 1];
    budget[k] = Rational::zero();
    lp.add(budget, Sense::Le, Rational::one());
    for s in 0..k {
        let mut row = vec![Rational::zero(); k + 1];
        for (t, v) in row.iter_mut().enumerate().take(s + 1) {
            *v = -pow2(t as i64 - s as i64);
        }
        row[k] = Rational::one();
        lp.add(row, Sense::Le, Rational::zero());
    }
    let sol = solve_lp(&lp)?;
    let value = sol
        .value
        .ok_or_else(|| Error::Solver(format!("factor-revealing LP ended {:?}", sol.status)))?;
    Ok(FactorRevealing { alpha_star: value, c: sol.primal[..k].to_vec() })
}
