use num_traits::{Signed, Zero};

use super::{Direction, LinearProgram, LpSolution, Sense, Status};
use crate::rational::Rational;

/// Dense tableau. Columns: structural, one slack per `<=` row, then
/// artificials. `obj[j]` holds the reduced cost `z_j - c_j` of a
/// maximisation; the last entry of each row is its right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    allowed: Vec<bool>,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let mut prow = std::mem::take(&mut self.rows[r]);
        let p = prow[c].clone();
        for v in prow.iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        let eliminate = |target: &mut Vec<Rational>| {
            let f = target[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                let d = &f * &prow[k];
                target[k] -= d;
            }
        };
        for (q, row) in self.rows.iter_mut().enumerate() {
            if q != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Bland's rule iterations. Returns `false` if unbounded.
    fn run(&mut self) -> bool {
        let rhs = self.rhs_col();
        loop {
            let Some(c) = (0..rhs).find(|&j| self.allowed[j] && self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        // obj_j = Σ_r c_{B_r} a_{r,j} - c_j
        let width = self.obj.len();
        let mut obj: Vec<Rational> = (0..width)
            .map(|j| if j < costs.len() { -costs[j].clone() } else { Rational::zero() })
            .collect();
        for (r, row) in self.rows.iter().enumerate() {
            let b = self.basis[r];
            if b >= costs.len() || costs[b].is_zero() {
                continue;
            }
            let cb = &costs[b];
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    obj[j] += cb * v;
                }
            }
        }
        self.obj = obj;
    }
}

pub(super) fn solve(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    let sign = if lp.direction == Direction::Maximize { Rational::from_integer(1.into()) } else { Rational::from_integer((-1).into()) };

    // Expand to `<=` rows, remembering (original row, multiplier).
    let mut le: Vec<(Vec<Rational>, Rational, usize, i32)> = Vec::new();
    for (r, c) in lp.constraints.iter().enumerate() {
        let neg = |v: &[Rational]| v.iter().map(|a| -a.clone()).collect::<Vec<_>>();
        match c.sense {
            Sense::Le => le.push((c.coeffs.clone(), c.rhs.clone(), r, 1)),
            Sense::Ge => le.push((neg(&c.coeffs), -c.rhs.clone(), r, -1)),
            Sense::Eq => {
                le.push((c.coeffs.clone(), c.rhs.clone(), r, 1));
                le.push((neg(&c.coeffs), -c.rhs.clone(), r, -1));
            }
        }
    }
    let m = le.len();
    let needs_art: Vec<usize> = (0..m).filter(|&r| le[r].1.is_negative()).collect();
    let a = needs_art.len();
    let width = n + m + a + 1;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_of_row = vec![None; m];
    for (k, &r) in needs_art.iter().enumerate() {
        art_of_row[r] = Some(n + m + k);
    }
    for (r, (coeffs, rhs, _, _)) in le.iter().enumerate() {
        let mut row = vec![Rational::zero(); width];
        row[..n].clone_from_slice(coeffs);
        row[n + r] = Rational::from_integer(1.into());
        row[width - 1] = rhs.clone();
        match art_of_row[r] {
            Some(col) => {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
                row[col] = Rational::from_integer(1.into());
                basis.push(col);
            }
            None => basis.push(n + r),
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: vec![Rational::zero(); width],
        basis,
        allowed: vec![true; width - 1],
    };

    if a > 0 {
        let mut phase1 = vec![Rational::zero(); n + m + a];
        for k in 0..a {
            phase1[n + m + k] = Rational::from_integer((-1).into());
        }
        t.set_objective(&phase1);
        t.run();
        if t.obj[width - 1].is_negative() {
            return LpSolution::without_optimum(Status::Infeasible);
        }
        // Drive zero-valued artificials out; slack columns guarantee a pivot exists.
        for r in 0..m {
            if t.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| !t.rows[r][j].is_zero()) {
                    t.pivot(r, c);
                }
            }
        }
        for k in 0..a {
            t.allowed[n + m + k] = false;
        }
    }

    let costs: Vec<Rational> = lp.objective.iter().map(|c| c * &sign).collect();
    t.set_objective(&costs);
    if !t.run() {
        return LpSolution::without_optimum(Status::Unbounded);
    }

    let mut primal = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            primal[b] = t.rows[r][width - 1].clone();
        }
    }
    let value_max = t.obj[width - 1].clone();
    let mut dual = vec![Rational::zero(); lp.constraints.len()];
    for (r, (_, _, orig, mult)) in le.iter().enumerate() {
        let y = &t.obj[n + r];
        if *mult > 0 {
            dual[*orig] += y;
        } else {
            dual[*orig] -= y;
        }
    }
    for y in dual.iter_mut() {
        *y *= &sign;
    }
    LpSolution { status: Status::Optimal, value: Some(value_max * &sign), primal, dual }
}
