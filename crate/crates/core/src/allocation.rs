//! Fractional allocations and the per-item run traces dual builders read.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{self, Rational};

/// Per-item mass and per-buyer spend may exceed their caps by this much
/// in floating point.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Allocation `x` indexed by edge. `exact` is present when the producing
/// path ran in rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    x: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl Allocation {
    pub fn zeros(inst: &Instance) -> Self {
        Self {
            x: vec![0.0; inst.num_edges()],
            exact: Some(vec![Rational::zero(); inst.num_edges()]),
        }
    }

    pub fn from_f64(x: Vec<f64>) -> Self {
        Self { x, exact: None }
    }

    pub fn from_exact(exact: Vec<Rational>) -> Self {
        Self { x: exact.iter().map(rational::to_f64).collect(), exact: Some(exact) }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// `y_i = Σ_j w_ij x_ij`.
    pub fn levels(&self, inst: &Instance) -> Vec<f64> {
        let mut y = vec![0.0; inst.num_buyers()];
        for (k, e) in inst.edges().iter().enumerate() {
            y[e.buyer] += inst.weight_f64(k) * self.x[k];
        }
        y
    }

    /// `ȳ_i = y_i / B_i`; buyers with zero budget report 1.
    pub fn normalized_levels(&self, inst: &Instance) -> Vec<f64> {
        self.levels(inst)
            .into_iter()
            .enumerate()
            .map(|(i, y)| {
                let b = inst.budget_f64(i);
                if b > 0.0 {
                    y / b
                } else {
                    1.0
                }
            })
            .collect()
    }

    pub fn item_mass(&self, inst: &Instance, item: usize) -> f64 {
        inst.item_edges(item).map(|k| self.x[k]).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Feasibility for the instance's primal LP: exactly when rational
    /// values are present, to [`FEASIBILITY_TOL`] otherwise.
    pub fn check_feasible(&self, inst: &Instance) -> Result<()> {
        if self.x.len() != inst.num_edges() {
            return Err(Error::Dimension(format!(
                "allocation has {} entries, instance has {} edges",
                self.x.len(),
                inst.num_edges()
            )));
        }
        if let Some(exact) = &self.exact {
            return check_exact(inst, exact);
        }
        if let Some(k) = self.x.iter().position(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InfeasibleAllocation(format!("x[{k}] = {} < 0", self.x[k])));
        }
        for j in 0..inst.num_items() {
            let m = self.item_mass(inst, j);
            if m > 1.0 + FEASIBILITY_TOL {
                return Err(Error::InfeasibleAllocation(format!(
                    "item `{}` allocated mass {m}",
                    inst.items()[j].id
                )));
            }
        }
        for (i, y) in self.levels(inst).into_iter().enumerate() {
            if y > inst.budget_f64(i) + FEASIBILITY_TOL {
                return Err(Error::InfeasibleAllocation(format!(
                    "buyer `{}` spends {y} over budget {}",
                    inst.buyers()[i].id,
                    inst.budget_f64(i)
                )));
            }
        }
        Ok(())
    }
}

fn check_exact(inst: &Instance, x: &[Rational]) -> Result<()> {
    if let Some(k) = x.iter().position(|v| v < &Rational::zero()) {
        return Err(Error::InfeasibleAllocation(format!("x[{k}] < 0")));
    }
    for (j, it) in inst.items().iter().enumerate() {
        let mass: Rational = inst.item_edges(j).map(|k| x[k].clone()).sum();
        if mass > Rational::one() {
            return Err(Error::InfeasibleAllocation(format!(
                "item `{}` allocated mass {}",
                it.id,
                rational::format(&mass)
            )));
        }
    }
    let mut spend = vec![Rational::zero(); inst.num_buyers()];
    for (k, e) in inst.edges().iter().enumerate() {
        spend[e.buyer] += &e.weight * &x[k];
    }
    for (i, s) in spend.iter().enumerate() {
        if s > &inst.buyers()[i].budget {
            return Err(Error::InfeasibleAllocation(format!(
                "buyer `{}` spends {} over budget",
                inst.buyers()[i].id,
                rational::format(s)
            )));
        }
    }
    Ok(())
}

/// `Σ b_ij x_ij` (for matching, every bid is 1).
pub fn primal_value(inst: &Instance, alloc: &Allocation) -> Result<f64> {
    alloc.check_feasible(inst)?;
    Ok(alloc.x.iter().enumerate().map(|(k, v)| inst.bid_f64(k) * v).sum())
}

/// Exact objective; needs an allocation produced in rational arithmetic.
pub fn primal_value_exact(inst: &Instance, alloc: &Allocation) -> Result<Rational> {
    alloc.check_feasible(inst)?;
    let exact = alloc
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("allocation carries no exact values".into()))?;
    Ok(inst.edges().iter().zip(exact).map(|(e, x)| &e.bid * x).sum())
}

/// Which routine produced a trace; dual builders check it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Producer {
    WaterFilling,
    VirtualWaterFilling,
    Greedy,
    IGreedy,
    Ranking,
}

impl Producer {
    pub fn name(self) -> &'static str {
        match self {
            Producer::WaterFilling => "water-filling",
            Producer::VirtualWaterFilling => "virtual-wf",
            Producer::Greedy => "greedy",
            Producer::IGreedy => "i-greedy",
            Producer::Ranking => "ranking",
        }
    }
}

/// Level of one neighbour of the processed item, before and after.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Touch {
    pub edge: usize,
    pub buyer: usize,
    pub before: f64,
    pub after: f64,
    pub x: f64,
}

impl Touch {
    pub fn raised(&self) -> bool {
        self.after > self.before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    /// Processed normally (possibly with zero mass if every neighbour was full).
    Allocated,
    /// Integral rule declined the item: the max bidder could not afford it.
    Skipped { max_bidder: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub item: usize,
    pub rank: usize,
    /// Every neighbour of `item`, in edge order.
    pub touches: Vec<Touch>,
    pub delta_primal: f64,
    pub mass: f64,
    pub outcome: Outcome,
}

impl Step {
    /// `L(j)`: neighbours whose level increased.
    pub fn raised(&self) -> impl Iterator<Item = &Touch> {
        self.touches.iter().filter(|t| t.raised())
    }
}

/// Record of a run, one [`Step`] per arrival.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub producer: Producer,
    pub order: Vec<usize>,
    pub steps: Vec<Step>,
    /// Absolute levels `y_i` at the end.
    pub final_levels: Vec<f64>,
}

impl RunTrace {
    pub fn primal(&self) -> f64 {
        self.steps.iter().map(|s| s.delta_primal).sum()
    }

    /// `Y^c(i,j)`: level of the edge's buyer when its item finished.
    pub fn critical_levels(&self, inst: &Instance) -> Vec<Option<f64>> {
        let mut out = vec![None; inst.num_edges()];
        for s in &self.steps {
            for t in &s.touches {
                out[t.edge] = Some(t.after);
            }
        }
        out
    }

    pub fn skipped(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| matches!(s.outcome, Outcome::Skipped { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::load_instance;
    use crate::rational::ratio;

    fn tri2() -> Instance {
        load_instance(
            r#"{"kind":"matching","buyers":[{"id":"b1"},{"id":"b2"}],
                "items":[{"id":"j1","edges":[{"buyer":"b1"},{"buyer":"b2"}]},
                         {"id":"j2","edges":[{"buyer":"b2"}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn values_of_simple_allocations() {
        let inst = load_instance(
            r#"{"kind":"matching","buyers":[{"id":"b1"}],"items":[{"id":"j1","edges":[{"buyer":"b1"}]}]}"#,
        )
        .unwrap();
        let x = Allocation::from_exact(vec![ratio(1, 1)]);
        assert_eq!(primal_value(&inst, &x).unwrap(), 1.0);
        assert_eq!(primal_value(&inst, &Allocation::zeros(&inst)).unwrap(), 0.0);
    }

    #[test]
    fn triangular_water_filling_value() {
        let inst = tri2();
        let x = Allocation::from_exact(vec![ratio(1, 2), ratio(1, 2), ratio(1, 2)]);
        assert_eq!(primal_value_exact(&inst, &x).unwrap(), ratio(3, 2));
    }

    #[test]
    fn infeasible_allocations_rejected() {
        let inst = tri2();
        let over_item = Allocation::from_exact(vec![ratio(2, 3), ratio(2, 3), ratio(0, 1)]);
        assert!(matches!(primal_value(&inst, &over_item), Err(Error::InfeasibleAllocation(_))));
        let over_budget = Allocation::from_f64(vec![0.0, 0.7, 0.7]);
        assert!(matches!(primal_value(&inst, &over_budget), Err(Error::InfeasibleAllocation(_))));
        let negative = Allocation::from_f64(vec![-0.1, 0.0, 0.0]);
        assert!(primal_value(&inst, &negative).is_err());
        assert!(matches!(
            primal_value(&inst, &Allocation::from_f64(vec![0.0])),
            Err(Error::Dimension(_))
        ));
    }
}
