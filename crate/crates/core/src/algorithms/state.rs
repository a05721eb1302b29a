use crate::allocation::{Allocation, Outcome, Producer, RunTrace, Step, Touch};
use crate::error::{Error, Result};
use crate::instance::Instance;

use super::scalar::Field;

/// Mutable run state shared by the online algorithms.
pub(crate) struct RunState<'a, T: Field> {
    pub inst: &'a Instance,
    pub y: Vec<T>,
    pub x: Vec<T>,
    pub budget: Vec<T>,
    pub bid: Vec<T>,
    pub weight: Vec<T>,
    steps: Vec<Step>,
    before: Vec<f64>,
}

impl<'a, T: Field> RunState<'a, T> {
    pub fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            y: vec![T::zero(); inst.num_buyers()],
            x: vec![T::zero(); inst.num_edges()],
            budget: inst.buyers().iter().map(|b| T::from_rational(&b.budget)).collect(),
            bid: inst.edges().iter().map(|e| T::from_rational(&e.bid)).collect(),
            weight: inst.edges().iter().map(|e| T::from_rational(&e.weight)).collect(),
            steps: Vec::with_capacity(inst.num_items()),
            before: Vec::new(),
        }
    }

    pub fn buyer(&self, edge: usize) -> usize {
        self.inst.edges()[edge].buyer
    }

    pub fn remaining(&self, buyer: usize) -> T {
        self.budget[buyer].clone() - self.y[buyer].clone()
    }

    pub fn has_room(&self, buyer: usize) -> bool {
        self.remaining(buyer).is_positive()
    }

    pub fn normalized(&self, buyer: usize) -> f64 {
        let b = self.budget[buyer].to_f64();
        if b > 0.0 {
            self.y[buyer].to_f64() / b
        } else {
            1.0
        }
    }

    /// Edges of `item` with a positive bid: zero-bid edges never receive mass.
    pub fn live_edges(&self, item: usize) -> Vec<usize> {
        self.inst.item_edges(item).filter(|&k| self.bid[k].is_positive()).collect()
    }

    pub fn begin(&mut self, item: usize) {
        self.before = self
            .inst
            .item_edges(item)
            .map(|k| self.y[self.buyer(k)].to_f64())
            .collect();
    }

    pub fn end(&mut self, item: usize, rank: usize, outcome: Outcome) {
        let mut touches = Vec::new();
        let mut delta = T::zero();
        let mut mass = T::zero();
        for (n, k) in self.inst.item_edges(item).enumerate() {
            let buyer = self.buyer(k);
            touches.push(Touch {
                edge: k,
                buyer,
                before: self.before[n],
                after: self.y[buyer].to_f64(),
                x: self.x[k].to_f64(),
            });
            delta = delta + self.bid[k].clone() * self.x[k].clone();
            mass = mass + self.x[k].clone();
        }
        self.steps.push(Step {
            item,
            rank,
            touches,
            delta_primal: delta.to_f64(),
            mass: mass.to_f64(),
            outcome,
        });
    }

    pub fn finish(self, producer: Producer, order: &[usize]) -> (Allocation, RunTrace) {
        let exact: Option<Vec<_>> = self.x.iter().map(|v| v.to_rational()).collect();
        let alloc = match exact {
            Some(x) => Allocation::from_exact(x),
            None => Allocation::from_f64(self.x.iter().map(|v| v.to_f64()).collect()),
        };
        let trace = RunTrace {
            producer,
            order: order.to_vec(),
            steps: self.steps,
            final_levels: self.y.iter().map(|v| v.to_f64()).collect(),
        };
        (alloc, trace)
    }
}

/// Orders may be any sequence of distinct items (prefixes are used by the
/// monotonicity probe).
pub(crate) fn check_order(inst: &Instance, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; inst.num_items()];
    for &j in order {
        match seen.get_mut(j) {
            Some(s) if !*s => *s = true,
            _ => return Err(Error::InvalidParameter(format!("bad or repeated item #{j} in order"))),
        }
    }
    Ok(())
}
