//! Online primal algorithms. Each returns the allocation together with a
//! [`RunTrace`] consumed by the dual builders.

mod greedy;
mod monotonicity;
mod ranking;
mod scalar;
mod state;
mod tie;
mod virtual_wf;
pub(crate) mod water_filling;

pub use greedy::{greedy_fractional, i_greedy};
pub use monotonicity::{probe_allocation_monotonicity, Violation};
pub use ranking::{ranking, Priorities};
pub use scalar::Field;
pub use tie::TiePolicy;
pub use virtual_wf::{virtual_level, virtual_water_filling};
pub use water_filling::water_filling;

use crate::allocation::{Allocation, RunTrace};
use crate::error::Result;
use crate::gfunc::GFunction;
use crate::instance::Instance;
use crate::rational::Rational;

/// Arithmetic for algorithms that support both paths. Virtual
/// water-filling is always `Fast`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Exact,
    Fast,
}

/// An online algorithm with its parameters.
#[derive(Debug, Clone)]
pub enum Algo {
    WaterFilling,
    VirtualWaterFilling(GFunction),
    Greedy(TiePolicy),
    IGreedy(TiePolicy),
    Ranking(Priorities),
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::WaterFilling => "water-filling",
            Algo::VirtualWaterFilling(_) => "virtual-wf",
            Algo::Greedy(_) => "greedy",
            Algo::IGreedy(_) => "i-greedy",
            Algo::Ranking(_) => "ranking",
        }
    }

    pub fn is_fractional(&self) -> bool {
        matches!(self, Algo::WaterFilling | Algo::VirtualWaterFilling(_) | Algo::Greedy(_))
    }

    pub fn run(&self, inst: &Instance, precision: Precision) -> Result<(Allocation, RunTrace)> {
        self.run_order(inst, inst.arrival(), precision)
    }

    /// Runs on `order`, which may be any sequence of distinct items.
    pub fn run_order(
        &self,
        inst: &Instance,
        order: &[usize],
        precision: Precision,
    ) -> Result<(Allocation, RunTrace)> {
        match (self, precision) {
            (Algo::WaterFilling, Precision::Exact) => water_filling::water_filling_on::<Rational>(inst, order),
            (Algo::WaterFilling, Precision::Fast) => water_filling::water_filling_on::<f64>(inst, order),
            (Algo::VirtualWaterFilling(g), _) => virtual_wf::virtual_water_filling_on(inst, order, g),
            (Algo::Greedy(p), Precision::Exact) => greedy::greedy_on::<Rational>(inst, order, p),
            (Algo::Greedy(p), Precision::Fast) => greedy::greedy_on::<f64>(inst, order, p),
            (Algo::IGreedy(p), Precision::Exact) => greedy::i_greedy_on::<Rational>(inst, order, p),
            (Algo::IGreedy(p), Precision::Fast) => greedy::i_greedy_on::<f64>(inst, order, p),
            (Algo::Ranking(p), Precision::Exact) => ranking::ranking_on::<Rational>(inst, order, p),
            (Algo::Ranking(p), Precision::Fast) => ranking::ranking_on::<f64>(inst, order, p),
        }
    }
}
