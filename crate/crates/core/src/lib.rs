//! Online allocation algorithms (water-filling, virtual water-filling,
//! greedy, RANKING, bucketed OnGAP) paired with executable dual-fitting
//! certificates and an exact rational LP for offline optima.

pub mod algorithms;
pub mod allocation;
pub mod dualfit;
pub mod error;
pub mod gfunc;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod ongap;
pub mod parallel;
pub mod rational;

pub use algorithms::{Algo, Precision, TiePolicy};
pub use allocation::{primal_value, primal_value_exact, Allocation, RunTrace};
pub use dualfit::{check_certificate, Builder, DualSolution, FeasibilityReport, RandomTape};
pub use error::{Error, Result};
pub use gfunc::{g_exponential, GFunction};
pub use instance::{load_instance, Instance, Kind, Warning};
pub use rational::Rational;
