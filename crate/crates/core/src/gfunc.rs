//! The dual-fitting weight function `g` with antiderivative `G` and
//! constant `F`, tied together by `G(t) + 1 - g(t) = F` on `[0, 1]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Scalar = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Shape {
    Exponential,
    Custom {
        g: Arc<Scalar>,
        antiderivative: Arc<Scalar>,
        factor: f64,
        slope_at_zero: f64,
    },
}

/// `g: [0,1] -> [0,1]`, non-decreasing, `g(1) = 1`.
#[derive(Clone)]
pub struct GFunction {
    shape: Shape,
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Exponential => f.write_str("GFunction(exp(x-1))"),
            Shape::Custom { factor, .. } => write!(f, "GFunction(custom, F={factor})"),
        }
    }
}

/// `g(x) = e^{x-1}`, `G(t) = e^{t-1} - e^{-1}`, `F = 1 - 1/e`.
pub fn g_exponential() -> GFunction {
    GFunction { shape: Shape::Exponential }
}

impl GFunction {
    /// A user-supplied `g`. Not checked here; see [`GFunction::validate`].
    pub fn custom(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        antiderivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        factor: f64,
        slope_at_zero: f64,
    ) -> Self {
        Self {
            shape: Shape::Custom {
                g: Arc::new(g),
                antiderivative: Arc::new(antiderivative),
                factor,
                slope_at_zero,
            },
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.shape, Shape::Exponential)
    }

    pub fn g(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Exponential => (t - 1.0).exp(),
            Shape::Custom { g, .. } => g(t),
        }
    }

    /// `G(t) = ∫_0^t g`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Exponential => (t - 1.0).exp() - (-1.0f64).exp(),
            Shape::Custom { antiderivative, .. } => antiderivative(t),
        }
    }

    pub fn factor(&self) -> f64 {
        match &self.shape {
            Shape::Exponential => 1.0 - (-1.0f64).exp(),
            Shape::Custom { factor, .. } => *factor,
        }
    }

    /// `g'(0)`.
    pub fn slope_at_zero(&self) -> f64 {
        match &self.shape {
            Shape::Exponential => (-1.0f64).exp(),
            Shape::Custom { slope_at_zero, .. } => *slope_at_zero,
        }
    }

    /// `G(t) + 1 - g(t) - F`.
    pub fn residual(&self, t: f64) -> f64 {
        self.antiderivative(t) + 1.0 - self.g(t) - self.factor()
    }

    /// Largest `|residual|` over `points` evenly spaced grid points on `[0,1]`.
    pub fn max_residual(&self, points: usize) -> f64 {
        grid(points).map(|t| self.residual(t).abs()).fold(0.0, f64::max)
    }

    /// Check boundary condition, monotonicity and the integral equation on
    /// a sampled grid.
    pub fn validate(&self, points: usize, tol: f64) -> Result<()> {
        if (self.g(1.0) - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!("g(1) = {} != 1", self.g(1.0))));
        }
        let mut prev = f64::NEG_INFINITY;
        for t in grid(points) {
            let v = self.g(t);
            if !(0.0..=1.0 + tol).contains(&v) || v + tol < prev {
                return Err(Error::InvalidParameter(format!("g not monotone in [0,1] at t = {t}")));
            }
            prev = v;
        }
        let r = self.max_residual(points);
        if r > tol {
            return Err(Error::InvalidParameter(format!("integral equation residual {r:e}")));
        }
        Ok(())
    }

    /// `g^{-1}(u)` clamped to `[0, 1]`: closed form for the exponential,
    /// bisection otherwise.
    pub fn inverse(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Exponential => {
                if u <= 0.0 {
                    0.0
                } else {
                    (1.0 + u.ln()).clamp(0.0, 1.0)
                }
            }
            Shape::Custom { g, .. } => {
                if u <= g(0.0) {
                    return 0.0;
                }
                if u >= g(1.0) {
                    return 1.0;
                }
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    let n = points.max(2);
    (0..n).map(move |k| k as f64 / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn exponential_boundary_and_constant() {
        let g = g_exponential();
        assert_eq!(g.g(1.0), 1.0);
        assert!((g.antiderivative(1.0) - 0.6321205588).abs() < 1e-10);
        assert!((g.factor() - (E - 1.0) / E).abs() < 1e-15);
        assert!(g.residual(0.37).abs() < 1e-15);
    }

    #[test]
    fn exponential_passes_grid_validation() {
        let g = g_exponential();
        assert!(g.max_residual(10_000) <= 1e-12);
        g.validate(10_000, 1e-12).unwrap();
    }

    #[test]
    fn inverse_round_trips() {
        let g = g_exponential();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!((g.inverse(g.g(t)) - t).abs() < 1e-12);
        }
        assert_eq!(g.inverse(0.0), 0.0);
        assert_eq!(g.inverse(2.0), 1.0);
    }

    #[test]
    fn custom_bisection_inverse_matches_closed_form() {
        let custom = GFunction::custom(
            |t| (t - 1.0).exp(),
            |t| (t - 1.0).exp() - (-1.0f64).exp(),
            1.0 - (-1.0f64).exp(),
            (-1.0f64).exp(),
        );
        let exact = g_exponential();
        for k in 1..20 {
            let u = 0.4 + 0.03 * k as f64;
            assert!((custom.inverse(u) - exact.inverse(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_functions() {
        let not_one = GFunction::custom(|t| 0.5 * t, |t| 0.25 * t * t, 0.5, 0.5);
        assert!(not_one.validate(100, 1e-9).is_err());
        let decreasing = GFunction::custom(|t| 2.0 - t, |t| 2.0 * t - 0.5 * t * t, 0.5, -1.0);
        assert!(decreasing.validate(100, 1e-9).is_err());
        // monotone, g(1)=1, but violates the integral equation
        let linear = GFunction::custom(|t| t, |t| 0.5 * t * t, 0.5, 1.0);
        assert!(linear.validate(100, 1e-9).is_err());
    }
}
