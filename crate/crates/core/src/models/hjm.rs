//! Deterministic forward-rate volatilities in the Musiela parametrization and
//! the no-arbitrage drift they imply.

use std::fmt;
use std::sync::Arc;

use crate::quadrature::adaptive_simpson;

/// Absolute tolerance for `∫₀^τ σ(t,s) ds` when no closed form is known.
pub const DRIFT_QUADRATURE_TOL: f64 = 1e-12;

type VolFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Volatility `σ(t, τ)` of the forward rate with time to maturity `τ`.
#[derive(Clone)]
pub enum Volatility {
    /// `σ` (Ho-Lee).
    Constant { sigma: f64 },
    /// `σ e^{-aτ}` (Hull-White).
    ExpDecay { sigma: f64, rate: f64 },
    /// Arbitrary deterministic `(t, τ) ↦ σ(t, τ)`.
    Custom(Arc<VolFn>),
}

impl Volatility {
    pub fn custom<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Volatility::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        match self {
            Volatility::Constant { sigma } => *sigma,
            Volatility::ExpDecay { sigma, rate } => sigma * (-rate * tau).exp(),
            Volatility::Custom(f) => f(t, tau),
        }
    }

    /// `∫₀^τ σ(t, s) ds`.
    pub fn integral(&self, t: f64, tau: f64) -> f64 {
        match self {
            Volatility::Constant { sigma } => sigma * tau,
            Volatility::ExpDecay { sigma, rate } => sigma * -(-rate * tau).exp_m1() / rate,
            Volatility::Custom(f) => adaptive_simpson(|s| f(t, s), 0.0, tau, DRIFT_QUADRATURE_TOL),
        }
    }

    /// HJM drift add-on `σ(t,τ) ∫₀^τ σ(t,s) ds`.
    pub fn drift_addon(&self, t: f64, tau: f64) -> f64 {
        self.eval(t, tau) * self.integral(t, tau)
    }
}

impl fmt::Debug for Volatility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Volatility::Constant { sigma } => {
                f.debug_struct("Constant").field("sigma", sigma).finish()
            }
            Volatility::ExpDecay { sigma, rate } => f
                .debug_struct("ExpDecay")
                .field("sigma", sigma)
                .field("rate", rate)
                .finish(),
            Volatility::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}
