//! Numerical consistency test between a short-rate model and a linear forward
//! curve manifold `G(τ; z) = Σ zᵢ φᵢ(τ)`.
//!
//! For such a family the parameter derivative `G_z` is the basis itself, so
//! both the drift condition
//!
//! ```text
//! G_τ(·; z) + σ(t,·)∫₀^· σ(t,s) ds + φ(t,·) ∈ span(basis)
//! ```
//!
//! and the volatility condition `σ(t,·) ∈ span(basis)` reduce to asking
//! whether a function is a linear combination of the basis. That is decided
//! by a least-squares fit on an overdetermined maturity grid: the sup-norm
//! residual must vanish (up to `tolerance`) for every sampled `(t, z)`.
//!
//! Volatilities here are deterministic, so the Stratonovich correction `φ`
//! is identically zero.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{default_tau_grid, fit_in_basis_l2, rates_collide, CurveInBasis, FactorBasis};
use crate::error::{Error, Result};
use crate::models::{ShortRateModel, Volatility};

/// Default sup-norm tolerance (rate units) for a `consistent` verdict.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A residual must exceed `INCONSISTENCY_FACTOR × tolerance` to count as a
/// failure; anything between is `indeterminate`.
pub const INCONSISTENCY_FACTOR: f64 = 100.0;

/// Times at which the drift condition is sampled by default.
pub const DEFAULT_T_SAMPLES: [f64; 3] = [0.0, 1.0, 5.0];

/// The Stratonovich correction for deterministic volatilities.
pub const STRATONOVICH_CORRECTION: f64 = 0.0;

pub type DriftAddon = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ConsistencyProblem {
    basis: FactorBasis,
    state_basis: FactorBasis,
    drift_addon: DriftAddon,
    volatility: Volatility,
    tau_grid: Vec<f64>,
    t_samples: Vec<f64>,
}

impl std::fmt::Debug for ConsistencyProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConsistencyProblem")
            .field("basis", &self.basis.to_string())
            .field("state_basis", &self.state_basis.to_string())
            .field("volatility", &self.volatility)
            .field("tau_grid", &self.tau_grid.len())
            .field("t_samples", &self.t_samples)
            .finish()
    }
}

impl ConsistencyProblem {
    /// Problem whose drift add-on is the HJM term `σ(t,τ)∫₀^τ σ(t,s) ds`.
    pub fn new(
        basis: FactorBasis,
        volatility: Volatility,
        tau_grid: Vec<f64>,
        t_samples: Vec<f64>,
    ) -> Result<Self> {
        let vol = volatility.clone();
        let drift: DriftAddon = Arc::new(move |t, tau| vol.drift_addon(t, tau));
        Self::with_drift(basis, drift, volatility, tau_grid, t_samples)
    }

    pub fn with_drift(
        basis: FactorBasis,
        drift_addon: DriftAddon,
        volatility: Volatility,
        tau_grid: Vec<f64>,
        t_samples: Vec<f64>,
    ) -> Result<Self> {
        if tau_grid.len() < basis.len() + 2 {
            return Err(Error::Precondition(format!(
                "maturity grid needs at least {} points for a {}-function basis, got {}",
                basis.len() + 2,
                basis.len(),
                tau_grid.len()
            )));
        }
        if let Some(tau) = tau_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Domain(format!("maturity grid entry {tau}")));
        }
        if t_samples.is_empty() {
            return Err(Error::Precondition("no time samples".into()));
        }
        if let Some(t) = t_samples.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Domain(format!("time sample {t}")));
        }
        Ok(ConsistencyProblem {
            state_basis: basis.clone(),
            basis,
            drift_addon,
            volatility,
            tau_grid,
            t_samples,
        })
    }

    /// The model's closed-form drift add-on and volatility against `basis`,
    /// on the default maturity grid and time samples.
    pub fn for_model(model: &ShortRateModel, basis: FactorBasis) -> Result<Self> {
        let m = *model;
        Self::with_drift(
            basis,
            Arc::new(move |_, tau| m.drift_addon(tau)),
            model.volatility(),
            default_tau_grid(),
            DEFAULT_T_SAMPLES.to_vec(),
        )
    }

    /// Interpret z-samples as coefficients over `state_basis` instead of the
    /// test basis. The state basis must be closed under differentiation.
    pub fn with_state_basis(mut self, state_basis: FactorBasis) -> Self {
        self.state_basis = state_basis;
        self
    }

    pub fn with_tau_grid(mut self, tau_grid: Vec<f64>) -> Result<Self> {
        if tau_grid.len() < self.basis.len() + 2 {
            return Err(Error::Precondition(format!(
                "maturity grid needs at least {} points, got {}",
                self.basis.len() + 2,
                tau_grid.len()
            )));
        }
        self.tau_grid = tau_grid;
        Ok(self)
    }

    pub fn basis(&self) -> &FactorBasis {
        &self.basis
    }

    pub fn state_basis(&self) -> &FactorBasis {
        &self.state_basis
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Indeterminate,
}

impl Verdict {
    /// Process exit code: 0 consistent, 1 inconsistent, 4 indeterminate.
    pub fn exit_code(&self) -> u8 {
        match self {
            Verdict::Consistent => 0,
            Verdict::Inconsistent => 1,
            Verdict::Indeterminate => 4,
        }
    }

    pub fn classify(max_residual: f64, tolerance: f64) -> Verdict {
        if max_residual <= tolerance {
            Verdict::Consistent
        } else if max_residual > INCONSISTENCY_FACTOR * tolerance {
            Verdict::Inconsistent
        } else {
            Verdict::Indeterminate
        }
    }
}

/// One `(t, z)` evaluation of both conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyTest {
    pub t: f64,
    pub z_index: usize,
    pub drift_residual: f64,
    pub volatility_residual: f64,
    /// Projection of the drift term onto the basis.
    pub drift_coefficients: Vec<f64>,
    /// Projection of the volatility onto the basis.
    pub volatility_coefficients: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    pub tolerance: f64,
    pub max_drift_residual: f64,
    pub max_volatility_residual: f64,
    pub stratonovich_correction: f64,
    pub basis: FactorBasis,
    pub tests: Vec<ConsistencyTest>,
}

/// Runs the drift and volatility membership tests for every `(t, z)` pair.
pub fn check_consistency(
    problem: &ConsistencyProblem,
    z_samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConsistencyReport> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be > 0, got {tolerance}"
        )));
    }
    if z_samples.is_empty() {
        return Err(Error::Precondition("no coefficient samples".into()));
    }
    let curves = z_samples
        .iter()
        .map(|z| {
            if z.len() != problem.state_basis.len() {
                return Err(Error::DimensionMismatch {
                    expected: problem.state_basis.len(),
                    got: z.len(),
                });
            }
            CurveInBasis::new(problem.state_basis.clone(), z.clone())?.derivative()
        })
        .collect::<Result<Vec<_>>>()?;

    let cases: Vec<(f64, usize)> = problem
        .t_samples
        .iter()
        .flat_map(|&t| (0..curves.len()).map(move |i| (t, i)))
        .collect();

    let tests = cases
        .par_iter()
        .map(|&(t, i)| run_case(problem, t, i, &curves[i]))
        .collect::<Result<Vec<_>>>()?;

    let max_drift = tests.iter().fold(0.0_f64, |m, c| m.max(c.drift_residual));
    let max_vol = tests
        .iter()
        .fold(0.0_f64, |m, c| m.max(c.volatility_residual));
    Ok(ConsistencyReport {
        verdict: Verdict::classify(max_drift.max(max_vol), tolerance),
        tolerance,
        max_drift_residual: max_drift,
        max_volatility_residual: max_vol,
        stratonovich_correction: STRATONOVICH_CORRECTION,
        basis: problem.basis.clone(),
        tests,
    })
}

fn run_case(
    problem: &ConsistencyProblem,
    t: f64,
    z_index: usize,
    derivative: &CurveInBasis,
) -> Result<ConsistencyTest> {
    let mut drift = Vec::with_capacity(problem.tau_grid.len());
    let mut vol = Vec::with_capacity(problem.tau_grid.len());
    for &tau in &problem.tau_grid {
        let d = derivative.eval_unchecked(tau)
            + (problem.drift_addon)(t, tau)
            + STRATONOVICH_CORRECTION;
        let v = problem.volatility.eval(t, tau);
        if !d.is_finite() || !v.is_finite() {
            return Err(Error::NonFinite(format!(
                "drift {d} / volatility {v} at t = {t}, tau = {tau}"
            )));
        }
        drift.push((tau, d));
        vol.push((tau, v));
    }
    let drift_fit = fit_in_basis_l2(&drift, &problem.basis)?;
    let vol_fit = fit_in_basis_l2(&vol, &problem.basis)?;
    Ok(ConsistencyTest {
        t,
        z_index,
        drift_residual: drift_fit.residual,
        volatility_residual: vol_fit.residual,
        drift_coefficients: drift_fit.curve.coefficients().to_vec(),
        volatility_coefficients: vol_fit.curve.coefficients().to_vec(),
    })
}

/// Checks `model` against a basis of the same family whose Nelson-Siegel
/// decay rate is `lambda_basis` instead of the model's `λ`.
///
/// The z-samples are the model's own forward curves at the default time
/// samples (with `r(t)` at its mean), so the drift term carries `e^{-λτ}`
/// factors that a basis at another rate cannot absorb.
pub fn check_free_lambda_failure(
    model: &ShortRateModel,
    lambda_basis: f64,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    let lambda_model = model.initial_curve().lambda;
    if !(lambda_basis.is_finite() && lambda_basis > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "basis lambda must be > 0, got {lambda_basis}"
        )));
    }
    if rates_collide(lambda_basis, lambda_model) {
        return Err(Error::Precondition(format!(
            "basis lambda {lambda_basis} equals the model lambda; use check_consistency"
        )));
    }
    let basis = match model {
        ShortRateModel::HoLee(_) => FactorBasis::ho_lee(lambda_basis)?,
        ShortRateModel::HullWhite(m) => FactorBasis::hull_white(m.a(), lambda_basis)?,
    };
    let problem = ConsistencyProblem::for_model(model, basis)?.with_state_basis(model.basis());
    let z = model_state_samples(model, problem.t_samples())?;
    check_consistency(&problem, &z, tolerance)
}

/// Coefficients of the model's forward curves at times `ts`, with the short
/// rate at its mean.
pub fn model_state_samples(model: &ShortRateModel, ts: &[f64]) -> Result<Vec<Vec<f64>>> {
    ts.iter()
        .map(|&t| {
            let r = model.short_rate_moments(t)?.mean;
            Ok(model.forward_curve(t, r)?.coefficients().to_vec())
        })
        .collect()
}

/// Drift projection over `{τ, 1, e^{-λτ}, τe^{-λτ}}` for the Ho-Lee add-on `σ²τ`:
/// `[σ², β₀, −β₂λ + β₃, −β₃λ]`.
pub fn ho_lee_drift_projection(beta: [f64; 4], sigma: f64, lambda: f64) -> [f64; 4] {
    [
        sigma * sigma,
        beta[0],
        -beta[2] * lambda + beta[3],
        -beta[3] * lambda,
    ]
}

/// Volatility projection for Ho-Lee: `σ` on the constant.
pub fn ho_lee_volatility_projection(sigma: f64) -> [f64; 4] {
    [0.0, sigma, 0.0, 0.0]
}

/// Drift projection over `{e^{-aτ}, e^{-2aτ}, 1, e^{-λτ}, τe^{-λτ}}` for the
/// Hull-White add-on: `[−aβ₁ + σ²/a, −2aβ₂ − σ²/a, 0, −β₄λ + β₅, −β₅λ]`.
pub fn hull_white_drift_projection(beta: [f64; 5], sigma: f64, a: f64, lambda: f64) -> [f64; 5] {
    let s2a = sigma * sigma / a;
    [
        -a * beta[0] + s2a,
        -2.0 * a * beta[1] - s2a,
        0.0,
        -beta[3] * lambda + beta[4],
        -beta[4] * lambda,
    ]
}

/// Volatility projection for Hull-White: `σ` on `e^{-aτ}`.
pub fn hull_white_volatility_projection(sigma: f64) -> [f64; 5] {
    [sigma, 0.0, 0.0, 0.0, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{BasisFunction, NelsonSiegelParams};
    use crate::models::{HoLeeModel, HullWhiteModel};

    fn curve() -> NelsonSiegelParams {
        NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap()
    }

    fn ho_lee() -> ShortRateModel {
        HoLeeModel::new(0.01, curve()).unwrap().into()
    }

    fn hull_white() -> ShortRateModel {
        HullWhiteModel::new(0.1, 0.01, curve()).unwrap().into()
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::classify(1e-9, 1e-9), Verdict::Consistent);
        assert_eq!(Verdict::classify(5e-8, 1e-9), Verdict::Indeterminate);
        assert_eq!(Verdict::classify(1e-7, 1e-9), Verdict::Indeterminate);
        assert_eq!(Verdict::classify(1.01e-7, 1e-9), Verdict::Inconsistent);
        assert_eq!(Verdict::Indeterminate.exit_code(), 4);
    }

    #[test]
    fn ho_lee_projection_recovered() {
        let m = ho_lee();
        let problem = ConsistencyProblem::for_model(&m, m.basis()).unwrap();
        let beta = [0.001, 0.05, -0.02, 0.01];
        let report = check_consistency(&problem, &[beta.to_vec()], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent);
        let want = ho_lee_drift_projection(beta, 0.01, 0.5);
        for test in &report.tests {
            for (g, w) in test.drift_coefficients.iter().zip(want) {
                assert!((g - w).abs() < 1e-8);
            }
            for (g, w) in test
                .volatility_coefficients
                .iter()
                .zip(ho_lee_volatility_projection(0.01))
            {
                assert!((g - w).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_dynamics_are_consistent() {
        let basis = FactorBasis::new(vec![
            BasisFunction::Constant,
            BasisFunction::ExpDecay { rate: 1.3 },
        ])
        .unwrap();
        let problem = ConsistencyProblem::new(
            basis,
            Volatility::Constant { sigma: 0.0 },
            default_tau_grid(),
            vec![0.0, 1.0],
        )
        .unwrap();
        let report = check_consistency(&problem, &[vec![0.0, 0.0]], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent);
        for t in &report.tests {
            assert!(t.drift_coefficients.iter().all(|c| c.abs() < 1e-15));
            assert!(t.volatility_coefficients.iter().all(|c| c.abs() < 1e-15));
        }
    }

    #[test]
    fn input_errors() {
        let m = ho_lee();
        let problem = ConsistencyProblem::for_model(&m, m.basis()).unwrap();
        assert!(matches!(
            check_consistency(&problem, &[vec![1.0, 2.0]], 1e-9),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
        assert!(check_consistency(&problem, &[vec![0.0; 4]], 0.0).is_err());
        assert!(problem.clone().with_tau_grid(vec![0.0, 1.0, 2.0]).is_err());

        let blowup = ConsistencyProblem::new(
            m.basis(),
            Volatility::custom(|_, tau| if tau > 10.0 { f64::NAN } else { 0.01 }),
            default_tau_grid(),
            vec![0.0],
        )
        .unwrap();
        assert!(matches!(
            check_consistency(&blowup, &[vec![0.0; 4]], 1e-9),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn free_lambda_precondition() {
        assert!(matches!(
            check_free_lambda_failure(&ho_lee(), 0.5, 1e-9),
            Err(Error::Precondition(_))
        ));
        let r = check_free_lambda_failure(&hull_white(), 0.6, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
    }
}
