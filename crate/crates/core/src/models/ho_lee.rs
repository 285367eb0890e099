//! Ho-Lee model `dr = θ(t) dt + σ dW` fitted to a Nelson-Siegel initial curve.

use serde::{Deserialize, Serialize};

use super::{check_maturity, check_time, AffineCoefficients, ShortRateMoments};
use crate::curves::{CurveInBasis, FactorBasis, NelsonSiegelParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoLeeModel {
    sigma: f64,
    initial_curve: NelsonSiegelParams,
    r0: f64,
}

impl HoLeeModel {
    /// `sigma = 0` is accepted and gives the deterministic limit.
    pub fn new(sigma: f64, initial_curve: NelsonSiegelParams) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(HoLeeModel {
            sigma,
            initial_curve,
            r0: initial_curve.short_rate(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn initial_curve(&self) -> &NelsonSiegelParams {
        &self.initial_curve
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn basis(&self) -> FactorBasis {
        FactorBasis::ho_lee(self.initial_curve.lambda)
            .expect("the linearly extended basis is valid for every positive lambda")
    }

    /// Drift `θ(t) = σ²t + (z₃ − z₂λ)e^{-λt} − z₃λt e^{-λt}` that reproduces the initial curve.
    pub fn theta(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let NelsonSiegelParams { z2, z3, lambda, .. } = self.initial_curve;
        let e = (-lambda * t).exp();
        Ok(self.sigma * self.sigma * t + (z3 - z2 * lambda) * e - z3 * lambda * t * e)
    }

    /// `B(t,T) = T − t` and
    /// `A(t,T) = ∫ₜᵀ θ(s)(s − T) ds + σ²(T − t)³/6`, which for the fitted θ
    /// reduces to `(T−t) f*(t) − ∫ₜᵀ f*(s) ds − σ² t (T−t)²/2`.
    pub fn affine(&self, t: f64, maturity: f64) -> Result<AffineCoefficients> {
        check_maturity(t, maturity)?;
        let u = maturity - t;
        let f = &self.initial_curve;
        let intercept = u * f.value(t)
            - (f.integral(maturity) - f.integral(t))
            - 0.5 * self.sigma * self.sigma * t * u * u;
        Ok(AffineCoefficients {
            intercept,
            loading: u,
        })
    }

    pub fn bond_price(&self, t: f64, maturity: f64, r_t: f64) -> Result<f64> {
        if !r_t.is_finite() {
            return Err(Error::NonFinite(format!("short rate {r_t}")));
        }
        Ok(self.affine(t, maturity)?.price(r_t))
    }

    /// Forward curve at time `t` given `r(t) = r_t`, over `{τ, 1, e^{-λτ}, τe^{-λτ}}`:
    /// `σ²t τ + C₁ + C₂ e^{-λτ} + C₃ τ e^{-λτ}` with
    /// `C₁ = r_t − (z₂+z₃t)e^{-λt}`, `C₂ = (z₂+z₃t)e^{-λt}`, `C₃ = z₃e^{-λt}`.
    pub fn forward_curve(&self, t: f64, r_t: f64) -> Result<CurveInBasis> {
        check_time(t)?;
        if !r_t.is_finite() {
            return Err(Error::NonFinite(format!("short rate {r_t}")));
        }
        let NelsonSiegelParams { z2, z3, lambda, .. } = self.initial_curve;
        let e = (-lambda * t).exp();
        let c2 = (z2 + z3 * t) * e;
        CurveInBasis::new(
            self.basis(),
            vec![self.sigma * self.sigma * t, r_t - c2, c2, z3 * e],
        )
    }

    /// Law of `r(t)` given `r(0) = r0`: mean `r0 + σ²t²/2 + f*(t) − f*(0)`, variance `σ²t`.
    pub fn short_rate_moments(&self, t: f64) -> Result<ShortRateMoments> {
        check_time(t)?;
        Ok(ShortRateMoments {
            mean: self.mean(t),
            variance: self.sigma * self.sigma * t,
        })
    }

    pub(crate) fn mean(&self, t: f64) -> f64 {
        let f = &self.initial_curve;
        self.r0 + 0.5 * self.sigma * self.sigma * t * t + (f.value(t) - f.value(0.0))
    }

    /// Musiela drift add-on `σ²τ`.
    pub fn drift_addon(&self, tau: f64) -> f64 {
        self.sigma * self.sigma * tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    fn model() -> HoLeeModel {
        HoLeeModel::new(
            0.01,
            NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn theta_examples() {
        let m = model();
        assert!((m.theta(0.0).unwrap() - (0.01 + 0.02 * 0.5)).abs() < 1e-17);
        let expected = 0.0002 + 0.01 * (-1.0_f64).exp();
        assert!((m.theta(2.0).unwrap() - expected).abs() < 1e-16);
        assert!(matches!(m.theta(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_negative_sigma() {
        let c = NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap();
        assert!(HoLeeModel::new(-0.01, c).is_err());
        assert!(HoLeeModel::new(f64::NAN, c).is_err());
    }

    #[test]
    fn affine_endpoints() {
        let m = model();
        let c = m.affine(3.0, 3.0).unwrap();
        assert_eq!((c.intercept, c.loading), (0.0, 0.0));
        assert_eq!(m.affine(0.0, 5.0).unwrap().loading, 5.0);
        assert!(matches!(m.affine(2.0, 1.0), Err(Error::Domain(_))));
        assert_eq!(m.bond_price(4.0, 4.0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn quoted_mean_needs_constant_shift() {
        // r(0) + σ²t²/2 − z₃/λ + (z₂ + z₃t)e^{-λt} misses the integration
        // constant; shifting it to hit r0 at t = 0 gives the mean
        let m = model();
        let NelsonSiegelParams { z2, z3, lambda, .. } = *m.initial_curve();
        let s = m.sigma();
        let raw = |t: f64| {
            m.r0() + s * s * t * t / 2.0 - z3 / lambda + (z2 + z3 * t) * (-lambda * t).exp()
        };
        let shift = m.r0() - raw(0.0);
        assert!((shift - (z3 / lambda - z2)).abs() < 1e-16);
        for t in [0.0, 0.5, 2.0, 9.0] {
            let mean = m.short_rate_moments(t).unwrap().mean;
            assert!((mean - (raw(t) + shift)).abs() < 1e-15);
            let integrated = m.r0() + adaptive_simpson(|u| m.theta(u).unwrap(), 0.0, t, 1e-14);
            assert!((mean - integrated).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_at_origin() {
        let m = model();
        let mo = m.short_rate_moments(0.0).unwrap();
        assert_eq!(mo.mean, m.r0());
        assert_eq!(mo.variance, 0.0);
        assert!((m.short_rate_moments(4.0).unwrap().variance - 4e-4).abs() < 1e-18);
    }

    #[test]
    fn forward_curve_examples() {
        let m = model();
        let c = m.forward_curve(0.0, m.r0()).unwrap();
        let want = [0.0, 0.05, -0.02, 0.01];
        for (g, w) in c.coefficients().iter().zip(want) {
            assert!((g - w).abs() <= 1e-14);
        }
        let c = m.forward_curve(2.0, 0.04).unwrap();
        assert!((c.coefficients()[3] - 0.01 * (-1.0_f64).exp()).abs() < 1e-17);
        assert!((c.eval(0.0).unwrap() - 0.04).abs() < 1e-16);
    }
}
