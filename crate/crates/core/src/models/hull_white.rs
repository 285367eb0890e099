//! Hull-White model `dr = (θ(t) − a r) dt + σ dW` fitted to a Nelson-Siegel initial curve.

use serde::{Deserialize, Serialize};

use super::{check_maturity, check_time, AffineCoefficients, ShortRateMoments};
use crate::curves::{rates_collide, CurveInBasis, FactorBasis, NelsonSiegelParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullWhiteModel {
    a: f64,
    sigma: f64,
    initial_curve: NelsonSiegelParams,
    r0: f64,
}

impl HullWhiteModel {
    /// Fails with [`Error::Degenerate`] when `λ` equals `a` or `2a`: the forward
    /// curves would then need a confluent basis.
    pub fn new(a: f64, sigma: f64, initial_curve: NelsonSiegelParams) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mean reversion must be finite and > 0, got {a}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        let lambda = initial_curve.lambda;
        if rates_collide(lambda, a) || rates_collide(lambda, 2.0 * a) {
            return Err(Error::Degenerate(format!(
                "lambda = {lambda} collides with a = {a} or 2a = {}; \
                 the five Hull-White factors are then linearly dependent",
                2.0 * a
            )));
        }
        Ok(HullWhiteModel {
            a,
            sigma,
            initial_curve,
            r0: initial_curve.short_rate(),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
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
        FactorBasis::hull_white(self.a, self.initial_curve.lambda)
            .expect("rate collisions are rejected at construction")
    }

    fn half_var_scale(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.a * self.a)
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let NelsonSiegelParams { z1, z2, z3, lambda } = self.initial_curve;
        let a = self.a;
        let e = (-lambda * t).exp();
        Ok(a * z1
            + (z3 - z2 * lambda + a * z2) * e
            + (a * z3 - z3 * lambda) * t * e
            + self.sigma * self.sigma / (2.0 * a) * -(-2.0 * a * t).exp_m1())
    }

    /// `α(t) = f*(0,t) + σ²/(2a²)(1 − e^{-at})²`.
    pub fn alpha(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.alpha_unchecked(t))
    }

    fn alpha_unchecked(&self, t: f64) -> f64 {
        let g = -(-self.a * t).exp_m1();
        self.initial_curve.value(t) + self.half_var_scale() * g * g
    }

    /// `B(t,T) = (1 − e^{-a(T−t)})/a`; `A` in closed form:
    /// `ln P*(0,T) − ln P*(0,t) + B f*(t) − σ²/(4a)(1 − e^{-2at}) B²`.
    pub fn affine(&self, t: f64, maturity: f64) -> Result<AffineCoefficients> {
        check_maturity(t, maturity)?;
        let a = self.a;
        let f = &self.initial_curve;
        let b = -(-a * (maturity - t)).exp_m1() / a;
        let intercept = -(f.integral(maturity) - f.integral(t)) + b * f.value(t)
            - self.sigma * self.sigma / (4.0 * a) * -(-2.0 * a * t).exp_m1() * b * b;
        Ok(AffineCoefficients {
            intercept,
            loading: b,
        })
    }

    pub fn bond_price(&self, t: f64, maturity: f64, r_t: f64) -> Result<f64> {
        if !r_t.is_finite() {
            return Err(Error::NonFinite(format!("short rate {r_t}")));
        }
        Ok(self.affine(t, maturity)?.price(r_t))
    }

    /// Forward curve at time `t` given `r(t) = r_t`, over
    /// `{e^{-aτ}, e^{-2aτ}, 1, e^{-λτ}, τe^{-λτ}}` with coefficients
    /// `C₁ = σ²/a²(1 − e^{-at}) − α(t) + r_t`, `C₂ = σ²/(2a²)(e^{-2at} − 1)`,
    /// `C₃ = z₁`, `C₄ = (z₂ + z₃t)e^{-λt}`, `C₅ = z₃e^{-λt}`.
    pub fn forward_curve(&self, t: f64, r_t: f64) -> Result<CurveInBasis> {
        check_time(t)?;
        if !r_t.is_finite() {
            return Err(Error::NonFinite(format!("short rate {r_t}")));
        }
        let NelsonSiegelParams { z1, z2, z3, lambda } = self.initial_curve;
        let k = self.half_var_scale();
        let c1 = 2.0 * k * -(-self.a * t).exp_m1() - self.alpha_unchecked(t) + r_t;
        let c2 = k * (-2.0 * self.a * t).exp_m1();
        let e = (-lambda * t).exp();
        CurveInBasis::new(self.basis(), vec![c1, c2, z1, (z2 + z3 * t) * e, z3 * e])
    }

    /// Mean `r0 e^{-at} + α(t) − α(0) e^{-at}`, variance `σ²(1 − e^{-2at})/(2a)`.
    pub fn short_rate_moments(&self, t: f64) -> Result<ShortRateMoments> {
        check_time(t)?;
        Ok(ShortRateMoments {
            mean: self.mean(t),
            variance: self.transition_variance(t),
        })
    }

    pub(crate) fn mean(&self, t: f64) -> f64 {
        let d = (-self.a * t).exp();
        self.r0 * d + self.alpha_unchecked(t) - self.alpha_unchecked(0.0) * d
    }

    /// Conditional mean of `r(t + dt)` given `r(t) = r_t`.
    pub(crate) fn transition_mean(&self, t: f64, dt: f64, r_t: f64) -> f64 {
        let d = (-self.a * dt).exp();
        r_t * d + self.alpha_unchecked(t + dt) - self.alpha_unchecked(t) * d
    }

    pub(crate) fn transition_variance(&self, dt: f64) -> f64 {
        self.sigma * self.sigma * -(-2.0 * self.a * dt).exp_m1() / (2.0 * self.a)
    }

    /// Musiela drift add-on `(σ²/a) e^{-aτ}(1 − e^{-aτ})`.
    pub fn drift_addon(&self, tau: f64) -> f64 {
        let e = (-self.a * tau).exp();
        self.sigma * self.sigma / self.a * e * -(-self.a * tau).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> NelsonSiegelParams {
        NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap()
    }

    fn model() -> HullWhiteModel {
        HullWhiteModel::new(0.1, 0.01, curve()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            HullWhiteModel::new(0.5, 0.01, curve()),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            HullWhiteModel::new(0.25, 0.01, curve()),
            Err(Error::Degenerate(_))
        ));
        assert!(HullWhiteModel::new(0.0, 0.01, curve()).is_err());
        assert!(HullWhiteModel::new(0.1, -0.01, curve()).is_err());
    }

    #[test]
    fn theta_at_origin_and_asymptote() {
        let m = model();
        let (z1, z2, z3, l, a) = (0.05, -0.02, 0.01, 0.5, 0.1);
        let want = a * z1 + z3 - z2 * l + a * z2;
        assert!((m.theta(0.0).unwrap() - want).abs() < 1e-17);
        // the NS terms have decayed by t = 200; only a·z1 + σ²/(2a) remains
        let far = m.theta(200.0).unwrap();
        assert!((far - (a * z1 + 5e-4)).abs() < 1e-12);
    }

    #[test]
    fn alpha_examples() {
        let m = model();
        assert_eq!(m.alpha(0.0).unwrap(), 0.05 - 0.02);
        let want = curve().value(10.0) + (1e-4 / 0.02) * (1.0 - (-1.0_f64).exp()).powi(2);
        assert!((m.alpha(10.0).unwrap() - want).abs() < 1e-16);
        let quiet = HullWhiteModel::new(0.1, 0.0, curve()).unwrap();
        assert_eq!(quiet.alpha(3.0).unwrap(), curve().value(3.0));
    }

    #[test]
    fn affine_examples() {
        let m = model();
        let c = m.affine(2.0, 2.0).unwrap();
        assert_eq!((c.intercept, c.loading), (0.0, 0.0));
        let b = m.affine(0.0, 10.0).unwrap().loading;
        assert!((b - 10.0 * (1.0 - (-1.0_f64).exp())).abs() < 1e-14);
        assert!(m.affine(3.0, 1.0).is_err());
    }

    #[test]
    fn forward_curve_examples() {
        let m = model();
        let c = m.forward_curve(0.0, m.r0()).unwrap();
        assert_eq!(c.coefficients(), &[0.0, 0.0, 0.05, -0.02, 0.01]);
        let c = m.forward_curve(5.0, 0.03).unwrap();
        let want = 5e-3 * ((-1.0_f64).exp() - 1.0);
        assert!((c.coefficients()[1] - want).abs() < 1e-17);
    }

    #[test]
    fn moments() {
        let m = model();
        let mo = m.short_rate_moments(0.0).unwrap();
        assert_eq!((mo.mean, mo.variance), (m.r0(), 0.0));
        let far = m.short_rate_moments(500.0).unwrap();
        assert!((far.variance - 1e-4 / 0.2).abs() < 1e-18);
        // r0 = α(0), so the mean collapses to α(t)
        let t = 3.0;
        assert!((m.short_rate_moments(t).unwrap().mean - m.alpha(t).unwrap()).abs() < 1e-16);
    }
}
