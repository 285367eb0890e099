//! Nelson-Siegel forward curves `f(τ) = z₁ + z₂e^{-λτ} + z₃τe^{-λτ}`.

use serde::{Deserialize, Serialize};

use super::basis::{check_tau, BasisFunction, CurveInBasis, FactorBasis};
use super::lsq::{fit_in_basis, LeastSquaresFit};
use crate::error::{Error, Result};

/// Level `z1`, slope `z2`, curvature `z3` (rates) and shape `lambda` (1/years).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NelsonSiegelParams {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub lambda: f64,
}

impl NelsonSiegelParams {
    pub fn new(z1: f64, z2: f64, z3: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("z1", z1), ("z2", z2), ("z3", z3), ("lambda", lambda)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        Ok(NelsonSiegelParams { z1, z2, z3, lambda })
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.value(tau))
    }

    /// Same operation order as [`CurveInBasis::eval`] on [`ns_as_curve`], so the
    /// two agree bit for bit.
    pub(crate) fn value(&self, tau: f64) -> f64 {
        let decay = BasisFunction::ExpDecay { rate: self.lambda }.eval(tau);
        let hump = BasisFunction::TauExpDecay { rate: self.lambda }.eval(tau);
        0.0 + self.z1 * 1.0 + self.z2 * decay + self.z3 * hump
    }

    /// `d f / dτ`.
    pub fn slope(&self, tau: f64) -> f64 {
        let e = (-self.lambda * tau).exp();
        (self.z3 - self.lambda * self.z2) * e - self.lambda * self.z3 * tau * e
    }

    /// `∫₀^τ f(s) ds`, so that `exp(-integral(T))` is the initial discount curve.
    pub fn integral(&self, tau: f64) -> f64 {
        let x = self.lambda * tau;
        let one_minus_e = -(-x).exp_m1();
        let l = self.lambda;
        self.z1 * tau
            + self.z2 * one_minus_e / l
            + self.z3 * (one_minus_e - x * (-x).exp()) / (l * l)
    }

    /// Short end `f(0) = z1 + z2`.
    pub fn short_rate(&self) -> f64 {
        self.z1 + self.z2
    }

    /// The curve over `{1, e^{-λτ}, τe^{-λτ}}`.
    pub fn as_curve(&self) -> CurveInBasis {
        let basis = FactorBasis::nelson_siegel(self.lambda)
            .expect("a positive finite lambda gives a valid Nelson-Siegel basis");
        CurveInBasis::new(basis, vec![self.z1, self.z2, self.z3])
            .expect("three finite coefficients")
    }
}

impl<'de> Deserialize<'de> for NelsonSiegelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            z1: f64,
            z2: f64,
            z3: f64,
            lambda: f64,
        }
        let r = Raw::deserialize(d)?;
        NelsonSiegelParams::new(r.z1, r.z2, r.z3, r.lambda).map_err(serde::de::Error::custom)
    }
}

pub fn eval_ns(params: &NelsonSiegelParams, tau: f64) -> Result<f64> {
    params.eval(tau)
}

pub fn ns_as_curve(params: &NelsonSiegelParams) -> CurveInBasis {
    params.as_curve()
}

/// Result of [`fit_ns`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelsonSiegelFit {
    pub params: NelsonSiegelParams,
    /// Sup-norm residual over the samples.
    pub residual: f64,
}

/// Default shape grid `{0.1, 0.2, …, 3.0}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=30).map(|i| i as f64 / 10.0).collect()
}

const GOLDEN_MAX_ITER: usize = 200;

/// Fits a Nelson-Siegel curve to forward-rate samples.
///
/// For each `λ` on the grid the linear part is a least-squares problem; the
/// best grid point (smallest sup-norm residual, ties to the smaller `λ`) is
/// refined by golden-section search between its grid neighbours.
pub fn fit_ns(samples: &[(f64, f64)], lambda_grid: &[f64]) -> Result<NelsonSiegelFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("lambda grid is empty".into()));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "lambda grid entries must be > 0, got {l}"
        )));
    }
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let scale = samples.iter().fold(0.0_f64, |m, s| m.max(s.1.abs()));
    // residual differences below this are rounding noise and count as ties
    let tie = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut best: Option<(usize, LeastSquaresFit)> = None;
    let mut first_err = None;
    for (i, &lambda) in grid.iter().enumerate() {
        match fit_at(samples, lambda) {
            Ok(fit) => {
                let better = match &best {
                    None => true,
                    Some((_, b)) => fit.residual < b.residual - tie,
                };
                if better {
                    best = Some((i, fit));
                }
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let (index, mut fit) = match best {
        Some(b) => b,
        None => return Err(first_err.expect("grid is non-empty")),
    };
    let mut lambda = grid[index];

    let lo = grid[index.saturating_sub(1)];
    let hi = grid[(index + 1).min(grid.len() - 1)];
    if hi > lo {
        let (l, f) = golden_section(samples, lo, hi);
        if let Some(f) = f {
            if f.residual < fit.residual - tie {
                lambda = l;
                fit = f;
            }
        }
    }

    let c = fit.curve.coefficients();
    Ok(NelsonSiegelFit {
        params: NelsonSiegelParams::new(c[0], c[1], c[2], lambda)?,
        residual: fit.residual,
    })
}

fn fit_at(samples: &[(f64, f64)], lambda: f64) -> Result<LeastSquaresFit> {
    fit_in_basis(samples, &FactorBasis::nelson_siegel(lambda)?)
}

fn residual_at(samples: &[(f64, f64)], lambda: f64) -> f64 {
    fit_at(samples, lambda).map_or(f64::INFINITY, |f| f.residual)
}

fn golden_section(
    samples: &[(f64, f64)],
    mut a: f64,
    mut b: f64,
) -> (f64, Option<LeastSquaresFit>) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = residual_at(samples, c);
    let mut fd = residual_at(samples, d);
    for _ in 0..GOLDEN_MAX_ITER {
        if (b - a) <= 1e-12 * (1.0 + b.abs()) {
            break;
        }
        // `<=` keeps the left bracket on ties
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = residual_at(samples, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = residual_at(samples, d);
        }
    }
    let lambda = if fc <= fd { c } else { d };
    (lambda, fit_at(samples, lambda).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> NelsonSiegelParams {
        NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap()
    }

    #[test]
    fn eval_examples() {
        let flat = NelsonSiegelParams::new(0.05, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(flat.eval(10.0).unwrap(), 0.05);
        let pure = NelsonSiegelParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(pure.eval(0.0).unwrap(), 1.0);
        // z2 + z3·τ = 0 at τ = 2
        assert!((p().eval(2.0).unwrap() - 0.05).abs() < 1e-17);
    }

    #[test]
    fn invalid_params() {
        assert!(NelsonSiegelParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(NelsonSiegelParams::new(0.0, 0.0, 0.0, -1.0).is_err());
        assert!(NelsonSiegelParams::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
        assert!(NelsonSiegelParams::new(0.0, f64::INFINITY, 0.0, 1.0).is_err());
        assert!(matches!(p().eval(-1.0), Err(Error::Domain(_))));
        assert!(serde_json::from_str::<NelsonSiegelParams>(
            r#"{"z1":0.0,"z2":0.0,"z3":0.0,"lambda":0.0}"#
        )
        .is_err());
    }

    #[test]
    fn embedding() {
        let c = ns_as_curve(&p());
        assert_eq!(c.coefficients(), &[0.05, -0.02, 0.01]);
        assert_eq!(c.basis(), &FactorBasis::nelson_siegel(0.5).unwrap());
        let zero = ns_as_curve(&NelsonSiegelParams::new(0.0, 0.0, 0.0, 1.0).unwrap());
        assert!(zero.coefficients().iter().all(|&x| x == 0.0));
        for i in 0..100 {
            let tau = i as f64 * 0.3;
            assert_eq!(c.eval(tau).unwrap(), eval_ns(&p(), tau).unwrap());
        }
    }

    #[test]
    fn fit_needs_four_samples_and_grid() {
        let s = [(0.0, 0.1), (1.0, 0.1), (2.0, 0.1)];
        assert!(matches!(
            fit_ns(&s, &[0.5]),
            Err(Error::InsufficientSamples { needed: 4, got: 3 })
        ));
        let s = [(0.0, 0.1), (1.0, 0.1), (2.0, 0.1), (3.0, 0.1)];
        assert!(matches!(fit_ns(&s, &[]), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            fit_ns(&s, &[0.5, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn constant_data_picks_smallest_lambda() {
        let s: Vec<_> = (0..20).map(|i| (i as f64, 0.04)).collect();
        let fit = fit_ns(&s, &[1.3, 0.7, 2.0]).unwrap();
        assert_eq!(fit.params.lambda, 0.7);
        assert!((fit.params.z1 - 0.04).abs() < 1e-14);
        assert!(fit.params.z2.abs() < 1e-13 && fit.params.z3.abs() < 1e-13);
    }

    #[test]
    fn integral_matches_slope_and_value() {
        let p = p();
        let h = 1e-5;
        for tau in [0.5, 3.0, 12.0] {
            let d = (p.integral(tau + h) - p.integral(tau - h)) / (2.0 * h);
            assert!((d - p.value(tau)).abs() < 1e-9);
            let s = (p.value(tau + h) - p.value(tau - h)) / (2.0 * h);
            assert!((s - p.slope(tau)).abs() < 1e-9);
        }
        assert_eq!(p.integral(0.0), 0.0);
    }
}
