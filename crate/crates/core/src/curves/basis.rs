//! Factor bases over time-to-maturity and curves expressed in them.
//!
//! Every curve the toolkit handles is a finite linear combination of four
//! shapes: the constant `1`, the line `τ`, the decay `e^{-rτ}` and the hump
//! `τ e^{-rτ}`. Keeping the set closed makes differentiation exact and lets
//! bases round-trip through JSON.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::lsq;
use crate::error::{Error, Result};

/// Relative tolerance under which two decay rates count as the same rate.
pub const RATE_COLLISION_RTOL: f64 = 1e-9;

/// Largest design-matrix condition number accepted for a basis.
pub const MAX_CONDITION: f64 = 1e12;

/// A single factor `φ(τ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisFunction {
    Constant,
    Linear,
    ExpDecay { rate: f64 },
    TauExpDecay { rate: f64 },
}

impl BasisFunction {
    #[inline]
    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            BasisFunction::Constant => 1.0,
            BasisFunction::Linear => tau,
            BasisFunction::ExpDecay { rate } => (-rate * tau).exp(),
            BasisFunction::TauExpDecay { rate } => tau * (-rate * tau).exp(),
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match *self {
            BasisFunction::ExpDecay { rate } | BasisFunction::TauExpDecay { rate } => Some(rate),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(rate) = self.rate() {
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "decay rate must be finite and > 0, got {rate}"
                )));
            }
        }
        Ok(())
    }

    /// Same kind and (for exponential kinds) rates equal up to [`RATE_COLLISION_RTOL`].
    pub fn coincides_with(&self, other: &BasisFunction) -> bool {
        match (*self, *other) {
            (BasisFunction::Constant, BasisFunction::Constant)
            | (BasisFunction::Linear, BasisFunction::Linear) => true,
            (BasisFunction::ExpDecay { rate: a }, BasisFunction::ExpDecay { rate: b })
            | (BasisFunction::TauExpDecay { rate: a }, BasisFunction::TauExpDecay { rate: b }) => {
                rates_collide(a, b)
            }
            _ => false,
        }
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisFunction::Constant => write!(f, "1"),
            BasisFunction::Linear => write!(f, "τ"),
            BasisFunction::ExpDecay { rate } => write!(f, "e^(-{rate}τ)"),
            BasisFunction::TauExpDecay { rate } => write!(f, "τe^(-{rate}τ)"),
        }
    }
}

/// `true` when two positive rates are equal up to [`RATE_COLLISION_RTOL`].
pub fn rates_collide(a: f64, b: f64) -> bool {
    (a - b).abs() <= RATE_COLLISION_RTOL * a.abs().max(b.abs())
}

/// Ordered, duplicate-free, numerically independent list of factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FactorBasis {
    functions: Vec<BasisFunction>,
}

impl FactorBasis {
    pub fn new(functions: Vec<BasisFunction>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidParameter("basis must not be empty".into()));
        }
        for f in &functions {
            f.validate()?;
        }
        for (i, f) in functions.iter().enumerate() {
            if let Some(g) = functions[..i].iter().find(|g| g.coincides_with(f)) {
                return Err(Error::Degenerate(format!(
                    "basis functions {g} and {f} coincide"
                )));
            }
        }
        let basis = FactorBasis { functions };
        let condition = lsq::condition_number(&basis, &default_tau_grid());
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(Error::IllConditioned {
                basis: basis.to_string(),
                condition,
            });
        }
        Ok(basis)
    }

    /// Strict Nelson-Siegel basis `{1, e^{-λτ}, τe^{-λτ}}`.
    pub fn nelson_siegel(lambda: f64) -> Result<Self> {
        Self::new(vec![
            BasisFunction::Constant,
            BasisFunction::ExpDecay { rate: lambda },
            BasisFunction::TauExpDecay { rate: lambda },
        ])
    }

    /// Linearly extended basis `{τ, 1, e^{-λτ}, τe^{-λτ}}` carried by Ho-Lee forward curves.
    pub fn ho_lee(lambda: f64) -> Result<Self> {
        Self::new(vec![
            BasisFunction::Linear,
            BasisFunction::Constant,
            BasisFunction::ExpDecay { rate: lambda },
            BasisFunction::TauExpDecay { rate: lambda },
        ])
    }

    /// Exponentially extended basis `{e^{-aτ}, e^{-2aτ}, 1, e^{-λτ}, τe^{-λτ}}`
    /// carried by Hull-White forward curves.
    pub fn hull_white(a: f64, lambda: f64) -> Result<Self> {
        Self::new(vec![
            BasisFunction::ExpDecay { rate: a },
            BasisFunction::ExpDecay { rate: 2.0 * a },
            BasisFunction::Constant,
            BasisFunction::ExpDecay { rate: lambda },
            BasisFunction::TauExpDecay { rate: lambda },
        ])
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn position(&self, f: &BasisFunction) -> Option<usize> {
        self.functions.iter().position(|g| g.coincides_with(f))
    }

    /// Values of every factor at `tau`, in basis order.
    pub fn row(&self, tau: f64) -> impl Iterator<Item = f64> + '_ {
        self.functions.iter().map(move |f| f.eval(tau))
    }
}

impl fmt::Display for FactorBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, func) in self.functions.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{func}")?;
        }
        write!(f, "}}")
    }
}

impl<'de> Deserialize<'de> for FactorBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let functions = Vec::<BasisFunction>::deserialize(d)?;
        FactorBasis::new(functions).map_err(serde::de::Error::custom)
    }
}

/// A curve `τ ↦ Σ cᵢ φᵢ(τ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveInBasis {
    basis: FactorBasis,
    coefficients: Vec<f64>,
}

impl CurveInBasis {
    pub fn new(basis: FactorBasis, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("curve coefficient {c}")));
        }
        Ok(CurveInBasis {
            basis,
            coefficients,
        })
    }

    pub fn zero(basis: FactorBasis) -> Self {
        let n = basis.len();
        CurveInBasis {
            basis,
            coefficients: vec![0.0; n],
        }
    }

    pub fn basis(&self) -> &FactorBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.eval_unchecked(tau))
    }

    pub(crate) fn eval_unchecked(&self, tau: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(self.basis.functions())
            .fold(0.0, |acc, (c, f)| acc + c * f.eval(tau))
    }

    /// The τ-derivative, expressed in the same basis.
    ///
    /// Needs `1` in the basis whenever `τ` is present and `e^{-rτ}` whenever
    /// `τe^{-rτ}` is present.
    pub fn derivative(&self) -> Result<CurveInBasis> {
        let mut out = vec![0.0; self.basis.len()];
        for (c, f) in self.coefficients.iter().zip(self.basis.functions()) {
            match *f {
                BasisFunction::Constant => {}
                BasisFunction::Linear => {
                    let k = self.companion(&BasisFunction::Constant, f)?;
                    out[k] += c;
                }
                BasisFunction::ExpDecay { rate } => {
                    let k = self.companion(f, f)?;
                    out[k] -= rate * c;
                }
                BasisFunction::TauExpDecay { rate } => {
                    let k = self.companion(&BasisFunction::ExpDecay { rate }, f)?;
                    out[k] += c;
                    let j = self.companion(f, f)?;
                    out[j] -= rate * c;
                }
            }
        }
        Ok(CurveInBasis {
            basis: self.basis.clone(),
            coefficients: out,
        })
    }

    fn companion(&self, needed: &BasisFunction, from: &BasisFunction) -> Result<usize> {
        self.basis.position(needed).ok_or_else(|| {
            Error::UnsupportedBasis(format!(
                "derivative of {from} needs {needed}, which is not in {}",
                self.basis
            ))
        })
    }
}

impl<'de> Deserialize<'de> for CurveInBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            basis: FactorBasis,
            coefficients: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        CurveInBasis::new(raw.basis, raw.coefficients).map_err(serde::de::Error::custom)
    }
}

/// Evaluates `curve` at `tau` (`tau ≥ 0`).
pub fn eval_curve(curve: &CurveInBasis, tau: f64) -> Result<f64> {
    curve.eval(tau)
}

pub fn differentiate_in_basis(curve: &CurveInBasis) -> Result<CurveInBasis> {
    curve.derivative()
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Domain(format!(
            "time to maturity must be >= 0, got {tau}"
        )));
    }
    Ok(())
}

/// Default maturity horizon in years.
pub const DEFAULT_TAU_MAX: f64 = 30.0;
/// Default number of maturity points.
pub const DEFAULT_TAU_POINTS: usize = 61;

/// `n` equally spaced points on `[0, tau_max]`.
pub fn tau_grid(tau_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let step = tau_max / (n - 1) as f64;
            (0..n).map(|i| i as f64 * step).collect()
        }
    }
}

/// 61 points on `[0, 30]` years.
pub fn default_tau_grid() -> Vec<f64> {
    tau_grid(DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS)
}
