//! Ho-Lee and Hull-White short-rate models fitted to a Nelson-Siegel initial
//! forward curve.
//!
//! Times are in years, rates are continuously compounded decimals. Forward
//! curve operations take the short rate `r_t` explicitly so the same code
//! serves analytic work and path simulation.

mod hjm;
mod ho_lee;
mod hull_white;

use serde::{Deserialize, Serialize};

pub use hjm::{Volatility, DRIFT_QUADRATURE_TOL};
pub use ho_lee::HoLeeModel;
pub use hull_white::HullWhiteModel;

use crate::curves::{CurveInBasis, FactorBasis, NelsonSiegelParams};
use crate::error::{Error, Result};

/// Affine bond-price coefficients: `P(t,T) = exp(intercept − r(t)·loading)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineCoefficients {
    /// `A(t,T)`, dimensionless.
    pub intercept: f64,
    /// `B(t,T)`, in years.
    pub loading: f64,
}

impl AffineCoefficients {
    pub fn price(&self, r_t: f64) -> f64 {
        (self.intercept - r_t * self.loading).exp()
    }
}

/// Mean and variance of `r(t)` under Q, conditional on time 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShortRateMoments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HoLee,
    HullWhite,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::HoLee => "ho_lee",
            ModelKind::HullWhite => "hull_white",
        })
    }
}

/// Either calibrated model behind one interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShortRateModel {
    HoLee(HoLeeModel),
    HullWhite(HullWhiteModel),
}

impl From<HoLeeModel> for ShortRateModel {
    fn from(m: HoLeeModel) -> Self {
        ShortRateModel::HoLee(m)
    }
}

impl From<HullWhiteModel> for ShortRateModel {
    fn from(m: HullWhiteModel) -> Self {
        ShortRateModel::HullWhite(m)
    }
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            ShortRateModel::HoLee($m) => $e,
            ShortRateModel::HullWhite($m) => $e,
        }
    };
}

impl ShortRateModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ShortRateModel::HoLee(_) => ModelKind::HoLee,
            ShortRateModel::HullWhite(_) => ModelKind::HullWhite,
        }
    }

    pub fn sigma(&self) -> f64 {
        dispatch!(self, m => m.sigma())
    }

    pub fn r0(&self) -> f64 {
        dispatch!(self, m => m.r0())
    }

    pub fn initial_curve(&self) -> &NelsonSiegelParams {
        dispatch!(self, m => m.initial_curve())
    }

    /// Extended Nelson-Siegel basis the model's forward curves live in.
    pub fn basis(&self) -> FactorBasis {
        dispatch!(self, m => m.basis())
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        dispatch!(self, m => m.theta(t))
    }

    pub fn affine(&self, t: f64, maturity: f64) -> Result<AffineCoefficients> {
        dispatch!(self, m => m.affine(t, maturity))
    }

    pub fn bond_price(&self, t: f64, maturity: f64, r_t: f64) -> Result<f64> {
        dispatch!(self, m => m.bond_price(t, maturity, r_t))
    }

    pub fn forward_curve(&self, t: f64, r_t: f64) -> Result<CurveInBasis> {
        dispatch!(self, m => m.forward_curve(t, r_t))
    }

    pub fn short_rate_moments(&self, t: f64) -> Result<ShortRateMoments> {
        dispatch!(self, m => m.short_rate_moments(t))
    }

    /// Musiela drift add-on `σ(τ)∫₀^τ σ(s) ds` in closed form.
    pub fn drift_addon(&self, tau: f64) -> f64 {
        dispatch!(self, m => m.drift_addon(tau))
    }

    /// Forward-rate volatility `σ(t, τ)`.
    pub fn volatility(&self) -> Volatility {
        match self {
            ShortRateModel::HoLee(m) => Volatility::Constant { sigma: m.sigma() },
            ShortRateModel::HullWhite(m) => Volatility::ExpDecay {
                sigma: m.sigma(),
                rate: m.a(),
            },
        }
    }
}

/// On-disk model description.
///
/// `{"model":"ho_lee"|"hull_white","sigma":..,"a":..,"initial_curve":{..}}`,
/// with `a` present exactly when the model is Hull-White. Other fields (such
/// as `format_version`) are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub model: ModelKind,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    pub initial_curve: NelsonSiegelParams,
}

impl ModelFile {
    pub fn build(&self) -> Result<ShortRateModel> {
        match (self.model, self.a) {
            (ModelKind::HoLee, None) => Ok(HoLeeModel::new(self.sigma, self.initial_curve)?.into()),
            (ModelKind::HoLee, Some(_)) => Err(Error::InvalidParameter(
                "field `a` is only allowed for hull_white".into(),
            )),
            (ModelKind::HullWhite, Some(a)) => {
                Ok(HullWhiteModel::new(a, self.sigma, self.initial_curve)?.into())
            }
            (ModelKind::HullWhite, None) => Err(Error::InvalidParameter(
                "hull_white requires field `a`".into(),
            )),
        }
    }
}

impl From<&ShortRateModel> for ModelFile {
    fn from(m: &ShortRateModel) -> Self {
        ModelFile {
            model: m.kind(),
            sigma: m.sigma(),
            a: match m {
                ShortRateModel::HoLee(_) => None,
                ShortRateModel::HullWhite(hw) => Some(hw.a()),
            },
            initial_curve: *m.initial_curve(),
        }
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

pub(crate) fn check_maturity(t: f64, maturity: f64) -> Result<()> {
    check_time(t)?;
    if !maturity.is_finite() || maturity < t {
        return Err(Error::Domain(format!(
            "maturity {maturity} must not precede time {t}"
        )));
    }
    Ok(())
}
