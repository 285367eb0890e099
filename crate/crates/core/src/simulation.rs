//! Exact simulation of the short rate under Q and Monte Carlo validators.
//!
//! Both models have Gaussian short rates with known transitions, so paths are
//! sampled without discretisation error on any time grid.
//!
//! Random streams: path `i` of an ensemble with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. A path therefore
//! depends only on `(seed, path index)`, never on scheduling, and parallel
//! ensembles are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveInBasis;
use crate::error::{Error, Result};
use crate::models::{HoLeeModel, HullWhiteModel, ModelKind, ShortRateModel};

/// Default simulation resolution.
pub const DEFAULT_STEPS_PER_YEAR: usize = 100;

/// Strictly increasing times starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        match times.first() {
            Some(0.0) => {}
            _ => return Err(Error::InvalidParameter("time grid must start at 0".into())),
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("grid time {t}")));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { times })
    }

    /// `ceil(horizon · steps_per_year)` equal steps on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps_per_year: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be > 0, got {horizon}"
            )));
        }
        if steps_per_year == 0 {
            return Err(Error::InvalidParameter("steps per year must be > 0".into()));
        }
        let n = (horizon * steps_per_year as f64).ceil().max(1.0) as usize;
        let h = horizon / n as f64;
        let mut times: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        times.push(horizon);
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShortRatePath {
    pub kind: ModelKind,
    pub grid: TimeGrid,
    pub rates: Vec<f64>,
}

impl ShortRatePath {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .times()
            .iter()
            .copied()
            .zip(self.rates.iter().copied())
    }

    /// Trapezoidal `∫₀^T r(t) dt` over the grid.
    pub fn integrated_rate(&self) -> f64 {
        let t = self.grid.times();
        (1..t.len())
            .map(|i| 0.5 * (t[i] - t[i - 1]) * (self.rates[i] + self.rates[i - 1]))
            .sum()
    }
}

/// `r(tᵢ) = E[r(tᵢ)] + σ W(tᵢ)` with independent Brownian increments.
pub fn simulate_hl_path(model: &HoLeeModel, grid: &TimeGrid, rng: RngSpec) -> ShortRatePath {
    let mut g = rng.rng();
    let t = grid.times();
    let mut rates = Vec::with_capacity(t.len());
    rates.push(model.r0());
    let mut w = 0.0;
    for i in 1..t.len() {
        let z: f64 = StandardNormal.sample(&mut g);
        w += (t[i] - t[i - 1]).sqrt() * z;
        rates.push(model.mean(t[i]) + model.sigma() * w);
    }
    ShortRatePath {
        kind: ModelKind::HoLee,
        grid: grid.clone(),
        rates,
    }
}

/// Exact Gaussian transitions: given `r(tᵢ)`, `r(tᵢ₊₁)` has mean
/// `r(tᵢ)e^{-aΔ} + α(tᵢ₊₁) − α(tᵢ)e^{-aΔ}` and variance `σ²(1 − e^{-2aΔ})/(2a)`.
pub fn simulate_hw_path(model: &HullWhiteModel, grid: &TimeGrid, rng: RngSpec) -> ShortRatePath {
    let mut g = rng.rng();
    let t = grid.times();
    let mut rates = Vec::with_capacity(t.len());
    let mut r = model.r0();
    rates.push(r);
    for i in 1..t.len() {
        let dt = t[i] - t[i - 1];
        let z: f64 = StandardNormal.sample(&mut g);
        r = model.transition_mean(t[i - 1], dt, r) + model.transition_variance(dt).sqrt() * z;
        rates.push(r);
    }
    ShortRatePath {
        kind: ModelKind::HullWhite,
        grid: grid.clone(),
        rates,
    }
}

pub fn simulate_path(model: &ShortRateModel, grid: &TimeGrid, rng: RngSpec) -> ShortRatePath {
    match model {
        ShortRateModel::HoLee(m) => simulate_hl_path(m, grid, rng),
        ShortRateModel::HullWhite(m) => simulate_hw_path(m, grid, rng),
    }
}

/// `n_paths` paths; path `i` uses stream `i`. Output order is path order.
pub fn simulate_ensemble(
    model: &ShortRateModel,
    grid: &TimeGrid,
    seed: u64,
    n_paths: usize,
) -> Vec<ShortRatePath> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(model, grid, RngSpec::new(seed, i)))
        .collect()
}

/// Closed-form forward curve at every point of `path`.
pub fn evolve_curve_on_path(
    model: &ShortRateModel,
    path: &ShortRatePath,
) -> Result<Vec<CurveInBasis>> {
    if path.kind != model.kind() {
        return Err(Error::Precondition(format!(
            "path simulated under {} cannot drive a {} model",
            path.kind,
            model.kind()
        )));
    }
    if path.rates.len() != path.grid.len() {
        return Err(Error::DimensionMismatch {
            expected: path.grid.len(),
            got: path.rates.len(),
        });
    }
    let r0 = model.r0();
    if (path.rates[0] - r0).abs() > 1e-14 * (1.0 + r0.abs()) {
        return Err(Error::Precondition(format!(
            "path starts at {} but the model short rate is {r0}",
            path.rates[0]
        )));
    }
    path.points()
        .map(|(t, r)| model.forward_curve(t, r))
        .collect()
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// `E_Q[exp(−∫₀ᵀ r dt)]` with the integral taken by the trapezoidal rule on
/// exactly simulated paths.
pub fn mc_bond_price(
    model: &ShortRateModel,
    maturity: f64,
    n_paths: usize,
    steps_per_year: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "maturity must be > 0, got {maturity}"
        )));
    }
    if n_paths < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 paths, got {n_paths}"
        )));
    }
    let grid = TimeGrid::uniform(maturity, steps_per_year)?;
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("degenerate time grid".into()));
    }
    let discounts: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| (-simulate_path(model, &grid, RngSpec::new(seed, i)).integrated_rate()).exp())
        .collect();
    let (mean, var) = mean_and_variance(&discounts);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / n_paths as f64).sqrt(),
        n_paths,
        seed,
    })
}

/// Sample mean and unbiased sample variance, accumulated in index order.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::NelsonSiegelParams;

    fn curve() -> NelsonSiegelParams {
        NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::INFINITY]).is_err());
        let g = TimeGrid::uniform(5.0, 100).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g.horizon(), 5.0);
        assert!(TimeGrid::uniform(0.0, 100).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
    }

    #[test]
    fn zero_vol_paths_follow_the_mean() {
        let grid = TimeGrid::uniform(10.0, 12).unwrap();
        let hl: ShortRateModel = HoLeeModel::new(0.0, curve()).unwrap().into();
        let hw: ShortRateModel = HullWhiteModel::new(0.1, 0.0, curve()).unwrap().into();
        for m in [hl, hw] {
            let p = simulate_path(&m, &grid, RngSpec::new(7, 3));
            for (t, r) in p.points() {
                let mean = m.short_rate_moments(t).unwrap().mean;
                assert!((r - mean).abs() < 1e-15, "{t}: {r} vs {mean}");
            }
        }
    }

    #[test]
    fn same_stream_same_path() {
        let m: ShortRateModel = HullWhiteModel::new(0.1, 0.01, curve()).unwrap().into();
        let grid = TimeGrid::uniform(2.0, 50).unwrap();
        let a = simulate_path(&m, &grid, RngSpec::new(42, 9));
        let b = simulate_path(&m, &grid, RngSpec::new(42, 9));
        let c = simulate_path(&m, &grid, RngSpec::new(42, 10));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn evolve_rejects_foreign_paths() {
        let hl: ShortRateModel = HoLeeModel::new(0.01, curve()).unwrap().into();
        let hw: ShortRateModel = HullWhiteModel::new(0.1, 0.01, curve()).unwrap().into();
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let p = simulate_path(&hl, &grid, RngSpec::new(1, 0));
        assert!(evolve_curve_on_path(&hw, &p).is_err());
        let other: ShortRateModel = HoLeeModel::new(
            0.01,
            NelsonSiegelParams::new(0.04, -0.02, 0.01, 0.5).unwrap(),
        )
        .unwrap()
        .into();
        assert!(evolve_curve_on_path(&other, &p).is_err());
        assert_eq!(evolve_curve_on_path(&hl, &p).unwrap().len(), grid.len());
    }

    #[test]
    fn mc_price_input_checks() {
        let m: ShortRateModel = HoLeeModel::new(0.01, curve()).unwrap().into();
        assert!(mc_bond_price(&m, 0.0, 1000, 100, 1).is_err());
        assert!(mc_bond_price(&m, 1.0, 99, 100, 1).is_err());
        assert!(mc_bond_price(&m, 1.0, 100, 0, 1).is_err());
    }
}
