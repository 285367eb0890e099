//! Linear least squares over a factor basis.
//!
//! Solved by Householder QR on the design matrix; the normal equations square
//! the condition number, which exponential bases with nearby rates cannot
//! afford.

use nalgebra::{DMatrix, DVector};

use super::basis::{check_tau, CurveInBasis, FactorBasis, MAX_CONDITION};
use crate::error::{Error, Result};

/// Least-squares coefficients and the sup-norm residual over the samples.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresFit {
    pub curve: CurveInBasis,
    pub residual: f64,
}

pub(crate) fn design_matrix(basis: &FactorBasis, taus: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(taus.len(), basis.len(), |i, j| {
        basis.functions()[j].eval(taus[i])
    })
}

/// 2-norm condition number of the design matrix of `basis` on `taus`.
pub fn condition_number(basis: &FactorBasis, taus: &[f64]) -> f64 {
    let x = design_matrix(basis, taus);
    let sv = x.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ordinary least-squares fit of `(tau, value)` samples in `basis`.
pub fn fit_in_basis(samples: &[(f64, f64)], basis: &FactorBasis) -> Result<LeastSquaresFit> {
    solve(samples, None, basis)
}

/// Least squares with each sample weighted by its composite-Simpson share of
/// the maturity range: a discretisation of the continuous L² projection onto
/// the span, so coefficients and residual settle quickly as the grid is
/// refined. Falls back to trapezoidal weights on grids too uneven for Simpson.
/// The residual is still the unweighted sup-norm over the samples.
pub fn fit_in_basis_l2(samples: &[(f64, f64)], basis: &FactorBasis) -> Result<LeastSquaresFit> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| samples[i].0.total_cmp(&samples[j].0));
    let taus: Vec<f64> = order.iter().map(|&i| samples[i].0).collect();
    let sorted = quadrature_weights(&taus);
    let mut weights = vec![0.0; samples.len()];
    for (k, &i) in order.iter().enumerate() {
        weights[i] = sorted[k];
    }
    solve(samples, Some(&weights), basis)
}

/// Composite Simpson weights on sorted nodes (a trailing odd interval gets
/// the trapezoid rule); trapezoidal weights if any Simpson weight would be
/// non-positive.
fn quadrature_weights(taus: &[f64]) -> Vec<f64> {
    let n = taus.len();
    let mut w = vec![0.0; n];
    let mut k = 0;
    while k + 2 < n {
        let (h0, h1) = (taus[k + 1] - taus[k], taus[k + 2] - taus[k + 1]);
        let s = (h0 + h1) / 6.0;
        w[k] += s * (2.0 - h1 / h0);
        w[k + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[k + 2] += s * (2.0 - h0 / h1);
        k += 2;
    }
    if k + 1 < n {
        let h = taus[k + 1] - taus[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    if w.iter().all(|&x| x > 0.0) {
        return w;
    }
    let mut w = vec![0.0; n];
    for k in 1..n {
        let half = 0.5 * (taus[k] - taus[k - 1]);
        w[k] += half;
        w[k - 1] += half;
    }
    w
}

fn solve(
    samples: &[(f64, f64)],
    weights: Option<&[f64]>,
    basis: &FactorBasis,
) -> Result<LeastSquaresFit> {
    let n = samples.len();
    let m = basis.len();
    if n < m {
        return Err(Error::InsufficientSamples { needed: m, got: n });
    }
    for &(tau, value) in samples {
        check_tau(tau)?;
        if !tau.is_finite() || !value.is_finite() {
            return Err(Error::NonFinite(format!("sample ({tau}, {value})")));
        }
    }
    let mut taus: Vec<f64> = samples.iter().map(|s| s.0).collect();
    taus.sort_by(f64::total_cmp);
    if let Some(w) = taus.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Precondition(format!(
            "sample maturities must be distinct, {} repeats",
            w[0]
        )));
    }

    let taus: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let x = design_matrix(basis, &taus);
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let (xw, yw) = match weights {
        Some(w) => {
            let sw = DVector::from_iterator(n, w.iter().map(|w| w.sqrt()));
            let mut xw = x.clone();
            for (i, mut row) in xw.row_iter_mut().enumerate() {
                row *= sw[i];
            }
            (xw, y.component_mul(&sw))
        }
        None => (x.clone(), y.clone()),
    };

    let sv = xw.singular_values();
    let condition = if sv.min() > 0.0 {
        sv.max() / sv.min()
    } else {
        f64::INFINITY
    };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            basis: basis.to_string(),
            condition,
        });
    }

    let qr = xw.qr();
    let qty = qr.q().transpose() * &yw;
    let coefficients =
        qr.r()
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::IllConditioned {
                basis: basis.to_string(),
                condition,
            })?;

    let fitted = &x * &coefficients;
    let residual = fitted
        .iter()
        .zip(y.iter())
        .fold(0.0_f64, |acc, (f, v)| acc.max((f - v).abs()));

    Ok(LeastSquaresFit {
        curve: CurveInBasis::new(basis.clone(), coefficients.iter().copied().collect())?,
        residual,
    })
}

/// Samples `f` on `taus` and fits the result in `basis`.
pub fn fit_function<F: Fn(f64) -> f64>(
    f: F,
    taus: &[f64],
    basis: &FactorBasis,
) -> Result<LeastSquaresFit> {
    let samples: Vec<(f64, f64)> = taus.iter().map(|&t| (t, f(t))).collect();
    fit_in_basis(&samples, basis)
}
