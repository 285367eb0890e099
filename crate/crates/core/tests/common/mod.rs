//! Oracles shared by the integration tests. Nothing here calls into the
//! closed forms it is used to check.

#![allow(dead_code)]

use nsm::curves::NelsonSiegelParams;
use nsm::models::{HoLeeModel, HullWhiteModel, ShortRateModel};

/// Nelson-Siegel curve, `sigma`, `a` triples used across the suites.
pub fn parameter_sets() -> Vec<(NelsonSiegelParams, f64, f64)> {
    vec![
        (
            NelsonSiegelParams::new(0.05, -0.02, 0.01, 0.5).unwrap(),
            0.01,
            0.1,
        ),
        (
            NelsonSiegelParams::new(0.04, 0.01, -0.03, 1.2).unwrap(),
            0.015,
            0.3,
        ),
        (
            NelsonSiegelParams::new(0.06, -0.03, 0.05, 0.25).unwrap(),
            0.008,
            0.05,
        ),
    ]
}

pub fn models() -> Vec<ShortRateModel> {
    parameter_sets()
        .into_iter()
        .flat_map(|(c, s, a)| {
            [
                ShortRateModel::from(HoLeeModel::new(s, c).unwrap()),
                ShortRateModel::from(HullWhiteModel::new(a, s, c).unwrap()),
            ]
        })
        .collect()
}

pub fn ns_value(p: &NelsonSiegelParams, tau: f64) -> f64 {
    let e = (-p.lambda * tau).exp();
    p.z1 + p.z2 * e + p.z3 * tau * e
}

/// Composite 5-point Gauss-Legendre rule on `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    if a == b {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        total += half
            * X.iter()
                .zip(W)
                .map(|(x, w)| w * f(mid + half * x))
                .sum::<f64>();
    }
    total
}

/// `d/dx f` by central differences.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Forward rate `−∂_T ln P(t, T)` from bond prices, central in `T` with step
/// `h` (second-order one-sided at `T = t`).
pub fn fd_forward(model: &ShortRateModel, t: f64, tau: f64, r_t: f64, h: f64) -> f64 {
    let lp = |m: f64| model.bond_price(t, m, r_t).unwrap().ln();
    let maturity = t + tau;
    if tau >= h {
        -(lp(maturity + h) - lp(maturity - h)) / (2.0 * h)
    } else {
        -(-3.0 * lp(maturity) + 4.0 * lp(maturity + h) - lp(maturity + 2.0 * h)) / (2.0 * h)
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Sample mean and unbiased variance.
pub fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Least squares by normal equations with Gaussian elimination; an
/// independent route to the library's QR solver for small, well-conditioned
/// problems. Returns coefficients and the sup-norm residual.
pub fn normal_equations_fit(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * yi;
        }
    }
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= factor * p;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    let residual = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| (row.iter().zip(&coef).map(|(x, c)| x * c).sum::<f64>() - yi).abs())
        .fold(0.0, f64::max);
    (coef, residual)
}
