//! Nonlinear least-squares regeneration of the logistic CDF coefficients.
//!
//! The fit matches the logistic form to the empirical CDF on a fixed grid
//! of 999 quantile levels `0.001, ..., 0.999`: with `x_q` the empirical
//! `q`-quantile, it minimises `sum_q (F(x_q) - q)^2` over `(gamma0, gamma1)`
//! with a Levenberg-Marquardt iteration started from the linear regression
//! of `logit(q)` on `x_q`.

use crate::coeffs::LogisticCoeffs;
use crate::error::{Error, Result};
use crate::moments::Statistic;

pub const MIN_FIT_SAMPLES: usize = 10_000;
const GRID_POINTS: usize = 999;
const MAX_ITER: usize = 500;

/// Quantile levels `k / 1000`, `k = 1..=999`.
pub fn quantile_levels() -> Vec<f64> {
    (1..=GRID_POINTS).map(|k| k as f64 / (GRID_POINTS + 1) as f64).collect()
}

/// Empirical quantiles (inverse of the empirical CDF) of `sorted` at each
/// level.
pub fn empirical_quantiles(sorted: &[f64], levels: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    levels
        .iter()
        .map(|&q| {
            let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
            sorted[idx]
        })
        .collect()
}

fn sorted_copy(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile grid `(level, x_level)` used by the fit.
pub fn quantile_grid(samples: &[f64]) -> Vec<(f64, f64)> {
    let levels = quantile_levels();
    let xs = empirical_quantiles(&sorted_copy(samples), &levels);
    levels.into_iter().zip(xs).collect()
}

fn logistic(u: f64) -> f64 {
    if u > 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn objective(grid: &[(f64, f64)], g0: f64, g1: f64) -> f64 {
    grid.iter().map(|&(q, x)| (logistic(g0 + g1 * x) - q).powi(2)).sum()
}

fn starting_values(grid: &[(f64, f64)]) -> (f64, f64) {
    let n = grid.len() as f64;
    let (mx, my) = grid.iter().fold((0.0, 0.0), |(a, b), &(q, x)| (a + x, b + (q / (1.0 - q)).ln()));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(q, x) in grid {
        let l = (q / (1.0 - q)).ln();
        sxy += (x - mx) * (l - my);
        sxx += (x - mx) * (x - mx);
    }
    let g1 = if sxx > 0.0 { sxy / sxx } else { 1.0 };
    (my - g1 * mx, g1)
}

/// Fit `(gamma0, gamma1)` to a sample of statistic draws.
pub fn fit_logistic_cdf(samples: &[f64], statistic: Statistic, sample_size: usize) -> Result<LogisticCoeffs> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "logistic fit needs at least {MIN_FIT_SAMPLES} draws, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("logistic fit draws must be finite".into()));
    }
    let grid = quantile_grid(samples);
    if grid.first().map(|g| g.1) == grid.last().map(|g| g.1) {
        return Err(Error::InvalidInput("logistic fit draws have no spread".into()));
    }
    let (g0, g1) = fit_grid(&grid)?;
    LogisticCoeffs::new(statistic, sample_size, g0, g1)
}

fn fit_grid(grid: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (mut g0, mut g1) = starting_values(grid);
    let mut f = objective(grid, g0, g1);
    let mut lambda = 1e-3;
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        // J'J and J'r for r_k = F(u_k) - q_k
        let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(q, x) in grid {
            let p = logistic(g0 + g1 * x);
            let d = p * (1.0 - p);
            let r = p - q;
            a00 += d * d;
            a01 += d * d * x;
            a11 += d * d * x * x;
            b0 += d * r;
            b1 += d * r * x;
        }
        grad_norm = (b0 * b0 + b1 * b1).sqrt();
        loop {
            let (m00, m11) = (a00 * (1.0 + lambda), a11 * (1.0 + lambda));
            let det = m00 * m11 - a01 * a01;
            if !(det.is_finite() && det > 0.0) {
                lambda *= 10.0;
                if lambda > 1e12 {
                    return Err(Error::FitFailed { iterations: MAX_ITER, objective: f, gradient_norm: grad_norm });
                }
                continue;
            }
            let d0 = -(m11 * b0 - a01 * b1) / det;
            let d1 = -(m00 * b1 - a01 * b0) / det;
            let (n0, n1) = (g0 + d0, g1 + d1);
            let fnew = objective(grid, n0, n1);
            if fnew <= f {
                let small = d0.abs() <= 1e-12 * (1.0 + g0.abs()) && d1.abs() <= 1e-12 * (1.0 + g1.abs());
                let stalled = f - fnew <= 1e-15 * f;
                g0 = n0;
                g1 = n1;
                f = fnew;
                lambda = (lambda / 10.0).max(1e-12);
                if small || stalled {
                    return if g1 > 0.0 {
                        Ok((g0, g1))
                    } else {
                        Err(Error::FitFailed { iterations: MAX_ITER, objective: f, gradient_norm: grad_norm })
                    };
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                // no downhill step left: at a minimum to working precision
                return if g1 > 0.0 && grad_norm < 1e-6 {
                    Ok((g0, g1))
                } else {
                    Err(Error::FitFailed { iterations: MAX_ITER, objective: f, gradient_norm: grad_norm })
                };
            }
        }
    }
    Err(Error::FitFailed { iterations: MAX_ITER, objective: f, gradient_norm: grad_norm })
}

/// Largest gap between two logistic CDFs over a set of evaluation points.
pub fn sup_cdf_distance(a: &LogisticCoeffs, b: &LogisticCoeffs, points: &[f64]) -> f64 {
    points.iter().map(|&x| (a.cdf(x) - b.cdf(x)).abs()).fold(0.0, f64::max)
}
