//! Information-matrix tests for Markov switching in an AR(1) with
//! parametric bootstrap calibration.
//!
//! Scores and Hessians of the Gaussian AR(1) log-likelihood are evaluated at
//! the conditional ML null fit. For a nuisance draw `(h, rho)` the second
//! order process `mu_t` is summed into `Gamma*`, standardized by the
//! residual of `mu_t` projected on the scores, and turned into the supremum
//! and exponential statistics.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::ar::ols_ar_fit;
use crate::error::{Error, Result};
use crate::normal::ln_cdf_over_pdf;
use crate::rng::{derive_seed, rng_from_seed, substream};

pub const MIN_SAMPLE_SIZE: usize = 10;
pub const RHO_BOUND: f64 = 0.7;
pub const DEFAULT_DRAWS: usize = 200;

const DRAWS_DOMAIN: u64 = 0x4452_4157; // "DRAW"
const BOOT_DOMAIN: u64 = 0x424f_4f54; // "BOOT"
const MAX_REDRAWS: u64 = 100;
/// Projection residuals this small relative to `mu` count as exactly zero.
const ZERO_RESIDUAL_RATIO: f64 = 1e-24;
/// Columns whose orthogonalized norm falls below this fraction are dropped.
const COLLINEAR_TOL: f64 = 1e-10;

/// Null AR(1) parameters `(c, phi, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullParams {
    pub c: f64,
    pub phi: f64,
    pub sigma2: f64,
}

impl NullParams {
    pub fn as_array(&self) -> [f64; 3] {
        [self.c, self.phi, self.sigma2]
    }
}

/// Log predictive density of `y_t` given `y_{t-1}`.
pub fn log_density(y_t: f64, y_lag: f64, theta: [f64; 3]) -> f64 {
    let [c, phi, s2] = theta;
    let e = y_t - c - phi * y_lag;
    -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - e * e / (2.0 * s2)
}

/// Gradient of [`log_density`] with respect to `(c, phi, sigma2)`.
pub fn score(y_t: f64, y_lag: f64, theta: [f64; 3]) -> [f64; 3] {
    let [c, phi, s2] = theta;
    let e = y_t - c - phi * y_lag;
    [e / s2, e * y_lag / s2, -0.5 / s2 + e * e / (2.0 * s2 * s2)]
}

/// Hessian of [`log_density`] with respect to `(c, phi, sigma2)`.
pub fn hessian(y_t: f64, y_lag: f64, theta: [f64; 3]) -> [[f64; 3]; 3] {
    let [c, phi, s2] = theta;
    let e = y_t - c - phi * y_lag;
    let s4 = s2 * s2;
    let cc = -1.0 / s2;
    let cp = -y_lag / s2;
    let cs = -e / s4;
    let pp = -y_lag * y_lag / s2;
    let ps = -e * y_lag / s4;
    let ss = 0.5 / s4 - e * e / (s4 * s2);
    [[cc, cp, cs], [cp, pp, ps], [cs, ps, ss]]
}

/// Per-observation scores and Hessians at the null fit, `t = 2..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullScorePanel {
    pub theta0: NullParams,
    pub scores: Vec<[f64; 3]>,
    pub hessians: Vec<[[f64; 3]; 3]>,
    pub residuals: Vec<f64>,
    /// Score columns removed from the projection as collinear.
    pub dropped: Vec<usize>,
    // orthonormal basis of the retained standardized score columns
    basis: Vec<Vec<f64>>,
}

impl NullScorePanel {
    /// Number of observations entering the likelihood, `T - 1`.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scaling that maps `(c, phi, sigma2)` directions to units of the
    /// residual standard deviation.
    fn scale(&self) -> [f64; 3] {
        let s2 = self.theta0.sigma2;
        [s2.sqrt(), 1.0, s2]
    }
}

/// Fit the AR(1) null by conditional ML and evaluate scores and Hessians.
pub fn null_score_panel(y: &[f64]) -> Result<NullScorePanel> {
    if y.len() < MIN_SAMPLE_SIZE {
        return Err(Error::InvalidInput(format!(
            "CHP tests need at least {MIN_SAMPLE_SIZE} observations, got {}",
            y.len()
        )));
    }
    let fit = ols_ar_fit(y, 1)?;
    let n = fit.residuals.len();
    let sigma2 = fit.residuals.iter().map(|e| e * e).sum::<f64>() / n as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::RankDeficient("AR(1) null fit has zero residual variance".into()));
    }
    let theta0 = NullParams { c: fit.intercept, phi: fit.phi[0], sigma2 };
    let th = theta0.as_array();
    let scores: Vec<[f64; 3]> = (1..y.len()).map(|t| score(y[t], y[t - 1], th)).collect();
    let hessians = (1..y.len()).map(|t| hessian(y[t], y[t - 1], th)).collect();

    let scale = [sigma2.sqrt(), 1.0, sigma2];
    let columns: Vec<Vec<f64>> = (0..3).map(|j| scores.iter().map(|s| s[j] * scale[j]).collect()).collect();
    let (basis, dropped) = orthonormal_basis(&columns);
    if !dropped.is_empty() {
        log::debug!("dropped collinear score columns {dropped:?}");
    }
    Ok(NullScorePanel { theta0, scores, hessians, residuals: fit.residuals, dropped, basis })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
fn orthonormal_basis(columns: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let norm0 = dot(col, col).sqrt();
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= p * qi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm0 == 0.0 || norm <= COLLINEAR_TOL * norm0 {
            dropped.push(j);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    (basis, dropped)
}

fn project_out(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let p = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(x, qi)| *x -= p * qi);
        }
    }
    r
}

/// Residuals of an OLS regression (no intercept) of `mu2_path` on the
/// scores; collinear score columns are listed in `panel.dropped`.
pub fn projection_residuals(mu2_path: &[f64], panel: &NullScorePanel) -> Result<Vec<f64>> {
    if mu2_path.len() != panel.len() {
        return Err(Error::InvalidInput(format!(
            "mu path has {} entries, panel has {}",
            mu2_path.len(),
            panel.len()
        )));
    }
    Ok(project_out(&panel.basis, mu2_path))
}

/// A point of the nuisance space: direction `h` over `(c, phi, sigma2)`
/// with `h[1] = 0`, and the regime persistence `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuisanceDraw {
    pub h: [f64; 3],
    pub rho: f64,
}

impl NuisanceDraw {
    /// Draw at angle `angle` on the (mean, variance) unit circle.
    pub fn from_angle(angle: f64, rho: f64) -> Self {
        Self { h: [angle.cos(), 0.0, angle.sin()], rho }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let rho = rng.random_range(-RHO_BOUND..=RHO_BOUND);
        Self::from_angle(angle, rho)
    }

    pub fn sample_many<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Self> {
        (0..count).map(|_| Self::sample(rng)).collect()
    }
}

/// `Gamma*` and the `mu_t` path for one nuisance draw.
///
/// `h` is read in standardized coordinates: its mean and variance components
/// are per residual standard deviation and per residual variance, which makes
/// the statistic invariant to affine rescaling of the data. The cross term
/// `sum_{s<t} rho^{t-s} l_t l_s'` uses a running accumulator.
pub fn gamma_star(panel: &NullScorePanel, d: &NuisanceDraw) -> (f64, Vec<f64>) {
    let scale = panel.scale();
    let h = [d.h[0] * scale[0], d.h[1] * scale[1], d.h[2] * scale[2]];
    let mut acc = 0.0;
    let mut prev = 0.0;
    let mut mu = Vec::with_capacity(panel.len());
    for (i, (s, hs)) in panel.scores.iter().zip(&panel.hessians).enumerate() {
        let lh = s[0] * h[0] + s[1] * h[1] + s[2] * h[2];
        let hhh: f64 = (0..3).map(|a| h[a] * (0..3).map(|b| hs[a][b] * h[b]).sum::<f64>()).sum();
        if i > 0 {
            acc = d.rho * (acc + prev);
        }
        mu.push(0.5 * (hhh + lh * lh + 2.0 * lh * acc));
        prev = lh;
    }
    let gamma = mu.iter().sum::<f64>() / (panel.len() as f64).sqrt();
    (gamma, mu)
}

/// Standardized `Gamma*` for one draw, `None` when `mu` lies in the span of
/// the scores.
fn standardized_gamma(panel: &NullScorePanel, d: &NuisanceDraw) -> Option<f64> {
    let (gamma, mu) = gamma_star(panel, d);
    let resid = projection_residuals(&mu, panel).expect("path length matches panel");
    let ee = dot(&resid, &resid);
    let mm = dot(&mu, &mu);
    if ee <= ZERO_RESIDUAL_RATIO * mm || ee == 0.0 {
        return None;
    }
    Some(gamma / (ee / panel.len() as f64).sqrt())
}

/// `ln Psi(g)` with `Psi(g) = sqrt(2 pi) exp((g-1)^2/2) Phi(g-1)`.
pub fn ln_psi(g: f64) -> f64 {
    ln_cdf_over_pdf(g - 1.0)
}

/// Supremum and exponential statistics over a fixed set of draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CHPStatistics {
    pub sup_ts: f64,
    pub exp_ts: f64,
    /// `ln expTS`, finite even when `expTS` overflows.
    pub ln_exp_ts: f64,
}

pub fn chp_statistics(panel: &NullScorePanel, draws: &[NuisanceDraw]) -> Result<CHPStatistics> {
    if draws.is_empty() {
        return Err(Error::InvalidInput("at least one nuisance draw is required".into()));
    }
    let mut sup: f64 = 0.0;
    let mut ln_psi_vals = Vec::with_capacity(draws.len());
    for d in draws {
        match standardized_gamma(panel, d) {
            Some(g) => {
                sup = sup.max(0.5 * g.max(0.0).powi(2));
                ln_psi_vals.push(ln_psi(g));
            }
            None => ln_psi_vals.push(0.0),
        }
    }
    let m = ln_psi_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_exp_ts = m + ln_psi_vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - (draws.len() as f64).ln();
    Ok(CHPStatistics { sup_ts: sup, exp_ts: ln_exp_ts.exp(), ln_exp_ts })
}

/// Supremum statistic over `draws` nuisance points sampled from `rng`.
pub fn sup_ts<R: Rng + ?Sized>(panel: &NullScorePanel, draws: usize, rng: &mut R) -> Result<f64> {
    Ok(chp_statistics(panel, &NuisanceDraw::sample_many(draws, rng))?.sup_ts)
}

/// Exponential statistic over `draws` nuisance points sampled from `rng`.
pub fn exp_ts<R: Rng + ?Sized>(panel: &NullScorePanel, draws: usize, rng: &mut R) -> Result<f64> {
    Ok(chp_statistics(panel, &NuisanceDraw::sample_many(draws, rng))?.exp_ts)
}

/// Simulate an AR(1) path of length `t` from the null parameters, starting
/// from the stationary marginal (or from `y1` if the fit is not stationary).
pub fn simulate_null_ar1<R: Rng + ?Sized>(theta: &NullParams, t: usize, y1: f64, rng: &mut R) -> Vec<f64> {
    let sd = theta.sigma2.sqrt();
    let mut y = Vec::with_capacity(t);
    let start = if theta.phi.abs() < 1.0 {
        let z: f64 = StandardNormal.sample(rng);
        theta.c / (1.0 - theta.phi) + z * sd / (1.0 - theta.phi * theta.phi).sqrt()
    } else {
        y1
    };
    y.push(start);
    for i in 1..t {
        let z: f64 = StandardNormal.sample(rng);
        y.push(theta.c + theta.phi * y[i - 1] + sd * z);
    }
    y
}

/// Bootstrap-calibrated supremum and exponential tests.
#[derive(Debug, Clone, PartialEq)]
pub struct CHPReport {
    pub sup_ts: f64,
    pub exp_ts: f64,
    pub ln_exp_ts: f64,
    pub bootstrap_p_sup: f64,
    pub bootstrap_p_exp: f64,
    pub b: usize,
    pub draws: usize,
    pub seed: u64,
}

impl CHPReport {
    pub const CSV_HEADER: &'static str = "method,statistic,bootstrap_p_value,B,draws,seed";

    pub fn csv_rows(&self) -> [String; 2] {
        [
            format!("supTS,{:.6},{:.4},{},{},{}", self.sup_ts, self.bootstrap_p_sup, self.b, self.draws, self.seed),
            format!("expTS,{:.6e},{:.4},{},{},{}", self.exp_ts, self.bootstrap_p_exp, self.b, self.draws, self.seed),
        ]
    }

    pub fn reject_sup(&self, alpha: f64) -> bool {
        self.bootstrap_p_sup <= alpha
    }

    pub fn reject_exp(&self, alpha: f64) -> bool {
        self.bootstrap_p_exp <= alpha
    }
}

fn bootstrap_statistics(
    theta: &NullParams,
    t: usize,
    y1: f64,
    draws: &[NuisanceDraw],
    seed: u64,
    index: u64,
) -> Result<CHPStatistics> {
    let mut last = None;
    for attempt in 0..MAX_REDRAWS {
        let mut rng = substream(seed, &[BOOT_DOMAIN, index, attempt]);
        let y = simulate_null_ar1(theta, t, y1, &mut rng);
        match null_score_panel(&y) {
            Ok(panel) => return chp_statistics(&panel, draws),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Compute supTS and expTS on `y` and calibrate both by `b` parametric
/// bootstrap samples from the fitted AR(1). Data and bootstrap samples share
/// the same `draws` nuisance points.
pub fn chp_bootstrap_test(y: &[f64], b: usize, draws: usize, master_seed: u64) -> Result<CHPReport> {
    if b < 2 {
        return Err(Error::InvalidInput(format!("bootstrap needs B >= 2, got {b}")));
    }
    let panel = null_score_panel(y)?;
    let nuisance = NuisanceDraw::sample_many(draws, &mut rng_from_seed(derive_seed(master_seed, &[DRAWS_DOMAIN])));
    let data = chp_statistics(&panel, &nuisance)?;
    let boot: Vec<CHPStatistics> = (0..b as u64)
        .into_par_iter()
        .map(|i| bootstrap_statistics(&panel.theta0, y.len(), y[0], &nuisance, master_seed, i))
        .collect::<Result<_>>()?;
    let exceed_sup = boot.iter().filter(|s| s.sup_ts >= data.sup_ts).count();
    let exceed_exp = boot.iter().filter(|s| s.ln_exp_ts >= data.ln_exp_ts).count();
    let p = |k: usize| (1 + k) as f64 / (b + 1) as f64;
    Ok(CHPReport {
        sup_ts: data.sup_ts,
        exp_ts: data.exp_ts,
        ln_exp_ts: data.ln_exp_ts,
        bootstrap_p_sup: p(exceed_sup),
        bootstrap_p_exp: p(exceed_exp),
        b,
        draws,
        seed: master_seed,
    })
}
