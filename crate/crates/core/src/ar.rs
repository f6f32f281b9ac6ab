//! Linear autoregressions: OLS fitting, filtering and stationarity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// OLS fit of `y_t = c + phi_1 y_{t-1} + ... + phi_r y_{t-r} + u_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ARFit {
    pub intercept: f64,
    pub phi: Vec<f64>,
    pub phi_se: Vec<f64>,
    pub intercept_se: f64,
    /// Residual variance with the `n - r - 1` degrees-of-freedom divisor.
    pub sigma2: f64,
    /// Number of observations in the regression, `T - r`.
    pub t_eff: usize,
    pub residuals: Vec<f64>,
}

impl ARFit {
    pub fn order(&self) -> usize {
        self.phi.len()
    }
}

/// Conditional (on the first `r` observations) OLS fit of an AR(r) with
/// intercept, with conventional standard errors.
pub fn ols_ar_fit(y: &[f64], r: usize) -> Result<ARFit> {
    let t = y.len();
    let k = r + 1;
    if t <= r + 2 || t - r <= k {
        return Err(Error::InvalidInput(format!("AR({r}) fit needs more than {} observations, got {t}", 2 * r + 1)));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let n = t - r;
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { y[r + i - j] });
    let target = DVector::from_column_slice(&y[r..]);

    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > smax * 1e-12) {
        return Err(Error::RankDeficient(format!("AR({r}) design matrix, singular values {smin:e}..{smax:e}")));
    }
    let beta = svd.solve(&target, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))?;
    let residuals: Vec<f64> = (&target - &x * &beta).iter().copied().collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = ssr / (n - k) as f64;

    // (X'X)^{-1} = V diag(1/s^2) V'
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let se: Vec<f64> = (0..k)
        .map(|j| {
            let var: f64 = (0..k).map(|m| (v_t[(m, j)] / sv[m]).powi(2)).sum();
            (sigma2 * var).sqrt()
        })
        .collect();

    Ok(ARFit {
        intercept: beta[0],
        phi: beta.iter().skip(1).copied().collect(),
        phi_se: se[1..].to_vec(),
        intercept_se: se[0],
        sigma2,
        t_eff: n,
        residuals,
    })
}

/// `z_t = y_t - sum_k phi_k y_{t-k}` for `t = r+1..T`.
pub fn ar_filter(y: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    let r = phi.len();
    if y.len() <= r {
        return Err(Error::InvalidInput(format!("cannot filter {} observations with {r} lags", y.len())));
    }
    Ok((r..y.len()).map(|t| y[t] - phi.iter().enumerate().map(|(k, p)| p * y[t - 1 - k]).sum::<f64>()).collect())
}

/// Smallest modulus among the roots of `1 - phi_1 z - ... - phi_r z^r`.
///
/// Returns `+inf` when the polynomial is constant (no lags, or all
/// coefficients zero). The process is stationary iff the result exceeds 1.
pub fn min_root_modulus(phi: &[f64]) -> f64 {
    let degree = phi.iter().rposition(|&p| p != 0.0).map_or(0, |i| i + 1);
    match degree {
        0 => f64::INFINITY,
        1 => 1.0 / phi[0].abs(),
        d => {
            // roots are reciprocals of the companion-matrix eigenvalues
            let companion = DMatrix::from_fn(d, d, |i, j| if i == 0 { phi[j] } else if i == j + 1 { 1.0 } else { 0.0 });
            let spectral_radius = companion.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
            1.0 / spectral_radius
        }
    }
}

pub fn is_stationary(phi: &[f64]) -> bool {
    min_root_modulus(phi) > 1.0
}
