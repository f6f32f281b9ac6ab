//! Hyper-rectangular grids over the AR nuisance space.

use crate::ar::{is_stationary, ARFit};
use crate::error::{Error, Result};

/// Default number of standard errors on each side of the OLS estimate.
pub const DEFAULT_SE_MULTIPLE: f64 = 2.0;

/// Default grid resolution for an AR(r) nuisance box.
pub fn default_points_per_dim(r: usize) -> usize {
    match r {
        0 | 1 => 41,
        2 => 21,
        3 => 13,
        _ => 9,
    }
}

/// Box `center +- half_width` with a uniform grid on each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceBox {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    pub points_per_dim: usize,
    pub stationarity_filter: bool,
    points: Vec<Vec<f64>>,
    raw_points: usize,
}

impl NuisanceBox {
    pub fn new(center: Vec<f64>, half_width: Vec<f64>, points_per_dim: usize, stationarity_filter: bool) -> Result<Self> {
        if center.len() != half_width.len() {
            return Err(Error::InvalidInput("grid center and half-width differ in dimension".into()));
        }
        if points_per_dim == 0 || points_per_dim.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "points per dimension must be odd so the center is on the grid (got {points_per_dim})"
            )));
        }
        if half_width.iter().chain(&center).any(|v| !v.is_finite()) || half_width.iter().any(|&h| h < 0.0) {
            return Err(Error::InvalidInput("grid center and half-widths must be finite, half-widths >= 0".into()));
        }
        let axes: Vec<Vec<f64>> = center
            .iter()
            .zip(&half_width)
            .map(|(&c, &h)| axis(c, h, points_per_dim))
            .collect();
        let dims = center.len();
        let raw_points = points_per_dim.pow(dims as u32);
        let mut points = Vec::new();
        let mut digits = vec![0usize; dims];
        for _ in 0..raw_points {
            let point: Vec<f64> = digits.iter().enumerate().map(|(d, &j)| axes[d][j]).collect();
            if !stationarity_filter || is_stationary(&point) {
                points.push(point);
            }
            // row-major: last dimension varies fastest
            for d in (0..dims).rev() {
                digits[d] += 1;
                if digits[d] < points_per_dim {
                    break;
                }
                digits[d] = 0;
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { center, half_width, points_per_dim, stationarity_filter, points, raw_points })
    }

    /// Retained grid points in row-major order.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid size before stationarity filtering.
    pub fn raw_len(&self) -> usize {
        self.raw_points
    }

    pub fn dims(&self) -> usize {
        self.center.len()
    }

    pub fn contains_center(&self) -> bool {
        self.points.iter().any(|p| p == &self.center)
    }
}

fn axis(center: f64, half_width: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![center];
    }
    let m = ((k - 1) / 2) as f64;
    (0..k).map(|j| center + half_width * ((j as f64 - m) / m)).collect()
}

/// Grid on `phi_hat +- 2 se` around an OLS fit.
pub fn build_grid(fit: &ARFit, points_per_dim: usize, stationarity_filter: bool) -> Result<NuisanceBox> {
    build_grid_scaled(fit, points_per_dim, stationarity_filter, DEFAULT_SE_MULTIPLE)
}

/// Grid on `phi_hat +- se_multiple * se`.
pub fn build_grid_scaled(
    fit: &ARFit,
    points_per_dim: usize,
    stationarity_filter: bool,
    se_multiple: f64,
) -> Result<NuisanceBox> {
    let half_width = fit.phi_se.iter().map(|se| se_multiple * se).collect();
    NuisanceBox::new(fit.phi.clone(), half_width, points_per_dim, stationarity_filter)
}
