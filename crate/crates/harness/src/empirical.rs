//! Linearity tests on an observed series, reported in the layout of the
//! output-growth application: one row per method with the p-value, the AR
//! coefficients at which it was attained and their smallest root modulus.

use msar_mc::ar::{min_root_modulus, ols_ar_fit, ARFit};
use msar_mc::coeffs::LogisticCoeffTable;
use msar_mc::grid::{build_grid, default_points_per_dim};
use msar_mc::linearity::{linearity_battery, LinearityReport, TestMethod};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub fit: ARFit,
    pub reports: Vec<LinearityReport>,
    /// MMC grid points after stationarity filtering (0 without MMC).
    pub grid_points: usize,
}

impl EmpiricalReport {
    pub fn csv_header(&self) -> Vec<String> {
        LinearityReport::csv_header(self.fit.order()).split(',').map(str::to_string).collect()
    }

    /// OLS row first (no p-value), then one row per method.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut ols = vec!["OLS".to_string(), String::new()];
        ols.extend(self.fit.phi.iter().map(|p| format!("{p:.6}")));
        ols.push(format!("{:.6}", min_root_modulus(&self.fit.phi)));
        let mut rows = vec![ols];
        rows.extend(self.reports.iter().map(|r| r.csv_row().split(',').map(str::to_string).collect()));
        rows
    }
}

/// Run `methods` on `y` with an AR(`r`) null. All methods share one
/// replicate set; `grid_points = 0` picks the default grid density.
pub fn run_empirical(
    y: &[f64],
    r: usize,
    n: usize,
    methods: &[TestMethod],
    grid_points: usize,
    master_seed: u64,
) -> Result<EmpiricalReport> {
    let fit = ols_ar_fit(y, r)?;
    let table = LogisticCoeffTable::default();
    let grid = if methods.iter().any(|m| m.is_maximized()) {
        let ppd = if grid_points == 0 { default_points_per_dim(r) } else { grid_points };
        Some(build_grid(&fit, ppd, true)?)
    } else {
        None
    };
    let reports = linearity_battery(y, r, n, methods, &table, grid.as_ref(), master_seed)?;
    Ok(EmpiricalReport { fit, reports, grid_points: grid.map_or(0, |g| g.len()) })
}
