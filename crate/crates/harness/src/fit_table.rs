//! Regeneration of the logistic p-value coefficients by simulation.

use msar_mc::coeffs::{LogisticCoeffTable, LogisticCoeffs};
use msar_mc::linearity::simulate_null_quartets;
use msar_mc::moments::Statistic;
use msar_mc::nls::{empirical_quantiles, fit_logistic_cdf, quantile_levels, sup_cdf_distance, MIN_FIT_SAMPLES};
use msar_mc::rng::derive_seed;

use crate::error::{HarnessError, Result};

/// A fitted statistic with the empirical quantiles its fit was matched on.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedStatistic {
    pub coeffs: LogisticCoeffs,
    pub quantile_points: Vec<f64>,
}

impl FittedStatistic {
    /// Largest CDF gap to `reference` over the fitted quantile points.
    pub fn sup_distance_to(&self, reference: &LogisticCoeffs) -> f64 {
        sup_cdf_distance(&self.coeffs, reference, &self.quantile_points)
    }
}

/// Simulate `draws` null samples at each size and fit all four statistics.
pub fn regenerate_coeff_table(
    sizes: &[usize],
    draws: usize,
    master_seed: u64,
) -> Result<(LogisticCoeffTable, Vec<FittedStatistic>)> {
    if draws < MIN_FIT_SAMPLES {
        return Err(HarnessError::Config(format!("fit-table needs at least {MIN_FIT_SAMPLES} draws, got {draws}")));
    }
    let mut table = LogisticCoeffTable::empty();
    let mut fitted = Vec::new();
    let levels = quantile_levels();
    for &t in sizes {
        log::info!("simulating {draws} null samples of size {t}");
        let null = simulate_null_quartets(t, draws, derive_seed(master_seed, &[t as u64]))?;
        for stat in Statistic::ALL {
            let mut samples: Vec<f64> = null.quartets.iter().map(|q| q.get(stat)).collect();
            let coeffs = fit_logistic_cdf(&samples, stat, t)?;
            samples.sort_by(f64::total_cmp);
            table.insert(coeffs);
            fitted.push(FittedStatistic { coeffs, quantile_points: empirical_quantiles(&samples, &levels) });
        }
    }
    Ok((table, fitted))
}
