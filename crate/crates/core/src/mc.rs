//! Rank-based Monte Carlo p-values and first-level p-value combination.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Rule combining the four first-level p-values into one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combination {
    /// `1 - min(p)`.
    Min,
    /// `1 - prod(p)`.
    Product,
}

impl Combination {
    pub fn apply(self, pvals: &[f64; 4]) -> f64 {
        match self {
            Combination::Min => combine_min(pvals),
            Combination::Product => combine_prod(pvals),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Combination::Min => "min",
            Combination::Product => "prod",
        }
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn combine_min(pvals: &[f64; 4]) -> f64 {
    1.0 - pvals.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn combine_prod(pvals: &[f64; 4]) -> f64 {
    1.0 - pvals.iter().product::<f64>()
}

/// Observed statistic together with `N - 1` simulated null draws.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEnsemble {
    pub observed: f64,
    pub simulated: Vec<f64>,
}

impl MCEnsemble {
    pub fn new(observed: f64, simulated: Vec<f64>) -> Result<Self> {
        if simulated.is_empty() {
            return Err(Error::InvalidInput("an MC ensemble needs at least one simulated draw (N >= 2)".into()));
        }
        if !observed.is_finite() || simulated.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("MC ensemble values must be finite".into()));
        }
        Ok(Self { observed, simulated })
    }

    /// Total number of values `N`.
    pub fn n(&self) -> usize {
        self.simulated.len() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCTestReport {
    pub statistic_value: f64,
    /// Rank of the observed value in ascending order, in `1..=N`.
    pub rank: usize,
    pub p_value: f64,
    pub n: usize,
    pub seed: u64,
    pub tie_breaker_used: bool,
    /// Simulated replicates redrawn because their statistics were undefined.
    pub resampled: usize,
}

/// MC p-value `(N + 1 - R) / N` of the observed statistic.
///
/// Ties with the observed value are broken by independent uniforms drawn
/// from a stream seeded with `seed`, which keeps the test exact for
/// discrete statistics.
pub fn mc_pvalue(ens: &MCEnsemble, seed: u64) -> MCTestReport {
    let mut sorted = ens.simulated.clone();
    sorted.sort_by(f64::total_cmp);
    mc_pvalue_sorted(ens.observed, &sorted, seed)
}

/// [`mc_pvalue`] against simulated values already sorted ascending.
pub fn mc_pvalue_sorted(observed: f64, sorted_simulated: &[f64], seed: u64) -> MCTestReport {
    let below = sorted_simulated.partition_point(|&x| x < observed);
    let tied = sorted_simulated[below..].partition_point(|&x| x <= observed);
    let mut won_ties = 0usize;
    if tied > 0 {
        let mut rng = rng_from_seed(seed);
        let u0: f64 = rng.random();
        won_ties = (0..tied).filter(|_| rng.random::<f64>() < u0).count();
    }
    let n = sorted_simulated.len() + 1;
    let rank = 1 + below + won_ties;
    MCTestReport {
        statistic_value: observed,
        rank,
        p_value: pvalue_from_rank(rank, n),
        n,
        seed,
        tie_breaker_used: tied > 0,
        resampled: 0,
    }
}

pub fn pvalue_from_rank(rank: usize, n: usize) -> f64 {
    (n + 1 - rank) as f64 / n as f64
}

/// Smallest rank in the critical region of a level-`alpha` MC test,
/// `N - floor(N alpha) + 1`.
pub fn critical_rank(n: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    // N * alpha is often an integer that floating point lands just below
    let k = (n as f64 * alpha + 1e-9).floor() as usize;
    Ok(n - k + 1)
}

/// Induced test: reject when any p-value is at or below its own level.
pub fn bonferroni_decision(pvals: &[f64; 4], alphas: &[f64; 4]) -> bool {
    pvals.iter().zip(alphas).any(|(p, a)| p <= a)
}
