//! Local and maximized Monte Carlo linearity tests.
//!
//! The series is AR-filtered at a candidate coefficient vector, the filtered
//! values are demeaned and summarised by the four moment statistics, and
//! their approximate p-values are combined. The combined statistic is ranked
//! against `N - 1` replicates computed from demeaned standard normal
//! vectors of the same length. Because the replicates do not depend on the
//! AR coefficients, one replicate set serves every grid point of the
//! maximized test.

use std::fmt;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::ar::{ar_filter, min_root_modulus, ols_ar_fit};
use crate::coeffs::{pvalues_with, LogisticCoeffTable, LogisticCoeffs};
use crate::error::{Error, Result};
use crate::grid::NuisanceBox;
use crate::mc::{mc_pvalue_sorted, Combination, MCTestReport};
use crate::moments::{compute_quartet, demean, quartet_of_series, StatQuartet};
use crate::rng::{derive_seed, substream};

const REPLICATE_DOMAIN: u64 = 0x5245_504c; // "REPL"
const TIE_DOMAIN: u64 = 0x5449_4553; // "TIES"
const MAX_REDRAWS: u64 = 10_000;

/// Null draws of the four statistics from demeaned standard normal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDraws {
    pub quartets: Vec<StatQuartet>,
    /// Number of draws replaced because a statistic was undefined.
    pub resampled: usize,
}

/// Simulate `count` null quartets for vectors of length `len`.
///
/// Draw `i` uses the substream `(seed, i, attempt)`; a degenerate draw is
/// replaced by the next attempt, so the output does not depend on how the
/// work is scheduled.
pub fn simulate_null_quartets(len: usize, count: usize, seed: u64) -> Result<NullDraws> {
    if len < 4 {
        return Err(Error::InvalidInput(format!("null vectors need at least 4 observations, got {len}")));
    }
    let draws: Vec<(StatQuartet, usize)> = (0..count as u64)
        .into_par_iter()
        .map(|i| null_quartet(len, seed, i))
        .collect::<Result<_>>()?;
    let resampled = draws.iter().map(|d| d.1).sum();
    if resampled > 0 {
        log::info!("redrew {resampled} degenerate null replicates (len {len}, seed {seed})");
    }
    Ok(NullDraws { quartets: draws.into_iter().map(|d| d.0).collect(), resampled })
}

fn null_quartet(len: usize, seed: u64, index: u64) -> Result<(StatQuartet, usize)> {
    let mut buf = vec![0.0; len];
    for attempt in 0..MAX_REDRAWS {
        let mut rng = substream(seed, &[index, attempt]);
        for v in buf.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        match compute_quartet(&demean(&buf)?) {
            Ok(q) => return Ok((q, attempt as usize)),
            Err(Error::Degenerate { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidInput(format!("null replicate {index} stayed degenerate after {MAX_REDRAWS} redraws")))
}

/// First-level p-values of `N - 1` null replicates of a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSet {
    len: usize,
    pvalues: Vec<[f64; 4]>,
    resampled: usize,
    master_seed: u64,
}

impl ReplicateSet {
    /// Simulate the `n - 1` replicates of an `n`-point MC test.
    pub fn simulate(len: usize, n: usize, table: &LogisticCoeffTable, master_seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("MC tests need N >= 2, got {n}")));
        }
        let coeffs = table.quartet_coeffs(len)?;
        let draws = simulate_null_quartets(len, n - 1, derive_seed(master_seed, &[REPLICATE_DOMAIN]))?;
        let pvalues = draws.quartets.iter().map(|q| pvalues_with(q, &coeffs)).collect();
        Ok(Self { len, pvalues, resampled: draws.resampled, master_seed })
    }

    /// Length of each replicate vector.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.pvalues.is_empty()
    }

    /// Total MC count `N` (replicates plus the observed statistic).
    pub fn n(&self) -> usize {
        self.pvalues.len() + 1
    }

    pub fn resampled(&self) -> usize {
        self.resampled
    }

    pub fn first_level_pvalues(&self) -> &[[f64; 4]] {
        &self.pvalues
    }

    /// Combined replicate statistics in replicate order.
    pub fn combined(&self, combination: Combination) -> Vec<f64> {
        self.pvalues.iter().map(|p| combination.apply(p)).collect()
    }

    fn sorted_combined(&self, combination: Combination) -> Vec<f64> {
        let mut v = self.combined(combination);
        v.sort_by(f64::total_cmp);
        v
    }

    fn tie_seed(&self) -> u64 {
        derive_seed(self.master_seed, &[TIE_DOMAIN])
    }
}

/// Combined statistic of a series: its quartet's approximate p-values
/// merged by `combination`.
pub fn combined_statistic(z: &[f64], coeffs: &[LogisticCoeffs; 4], combination: Combination) -> Result<f64> {
    let q = quartet_of_series(z)?;
    Ok(combination.apply(&pvalues_with(&q, coeffs)))
}

fn rank_against(observed: f64, sorted: &[f64], reps: &ReplicateSet, master_seed: u64) -> MCTestReport {
    let mut report = mc_pvalue_sorted(observed, sorted, reps.tie_seed());
    report.seed = master_seed;
    report.resampled = reps.resampled;
    report
}

/// MC test of the mixture null on an already filtered series `z`.
pub fn mc_mixture_test(
    z: &[f64],
    n: usize,
    combination: Combination,
    table: &LogisticCoeffTable,
    master_seed: u64,
) -> Result<MCTestReport> {
    let coeffs = table.quartet_coeffs(z.len())?;
    let observed = combined_statistic(z, &coeffs, combination)?;
    let reps = ReplicateSet::simulate(z.len(), n, table, master_seed)?;
    Ok(rank_against(observed, &reps.sorted_combined(combination), &reps, master_seed))
}

/// Local or maximized test, with the combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestMethod {
    LmcMin,
    LmcProd,
    MmcMin,
    MmcProd,
}

impl TestMethod {
    pub const ALL: [TestMethod; 4] = [TestMethod::LmcMin, TestMethod::LmcProd, TestMethod::MmcMin, TestMethod::MmcProd];

    pub fn new(maximized: bool, combination: Combination) -> Self {
        match (maximized, combination) {
            (false, Combination::Min) => TestMethod::LmcMin,
            (false, Combination::Product) => TestMethod::LmcProd,
            (true, Combination::Min) => TestMethod::MmcMin,
            (true, Combination::Product) => TestMethod::MmcProd,
        }
    }

    pub fn combination(self) -> Combination {
        match self {
            TestMethod::LmcMin | TestMethod::MmcMin => Combination::Min,
            TestMethod::LmcProd | TestMethod::MmcProd => Combination::Product,
        }
    }

    pub fn is_maximized(self) -> bool {
        matches!(self, TestMethod::MmcMin | TestMethod::MmcProd)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::LmcMin => "LMC_min",
            TestMethod::LmcProd => "LMC_prod",
            TestMethod::MmcMin => "MMC_min",
            TestMethod::MmcProd => "MMC_prod",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of an LMC or MMC test on a series.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    pub method: TestMethod,
    pub p_value: f64,
    /// Combined statistic at `phi_at_report`.
    pub statistic_value: f64,
    pub rank: usize,
    /// OLS estimate (LMC) or first maximizer of the p-value (MMC).
    pub phi_at_report: Vec<f64>,
    pub min_root_modulus: f64,
    pub n: usize,
    pub seed: u64,
    pub grid_points_evaluated: usize,
}

impl LinearityReport {
    pub fn csv_header(r: usize) -> String {
        let mut cols = vec!["method".to_string(), "p_value".to_string()];
        cols.extend((1..=r).map(|k| format!("phi{k}")));
        cols.push("root_modulus".to_string());
        cols.join(",")
    }

    /// `method,p_value,phi1..phir,|z|` row.
    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.method.to_string(), format!("{:.4}", self.p_value)];
        cols.extend(self.phi_at_report.iter().map(|p| format!("{p:.6}")));
        cols.push(format!("{:.6}", self.min_root_modulus));
        cols.join(",")
    }

    /// Human-readable `key = value` record.
    pub fn key_value(&self) -> String {
        let phi: Vec<String> = self.phi_at_report.iter().map(|p| format!("{p:.4}")).collect();
        format!(
            "method = {}\np_value = {:.4}\nstatistic = {:.6}\nrank = {}\nphi = {}\nmin_root_modulus = {:.4}\n\
             N = {}\nseed = {}\ngrid_points_evaluated = {}\n",
            self.method,
            self.p_value,
            self.statistic_value,
            self.rank,
            phi.join(", "),
            self.min_root_modulus,
            self.n,
            self.seed,
            self.grid_points_evaluated
        )
    }
}

/// MC p-value at one point of the nuisance space.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPointValue {
    pub phi: Vec<f64>,
    pub statistic: f64,
    pub rank: usize,
    pub p_value: f64,
}

/// Evaluate the MC p-value of `y` filtered at each grid point against one
/// fixed replicate set. Results are in grid order.
pub fn mmc_surface(
    y: &[f64],
    grid: &NuisanceBox,
    combination: Combination,
    table: &LogisticCoeffTable,
    reps: &ReplicateSet,
) -> Result<Vec<GridPointValue>> {
    let r = grid.dims();
    if y.len() <= r || y.len() - r != reps.len() {
        return Err(Error::InvalidInput(format!(
            "replicate length {} does not match series length {} with {r} lags",
            reps.len(),
            y.len()
        )));
    }
    let coeffs = table.quartet_coeffs(reps.len())?;
    let sorted = reps.sorted_combined(combination);
    let tie_seed = reps.tie_seed();
    grid.points()
        .par_iter()
        .map(|phi| {
            let z = ar_filter(y, phi)?;
            let statistic = combined_statistic(&z, &coeffs, combination)?;
            let rep = mc_pvalue_sorted(statistic, &sorted, tie_seed);
            Ok(GridPointValue { phi: phi.clone(), statistic, rank: rep.rank, p_value: rep.p_value })
        })
        .collect()
}

fn lmc_with(
    y: &[f64],
    phi_hat: &[f64],
    combination: Combination,
    table: &LogisticCoeffTable,
    reps: &ReplicateSet,
    master_seed: u64,
) -> Result<LinearityReport> {
    let z = ar_filter(y, phi_hat)?;
    let coeffs = table.quartet_coeffs(z.len())?;
    let statistic = combined_statistic(&z, &coeffs, combination)?;
    let rep = rank_against(statistic, &reps.sorted_combined(combination), reps, master_seed);
    Ok(LinearityReport {
        method: TestMethod::new(false, combination),
        p_value: rep.p_value,
        statistic_value: statistic,
        rank: rep.rank,
        phi_at_report: phi_hat.to_vec(),
        min_root_modulus: min_root_modulus(phi_hat),
        n: rep.n,
        seed: master_seed,
        grid_points_evaluated: 1,
    })
}

fn mmc_with(
    y: &[f64],
    grid: &NuisanceBox,
    combination: Combination,
    table: &LogisticCoeffTable,
    reps: &ReplicateSet,
    master_seed: u64,
) -> Result<LinearityReport> {
    let surface = mmc_surface(y, grid, combination, table, reps)?;
    // first maximizer in grid order
    let best = surface
        .iter()
        .fold(None::<&GridPointValue>, |acc, g| match acc {
            Some(b) if b.p_value >= g.p_value => Some(b),
            _ => Some(g),
        })
        .ok_or(Error::EmptyGrid)?;
    Ok(LinearityReport {
        method: TestMethod::new(true, combination),
        p_value: best.p_value,
        statistic_value: best.statistic,
        rank: best.rank,
        phi_at_report: best.phi.clone(),
        min_root_modulus: min_root_modulus(&best.phi),
        n: reps.n(),
        seed: master_seed,
        grid_points_evaluated: surface.len(),
    })
}

/// Local MC test at the OLS estimate of an AR(r).
pub fn lmc_test(
    y: &[f64],
    r: usize,
    n: usize,
    combination: Combination,
    table: &LogisticCoeffTable,
    master_seed: u64,
) -> Result<LinearityReport> {
    let fit = ols_ar_fit(y, r)?;
    let reps = ReplicateSet::simulate(y.len() - r, n, table, master_seed)?;
    lmc_with(y, &fit.phi, combination, table, &reps, master_seed)
}

/// Maximized MC test over the points of `grid`.
pub fn mmc_test(
    y: &[f64],
    r: usize,
    n: usize,
    combination: Combination,
    table: &LogisticCoeffTable,
    grid: &NuisanceBox,
    master_seed: u64,
) -> Result<LinearityReport> {
    if grid.dims() != r {
        return Err(Error::InvalidInput(format!("grid has {} dimensions but the AR order is {r}", grid.dims())));
    }
    if y.len() <= r {
        return Err(Error::InvalidInput(format!("series of length {} is too short for {r} lags", y.len())));
    }
    let reps = ReplicateSet::simulate(y.len() - r, n, table, master_seed)?;
    mmc_with(y, grid, combination, table, &reps, master_seed)
}

/// Run several methods on one series sharing a single replicate set.
///
/// Each report equals what the corresponding single-method function returns
/// for the same arguments.
pub fn linearity_battery(
    y: &[f64],
    r: usize,
    n: usize,
    methods: &[TestMethod],
    table: &LogisticCoeffTable,
    grid: Option<&NuisanceBox>,
    master_seed: u64,
) -> Result<Vec<LinearityReport>> {
    let fit = ols_ar_fit(y, r)?;
    let reps = ReplicateSet::simulate(y.len() - r, n, table, master_seed)?;
    methods
        .iter()
        .map(|&m| {
            if m.is_maximized() {
                let grid = grid.ok_or_else(|| Error::InvalidInput("maximized test requested without a grid".into()))?;
                mmc_with(y, grid, m.combination(), table, &reps, master_seed)
            } else {
                lmc_with(y, &fit.phi, m.combination(), table, &reps, master_seed)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn normal_series(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn mixture_test_is_deterministic() {
        let table = LogisticCoeffTable::default();
        let z = normal_series(100, 1);
        let a = mc_mixture_test(&z, 100, Combination::Min, &table, 77).unwrap();
        let b = mc_mixture_test(&z, 100, Combination::Min, &table, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 100);
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn replicates_share_stream_with_null_draws() {
        let table = LogisticCoeffTable::default();
        let reps = ReplicateSet::simulate(60, 20, &table, 5).unwrap();
        let direct = simulate_null_quartets(60, 19, derive_seed(5, &[REPLICATE_DOMAIN])).unwrap();
        let coeffs = table.quartet_coeffs(60).unwrap();
        for (p, q) in reps.first_level_pvalues().iter().zip(&direct.quartets) {
            assert_eq!(*p, pvalues_with(q, &coeffs));
        }
    }

    #[test]
    fn lmc_location_scale_invariant() {
        let table = LogisticCoeffTable::default();
        let y = normal_series(120, 3);
        let shifted: Vec<f64> = y.iter().map(|v| 3.0 * v + 10.0).collect();
        let a = lmc_test(&y, 1, 100, Combination::Product, &table, 9).unwrap();
        let b = lmc_test(&shifted, 1, 100, Combination::Product, &table, 9).unwrap();
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn mmc_dominates_lmc_at_center() {
        let table = LogisticCoeffTable::default();
        let y = normal_series(150, 4);
        let fit = ols_ar_fit(&y, 1).unwrap();
        let grid = build_grid(&fit, 11, true).unwrap();
        assert!(grid.contains_center());
        for c in [Combination::Min, Combination::Product] {
            let l = lmc_test(&y, 1, 100, c, &table, 21).unwrap();
            let m = mmc_test(&y, 1, 100, c, &table, &grid, 21).unwrap();
            assert!(m.p_value >= l.p_value);
            assert_eq!(m.grid_points_evaluated, grid.len());
        }
    }

    #[test]
    fn battery_matches_single_calls() {
        let table = LogisticCoeffTable::default();
        let y = normal_series(90, 6);
        let fit = ols_ar_fit(&y, 2).unwrap();
        let grid = build_grid(&fit, 5, true).unwrap();
        let all = linearity_battery(&y, 2, 50, &TestMethod::ALL, &table, Some(&grid), 8).unwrap();
        assert_eq!(all[0], lmc_test(&y, 2, 50, Combination::Min, &table, 8).unwrap());
        assert_eq!(all[1], lmc_test(&y, 2, 50, Combination::Product, &table, 8).unwrap());
        assert_eq!(all[2], mmc_test(&y, 2, 50, Combination::Min, &table, &grid, 8).unwrap());
        assert_eq!(all[3], mmc_test(&y, 2, 50, Combination::Product, &table, &grid, 8).unwrap());
    }

    #[test]
    fn method_labels_round_trip() {
        for m in TestMethod::ALL {
            assert_eq!(TestMethod::parse(m.as_str()), Some(m));
        }
        assert_eq!(TestMethod::parse("mmc_PROD"), Some(TestMethod::MmcProd));
        assert_eq!(TestMethod::parse("bogus"), None);
    }

    #[test]
    fn report_row_layout() {
        let rep = LinearityReport {
            method: TestMethod::MmcMin,
            p_value: 1.0,
            statistic_value: 0.5,
            rank: 1,
            phi_at_report: vec![0.48, 0.2],
            min_root_modulus: 1.23,
            n: 100,
            seed: 1,
            grid_points_evaluated: 10,
        };
        assert_eq!(LinearityReport::csv_header(2), "method,p_value,phi1,phi2,root_modulus");
        assert_eq!(rep.csv_row(), "MMC_min,1.0000,0.480000,0.200000,1.230000");
        assert!(rep.key_value().contains("grid_points_evaluated = 10"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let table = LogisticCoeffTable::default();
        let y = normal_series(50, 2);
        assert!(mc_mixture_test(&y, 1, Combination::Min, &table, 0).is_err());
        assert!(matches!(
            mc_mixture_test(&[1.0, 1.0, 1.0, 1.0, 1.0], 10, Combination::Min, &table, 0),
            Err(Error::Degenerate { .. })
        ));
        let grid = NuisanceBox::new(vec![0.1, 0.1], vec![0.1, 0.1], 3, true).unwrap();
        assert!(mmc_test(&y, 1, 10, Combination::Min, &table, &grid, 0).is_err());
    }
}
