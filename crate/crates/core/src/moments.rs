//! Residual-moment statistics `M`, `V`, `S` and `K`.
//!
//! All four are ratios of centred sample moments, so they are invariant to
//! location and scale changes of the input series. Under a linear Gaussian
//! null their joint distribution is that of the same statistics computed on
//! a demeaned standard normal vector.

use std::fmt;

use crate::error::{Error, Result};

/// Tag for one of the four residual-moment statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    M,
    V,
    S,
    K,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [Statistic::M, Statistic::V, Statistic::S, Statistic::K];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::M => "M",
            Statistic::V => "V",
            Statistic::S => "S",
            Statistic::K => "K",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "M" | "m" => Some(Statistic::M),
            "V" | "v" => Some(Statistic::V),
            "S" | "s" => Some(Statistic::S),
            "K" | "k" => Some(Statistic::K),
            _ => None,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deviations of a series from its sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector(Vec<f64>);

impl ResidualVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `T^{-1} sum e_t^2`.
    pub fn variance(&self) -> f64 {
        self.0.iter().map(|e| e * e).sum::<f64>() / self.0.len() as f64
    }
}

pub fn demean(y: &[f64]) -> Result<ResidualVector> {
    if y.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 observations to demean, got {}", y.len())));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok(ResidualVector(y.iter().map(|v| v - mean).collect()))
}

/// Mean and 1/n variance of the values selected by `keep`.
fn partition_moments(e: &[f64], keep: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
    let (mut n, mut sum) = (0usize, 0.0);
    for &v in e.iter().filter(|&&v| keep(v)) {
        n += 1;
        sum += v;
    }
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    let var = e.iter().filter(|&&v| keep(v)).map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    Some((mean, var))
}

/// Standardised distance between the means of the positive and negative
/// residuals. Zero residuals are in neither group.
pub fn stat_m(e: &ResidualVector) -> Result<f64> {
    let degenerate = |reason| Error::Degenerate { statistic: Statistic::M, reason };
    let (m2, s2) = partition_moments(&e.0, |v| v > 0.0).ok_or(degenerate("no positive residuals"))?;
    let (m1, s1) = partition_moments(&e.0, |v| v < 0.0).ok_or(degenerate("no negative residuals"))?;
    let pooled = s1 + s2;
    if pooled <= 0.0 {
        return Err(degenerate("zero within-partition dispersion"));
    }
    Ok((m2 - m1).abs() / pooled.sqrt())
}

/// Ratio of the mean squared residual above the sample variance to the one
/// below it. Squares equal to the variance are in neither group.
pub fn stat_v(e: &ResidualVector) -> Result<f64> {
    let degenerate = |reason| Error::Degenerate { statistic: Statistic::V, reason };
    let sigma2 = e.variance();
    let (mut n_hi, mut sum_hi, mut n_lo, mut sum_lo) = (0usize, 0.0, 0usize, 0.0);
    for sq in e.0.iter().map(|v| v * v) {
        if sq > sigma2 {
            n_hi += 1;
            sum_hi += sq;
        } else if sq < sigma2 {
            n_lo += 1;
            sum_lo += sq;
        }
    }
    if n_hi == 0 || n_lo == 0 {
        return Err(degenerate("empty variance partition"));
    }
    let v1 = sum_lo / n_lo as f64;
    if v1 <= 0.0 {
        return Err(degenerate("zero mean square below the variance"));
    }
    Ok((sum_hi / n_hi as f64) / v1)
}

fn standardized_power_mean(e: &ResidualVector, power: i32, statistic: Statistic) -> Result<f64> {
    let sigma2 = e.variance();
    if sigma2 <= 0.0 {
        return Err(Error::Degenerate { statistic, reason: "zero variance" });
    }
    let sum: f64 = e.0.iter().map(|v| v.powi(power)).sum();
    Ok(sum / (e.len() as f64 * sigma2.powf(power as f64 / 2.0)))
}

/// Absolute sample skewness.
pub fn stat_s(e: &ResidualVector) -> Result<f64> {
    standardized_power_mean(e, 3, Statistic::S).map(f64::abs)
}

/// Absolute sample excess kurtosis.
pub fn stat_k(e: &ResidualVector) -> Result<f64> {
    standardized_power_mean(e, 4, Statistic::K).map(|b2| (b2 - 3.0).abs())
}

/// The four statistics computed from one residual vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatQuartet {
    pub m: f64,
    pub v: f64,
    pub s: f64,
    pub k: f64,
}

impl StatQuartet {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::M => self.m,
            Statistic::V => self.v,
            Statistic::S => self.s,
            Statistic::K => self.k,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m, self.v, self.s, self.k]
    }
}

pub fn compute_quartet(e: &ResidualVector) -> Result<StatQuartet> {
    Ok(StatQuartet { m: stat_m(e)?, v: stat_v(e)?, s: stat_s(e)?, k: stat_k(e)? })
}

/// `compute_quartet(demean(y))`.
pub fn quartet_of_series(y: &[f64]) -> Result<StatQuartet> {
    compute_quartet(&demean(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rv(v: &[f64]) -> ResidualVector {
        demean(v).unwrap()
    }

    #[test]
    fn demean_examples() {
        assert_eq!(demean(&[1.0, 2.0, 3.0, 4.0]).unwrap().values(), &[-1.5, -0.5, 0.5, 1.5]);
        assert!(demean(&[7.0; 5]).unwrap().values().iter().all(|&v| v == 0.0));
        let a = demean(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = demean(&[1001.0, 1002.0, 1003.0, 1004.0]).unwrap();
        assert_eq!(a, b);
        assert!(demean(&[1.0]).is_err());
    }

    #[test]
    fn m_statistic() {
        let e = rv(&[-1.5, -0.5, 0.5, 1.5]);
        assert_relative_eq!(stat_m(&e).unwrap(), 2.0 / 0.5_f64.sqrt(), epsilon = 1e-14);
        assert_eq!(
            stat_m(&rv(&[-1.0, -1.0, 1.0, 1.0])),
            Err(Error::Degenerate { statistic: Statistic::M, reason: "zero within-partition dispersion" })
        );
        let scaled = rv(&[-4.5, -1.5, 1.5, 4.5]);
        assert_relative_eq!(stat_m(&scaled).unwrap(), stat_m(&e).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn m_ignores_zero_residuals() {
        // the zero sits in neither partition
        let e = rv(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_relative_eq!(stat_m(&e).unwrap(), 3.0 / 0.5_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn v_statistic() {
        let e = rv(&[-1.5, -0.5, 0.5, 1.5]);
        assert_relative_eq!(stat_v(&e).unwrap(), 9.0, epsilon = 1e-13);
        assert!(matches!(stat_v(&rv(&[-1.0, 1.0, -1.0, 1.0])), Err(Error::Degenerate { statistic: Statistic::V, .. })));
        let scaled = rv(&[-3.0, -1.0, 1.0, 3.0]);
        assert_relative_eq!(stat_v(&scaled).unwrap(), 9.0, epsilon = 1e-13);
    }

    #[test]
    fn s_statistic() {
        assert_eq!(stat_s(&rv(&[-1.5, -0.5, 0.5, 1.5])).unwrap(), 0.0);
        // sum e^3 = -3 + 27 = 24, sigma^2 = 12 / 4 = 3
        let e = rv(&[-1.0, -1.0, -1.0, 3.0]);
        assert_relative_eq!(stat_s(&e).unwrap(), 24.0 / (4.0 * 3.0_f64.powf(1.5)), epsilon = 1e-14);
        assert_relative_eq!(stat_s(&e).unwrap(), 1.1547005383792515, epsilon = 1e-14);
        let flipped = rv(&[1.0, 1.0, 1.0, -3.0]);
        assert_eq!(stat_s(&flipped).unwrap(), stat_s(&e).unwrap());
        assert!(stat_s(&rv(&[2.0, 2.0, 2.0])).is_err());
    }

    #[test]
    fn k_statistic() {
        assert_relative_eq!(stat_k(&rv(&[-1.5, -0.5, 0.5, 1.5])).unwrap(), 1.36, epsilon = 1e-14);
        assert!(stat_k(&rv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn quartet_example() {
        let q = compute_quartet(&rv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_relative_eq!(q.m, 2.8284271247461903, epsilon = 1e-14);
        assert_relative_eq!(q.v, 9.0, epsilon = 1e-13);
        assert_eq!(q.s, 0.0);
        assert_relative_eq!(q.k, 1.36, epsilon = 1e-14);
    }

    #[test]
    fn quartet_names_failing_statistic() {
        let err = compute_quartet(&rv(&[-1.0, -1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Degenerate { statistic: Statistic::M, .. }));
    }
}
