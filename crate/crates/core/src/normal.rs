//! Standard normal helpers with tail-safe evaluation.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Mills ratio `(1 - Φ(u)) / φ(u)` for `u >= 8`, by a backward-evaluated
/// continued fraction `1/(u+1/(u+2/(u+3/(u+...))))`.
fn mills_ratio_upper(u: f64) -> f64 {
    debug_assert!(u >= 8.0);
    let mut tail = u;
    for k in (1..=60).rev() {
        tail = u + k as f64 / tail;
    }
    1.0 / tail
}

/// `ln(Φ(x) / φ(x))`, finite for every finite `x`.
///
/// For `x < -8` the ratio is the Mills ratio of `-x`; otherwise it is
/// evaluated directly in log space.
pub fn ln_cdf_over_pdf(x: f64) -> f64 {
    if x < -8.0 {
        mills_ratio_upper(-x).ln()
    } else {
        cdf(x).ln() + 0.5 * x * x + 0.5 * (2.0 * PI).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_relative_eq!(cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(cdf(1.959963984540054), 0.975, epsilon = 1e-11);
        assert_relative_eq!(cdf(-3.0), 0.0013498980316301, max_relative = 1e-10);
    }

    #[test]
    fn mills_ratio_continuous_at_switch() {
        // Just above the branch point both forms are valid.
        let direct = |x: f64| cdf(x).ln() + 0.5 * x * x + 0.5 * (2.0 * PI).ln();
        let x = -8.0 - 1e-12;
        assert_relative_eq!(ln_cdf_over_pdf(x), direct(-8.0), max_relative = 1e-9);
    }

    #[test]
    fn deep_tail_matches_asymptotic() {
        // R(u) ~ 1/u - 1/u^3 + 3/u^5 for large u.
        let u = 40.0_f64;
        let asym = 1.0 / u - 1.0 / u.powi(3) + 3.0 / u.powi(5) - 15.0 / u.powi(7);
        assert_relative_eq!(ln_cdf_over_pdf(-u).exp(), asym, max_relative = 1e-9);
    }
}
