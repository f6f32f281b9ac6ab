//! Logistic approximations to the null CDFs of the moment statistics.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::moments::{StatQuartet, Statistic};

const DEFAULT_TABLE: &str = include_str!("../data/logistic_coeffs.csv");

/// Coefficients of `F(x) = exp(g0 + g1 x) / (1 + exp(g0 + g1 x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticCoeffs {
    pub statistic: Statistic,
    pub sample_size: usize,
    pub gamma0: f64,
    pub gamma1: f64,
}

impl LogisticCoeffs {
    pub fn new(statistic: Statistic, sample_size: usize, gamma0: f64, gamma1: f64) -> Result<Self> {
        if !(gamma1 > 0.0) || !gamma0.is_finite() || !gamma1.is_finite() {
            return Err(Error::InvalidInput(format!(
                "logistic coefficients for {statistic} at T = {sample_size} must be finite with gamma1 > 0 \
                 (got {gamma0}, {gamma1})"
            )));
        }
        Ok(Self { statistic, sample_size, gamma0, gamma1 })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        logistic_cdf(x, self)
    }

    /// Approximate upper-tail p-value `1 - F(x)`.
    pub fn upper_pvalue(&self, x: f64) -> f64 {
        // 1 - F(x) = F evaluated at the mirrored index, without cancellation
        logistic(-(self.gamma0 + self.gamma1 * x))
    }

    /// Point where `F = 0.5`.
    pub fn midpoint(&self) -> f64 {
        -self.gamma0 / self.gamma1
    }
}

fn logistic(u: f64) -> f64 {
    if u > 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_cdf(x: f64, c: &LogisticCoeffs) -> f64 {
    logistic(c.gamma0 + c.gamma1 * x)
}

/// How sample sizes missing from the table are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeLookup {
    /// Linear interpolation in `T` between bracketing entries, linear
    /// extrapolation from the two nearest entries outside the table.
    #[default]
    Interpolate,
    ExactOnly,
}

/// Per-statistic, per-sample-size logistic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticCoeffTable {
    entries: BTreeMap<(Statistic, usize), (f64, f64)>,
    lookup: SizeLookup,
}

impl Default for LogisticCoeffTable {
    /// The shipped table (T = 50, 100, 150, 200, 250).
    fn default() -> Self {
        Self::from_csv(DEFAULT_TABLE.as_bytes()).expect("shipped coefficient table parses")
    }
}

impl LogisticCoeffTable {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new(), lookup: SizeLookup::default() }
    }

    pub fn with_lookup(mut self, lookup: SizeLookup) -> Self {
        self.lookup = lookup;
        self
    }

    pub fn lookup(&self) -> SizeLookup {
        self.lookup
    }

    pub fn insert(&mut self, c: LogisticCoeffs) {
        self.entries.insert((c.statistic, c.sample_size), (c.gamma0, c.gamma1));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = LogisticCoeffs> + '_ {
        self.entries.iter().map(|(&(statistic, sample_size), &(gamma0, gamma1))| LogisticCoeffs {
            statistic,
            sample_size,
            gamma0,
            gamma1,
        })
    }

    /// Sample sizes with an entry for `stat`, ascending.
    pub fn sample_sizes(&self, stat: Statistic) -> Vec<usize> {
        self.entries.keys().filter(|(s, _)| *s == stat).map(|&(_, t)| t).collect()
    }

    /// Coefficients for `stat` at sample size `t`.
    pub fn coeffs(&self, stat: Statistic, t: usize) -> Result<LogisticCoeffs> {
        if let Some(&(g0, g1)) = self.entries.get(&(stat, t)) {
            return LogisticCoeffs::new(stat, t, g0, g1);
        }
        if self.lookup == SizeLookup::ExactOnly {
            return Err(Error::UnsupportedSampleSize(t));
        }
        let sizes = self.sample_sizes(stat);
        if sizes.len() < 2 {
            return Err(Error::UnsupportedSampleSize(t));
        }
        let upper = sizes.partition_point(|&s| s < t).clamp(1, sizes.len() - 1);
        let (lo, hi) = (sizes[upper - 1], sizes[upper]);
        let (g0_lo, g1_lo) = self.entries[&(stat, lo)];
        let (g0_hi, g1_hi) = self.entries[&(stat, hi)];
        let w = (t as f64 - lo as f64) / (hi as f64 - lo as f64);
        LogisticCoeffs::new(stat, t, g0_lo + w * (g0_hi - g0_lo), g1_lo + w * (g1_hi - g1_lo))
    }

    /// Coefficients for all four statistics at sample size `t`.
    pub fn quartet_coeffs(&self, t: usize) -> Result<[LogisticCoeffs; 4]> {
        Ok([
            self.coeffs(Statistic::M, t)?,
            self.coeffs(Statistic::V, t)?,
            self.coeffs(Statistic::S, t)?,
            self.coeffs(Statistic::K, t)?,
        ])
    }

    /// Read a `statistic,T,gamma0,gamma1` table with a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut table = Self::empty();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::InvalidInput(format!("coefficient table line {line}: {e}")))?;
            if record.len() != 4 {
                return Err(Error::InvalidInput(format!("coefficient table line {line}: expected 4 fields")));
            }
            let bad = |what: &str| Error::InvalidInput(format!("coefficient table line {line}: bad {what}"));
            let stat = Statistic::parse(&record[0]).ok_or_else(|| bad("statistic"))?;
            let t: usize = record[1].parse().map_err(|_| bad("T"))?;
            let g0: f64 = record[2].parse().map_err(|_| bad("gamma0"))?;
            let g1: f64 = record[3].parse().map_err(|_| bad("gamma1"))?;
            table.insert(LogisticCoeffs::new(stat, t, g0, g1)?);
        }
        Ok(table)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["statistic", "T", "gamma0", "gamma1"])?;
        for c in self.entries() {
            w.write_record([
                c.statistic.to_string(),
                c.sample_size.to_string(),
                format!("{:.3}", c.gamma0),
                format!("{:.3}", c.gamma1),
            ])?;
        }
        w.flush()
    }
}

/// First-level p-values `1 - F(x)` of a quartet, in `M, V, S, K` order.
pub fn approx_pvalues(q: &StatQuartet, table: &LogisticCoeffTable, t: usize) -> Result<[f64; 4]> {
    let cs = table.quartet_coeffs(t)?;
    Ok(pvalues_with(q, &cs))
}

pub(crate) fn pvalues_with(q: &StatQuartet, cs: &[LogisticCoeffs; 4]) -> [f64; 4] {
    let x = q.as_array();
    std::array::from_fn(|i| cs[i].upper_pvalue(x[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_is_half() {
        let c = LogisticCoeffs::new(Statistic::V, 100, -10.923, 1.253).unwrap();
        assert_relative_eq!(c.cdf(c.midpoint()), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn m_at_t100() {
        let table = LogisticCoeffTable::default();
        let c = table.coeffs(Statistic::M, 100).unwrap();
        assert_eq!((c.gamma0, c.gamma1), (-23.041, 12.125));
        // u = -23.041 + 24.25 = 1.209; F = 1/(1+exp(-1.209))
        let expected = 1.0 / (1.0 + (-1.209_f64).exp());
        assert_relative_eq!(c.cdf(2.0), expected, epsilon = 1e-15);
        assert!((c.cdf(2.0) - 0.7701).abs() < 5e-5);
        assert!((c.upper_pvalue(2.0) - 0.2299).abs() < 5e-5);
    }

    #[test]
    fn saturates_without_overflow() {
        let c = LogisticCoeffs::new(Statistic::M, 100, -23.041, 12.125).unwrap();
        assert_eq!(c.cdf(1e6), 1.0);
        assert_eq!(c.cdf(f64::INFINITY), 1.0);
        assert_eq!(c.cdf(-1e6), 0.0);
        assert_eq!(c.upper_pvalue(1e6), 0.0);
        assert!(c.upper_pvalue(-1e6) == 1.0);
    }

    #[test]
    fn shipped_table_has_twenty_entries() {
        let t = LogisticCoeffTable::default();
        assert_eq!(t.len(), 20);
        assert_eq!(t.sample_sizes(Statistic::K), vec![50, 100, 150, 200, 250]);
        let k = t.coeffs(Statistic::K, 250).unwrap();
        assert_eq!((k.gamma0, k.gamma1), (-2.046, 9.597));
    }

    #[test]
    fn interpolates_between_sizes() {
        let t = LogisticCoeffTable::default();
        let c = t.coeffs(Statistic::M, 125).unwrap();
        assert_relative_eq!(c.gamma0, (-23.041 + -28.289) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.gamma1, (12.125 + 14.961) / 2.0, epsilon = 1e-12);
        let c = t.coeffs(Statistic::V, 99).unwrap();
        assert_relative_eq!(c.gamma1, 1.253 - (1.253 - 0.879) / 50.0, epsilon = 1e-12);
        // extrapolation below the table
        let c = t.coeffs(Statistic::S, 25).unwrap();
        assert_relative_eq!(c.gamma1, 8.423 - (11.614 - 8.423) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_only_rejects_missing_size() {
        let t = LogisticCoeffTable::default().with_lookup(SizeLookup::ExactOnly);
        assert_eq!(t.coeffs(Statistic::M, 131), Err(Error::UnsupportedSampleSize(131)));
        assert!(t.coeffs(Statistic::M, 150).is_ok());
    }

    #[test]
    fn csv_round_trip_reproduces_file() {
        let t = LogisticCoeffTable::default();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = LogisticCoeffTable::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        // M,V,S,K ordering and three decimals
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("M,100,-23.041,12.125"));
        assert!(text.contains("V,50,-7.700,0.879"));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad = "statistic,T,gamma0,gamma1\nM,50,-1,1\nQ,50,-1,1\n";
        let err = LogisticCoeffTable::from_csv(bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let nonpositive = "statistic,T,gamma0,gamma1\nM,50,-1,0\n";
        assert!(LogisticCoeffTable::from_csv(nonpositive.as_bytes()).is_err());
    }

    #[test]
    fn approx_pvalues_at_midpoints() {
        let table = LogisticCoeffTable::default();
        let cs = table.quartet_coeffs(100).unwrap();
        let q = StatQuartet { m: cs[0].midpoint(), v: cs[1].midpoint(), s: cs[2].midpoint(), k: cs[3].midpoint() };
        for p in approx_pvalues(&q, &table, 100).unwrap() {
            assert_relative_eq!(p, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn approx_pvalues_decrease_in_statistic() {
        let table = LogisticCoeffTable::default();
        let lo = StatQuartet { m: 1.5, v: 7.0, s: 0.1, k: 0.2 };
        let hi = StatQuartet { m: 2.5, v: 10.0, s: 0.5, k: 1.0 };
        let (plo, phi) = (approx_pvalues(&lo, &table, 100).unwrap(), approx_pvalues(&hi, &table, 100).unwrap());
        for i in 0..4 {
            assert!(phi[i] < plo[i]);
            assert!(phi[i] > 0.0 && plo[i] < 1.0);
        }
    }
}
