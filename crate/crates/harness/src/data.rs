//! Series ingestion.
//!
//! Input files are comma-separated with a header row. The first column is a
//! period label (for example `1984Q4`), the second a value. Labels must be
//! strictly increasing in string order, which holds for zero-padded dates
//! and `YYYYQn` quarters.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    /// Values are used as given (for example pre-computed growth rates).
    #[default]
    None,
    /// Levels `x_t` become `100 (ln x_t - ln x_{t-1})`; the first period is
    /// dropped.
    LogDiff100,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::None => "none",
            Transform::LogDiff100 => "logdiff100",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "").as_str() {
            "none" => Ok(Transform::None),
            "logdiff100" => Ok(Transform::LogDiff100),
            other => Err(HarnessError::Config(format!("unknown transform `{other}` (expected none or logdiff100)"))),
        }
    }
}

/// A labelled univariate series after transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub transform: Transform,
}

impl SeriesDataset {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_label(&self) -> Option<&str> {
        self.labels.first().map(String::as_str)
    }

    pub fn last_label(&self) -> Option<&str> {
        self.labels.last().map(String::as_str)
    }
}

pub fn ingest_series(path: impl AsRef<Path>, transform: Transform) -> Result<SeriesDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_series(file, &path.display().to_string(), transform)
}

/// Parse a series from any reader; `source` names it in error messages.
pub fn read_series<R: Read>(reader: R, source: &str, transform: Transform) -> Result<SeriesDataset> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let mut labels: Vec<String> = Vec::new();
    let mut levels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            HarnessError::parse(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 {
            return Err(HarnessError::parse(source, line, "expected `label,value`"));
        }
        let label = record[0].to_string();
        let value: f64 = record[1]
            .parse()
            .map_err(|_| HarnessError::parse(source, line, format!("`{}` is not a number", &record[1])))?;
        if !value.is_finite() {
            return Err(HarnessError::parse(source, line, "missing or non-finite value"));
        }
        if transform == Transform::LogDiff100 && value <= 0.0 {
            return Err(HarnessError::parse(source, line, format!("level {value} is not positive")));
        }
        if let Some(prev) = labels.last() {
            if *prev >= label {
                return Err(HarnessError::parse(source, line, format!("label `{label}` does not follow `{prev}`")));
            }
        }
        labels.push(label);
        levels.push(value);
    }
    match transform {
        Transform::None => {
            if levels.is_empty() {
                return Err(HarnessError::parse(source, 1, "no observations"));
            }
            Ok(SeriesDataset { labels, values: levels, transform })
        }
        Transform::LogDiff100 => {
            if levels.len() < 2 {
                return Err(HarnessError::parse(source, 1, "log differences need at least two levels"));
            }
            let values = levels.windows(2).map(|w| 100.0 * (w[1].ln() - w[0].ln())).collect();
            labels.remove(0);
            Ok(SeriesDataset { labels, values, transform })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_difference_of_two_levels() {
        let d = read_series("date,level\n2000Q1,100\n2000Q2,101\n".as_bytes(), "mem", Transform::LogDiff100).unwrap();
        assert_eq!(d.labels, vec!["2000Q2"]);
        assert!((d.values[0] - 0.995_033_085_316_808_3).abs() < 1e-12);
    }

    #[test]
    fn passthrough() {
        let d = read_series("date,g\n1,0.5\n2,-1.25\n".as_bytes(), "mem", Transform::None).unwrap();
        assert_eq!(d.values, vec![0.5, -1.25]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = read_series("date,g\n1,0.5\n2,abc\n".as_bytes(), "mem", Transform::None).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_series("date,g\n2,0.5\n1,0.7\n".as_bytes(), "mem", Transform::None).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_series("date,x\n1,5\n2,0\n".as_bytes(), "mem", Transform::LogDiff100).unwrap_err();
        assert!(err.to_string().contains("not positive"), "{err}");
        assert!(read_series("date,x\n1,5\n".as_bytes(), "mem", Transform::LogDiff100).is_err());
    }

    #[test]
    fn transform_names() {
        assert_eq!("logdiff100".parse::<Transform>().unwrap(), Transform::LogDiff100);
        assert_eq!("LOG_DIFF_100".parse::<Transform>().unwrap(), Transform::LogDiff100);
        assert!("levels".parse::<Transform>().is_err());
    }
}
