//! Size and power study over switching AR(1) designs.
//!
//! The switching design holds the first regime at mean 0 and standard
//! deviation 1; the second regime has mean `delta_mu` and standard
//! deviation `1 + delta_sigma`. Null cells are linear AR(1) models with
//! unit innovation variance.

use std::fmt;
use std::time::Instant;

use msar_mc::ar::ols_ar_fit;
use msar_mc::chp::chp_bootstrap_test;
use msar_mc::coeffs::LogisticCoeffTable;
use msar_mc::grid::{build_grid, default_points_per_dim};
use msar_mc::linearity::{linearity_battery, TestMethod};
use msar_mc::msar::{simulate_msar, MsarSpec, RegimeParams, TransitionMatrix};
use msar_mc::rng::{derive_seed, rng_from_seed};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// A test evaluated in the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Linearity(TestMethod),
    SupTs,
    ExpTs,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Linearity(TestMethod::LmcMin),
        Method::Linearity(TestMethod::LmcProd),
        Method::Linearity(TestMethod::MmcMin),
        Method::Linearity(TestMethod::MmcProd),
        Method::SupTs,
        Method::ExpTs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Linearity(m) => m.as_str(),
            Method::SupTs => "supTS",
            Method::ExpTs => "expTS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dgp {
    Null,
    Switching { delta_mu: f64, delta_sigma: f64, p11: f64, p22: f64 },
}

impl Dgp {
    pub fn spec(&self, phi: f64) -> Result<MsarSpec> {
        Ok(match *self {
            Dgp::Null => MsarSpec::linear(0.0, 1.0, vec![phi])?,
            Dgp::Switching { delta_mu, delta_sigma, p11, p22 } => MsarSpec::new(
                RegimeParams::from_separations(0.0, 1.0, delta_mu, delta_sigma)?,
                TransitionMatrix::new(p11, p22)?,
                vec![phi],
            )?,
        })
    }
}

/// One data-generating design at one sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyCell {
    pub index: usize,
    pub t: usize,
    pub phi: f64,
    pub dgp: Dgp,
}

/// Cells in study order: sample size, then AR coefficient, then the null
/// followed by every separation and transition pair.
pub fn study_cells(cfg: &ExperimentConfig) -> Vec<StudyCell> {
    let mut cells = Vec::new();
    for &t in &cfg.sample_sizes {
        for &phi in &cfg.phis {
            let mut dgps = Vec::new();
            if cfg.include_null {
                dgps.push(Dgp::Null);
            }
            for &(delta_mu, delta_sigma) in &cfg.separations {
                for &(p11, p22) in &cfg.transitions {
                    dgps.push(Dgp::Switching { delta_mu, delta_sigma, p11, p22 });
                }
            }
            for dgp in dgps {
                cells.push(StudyCell { index: cells.len(), t, phi, dgp });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub t: usize,
    pub phi: f64,
    pub dgp: Dgp,
    pub method: Method,
    pub replications: usize,
    /// `None` when the cell failed.
    pub rejections: Option<usize>,
    pub wall_time_s: f64,
    pub status: CellStatus,
}

impl StudyRow {
    pub const CSV_HEADER: [&'static str; 14] = [
        "dgp",
        "T",
        "phi",
        "delta_mu",
        "delta_sigma",
        "p11",
        "p22",
        "method",
        "replications",
        "rejections",
        "rejection_rate",
        "mc_se",
        "wall_time_s",
        "status",
    ];

    pub fn rejection_rate(&self) -> Option<f64> {
        self.rejections.map(|r| r as f64 / self.replications as f64)
    }

    /// Binomial Monte Carlo standard error `sqrt(p (1 - p) / reps)`; zero
    /// when every or no replication rejects.
    pub fn mc_se(&self) -> Option<f64> {
        self.rejection_rate().map(|p| (p * (1.0 - p) / self.replications as f64).sqrt())
    }

    pub fn to_record(&self) -> Vec<String> {
        let (label, dm, ds, p11, p22) = match self.dgp {
            Dgp::Null => ("null", "0".into(), "0".into(), String::new(), String::new()),
            Dgp::Switching { delta_mu, delta_sigma, p11, p22 } => {
                ("msar", delta_mu.to_string(), delta_sigma.to_string(), p11.to_string(), p22.to_string())
            }
        };
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
        vec![
            label.to_string(),
            self.t.to_string(),
            self.phi.to_string(),
            dm,
            ds,
            p11,
            p22,
            self.method.to_string(),
            self.replications.to_string(),
            self.rejections.map_or(String::new(), |r| r.to_string()),
            opt(self.rejection_rate()),
            opt(self.mc_se()),
            format!("{:.3}", self.wall_time_s),
            match &self.status {
                CellStatus::Ok => "ok".to_string(),
                CellStatus::Failed(m) => format!("failed: {m}"),
            },
        ]
    }

    /// Inverse of [`StudyRow::to_record`] up to the printed precision.
    pub fn from_record(rec: &[String]) -> Result<Self> {
        let bad = |what: &str| HarnessError::Config(format!("study row: invalid {what}"));
        if rec.len() != Self::CSV_HEADER.len() {
            return Err(bad("column count"));
        }
        let num = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
        let dgp = match rec[0].as_str() {
            "null" => Dgp::Null,
            "msar" => Dgp::Switching {
                delta_mu: num(3, "delta_mu")?,
                delta_sigma: num(4, "delta_sigma")?,
                p11: num(5, "p11")?,
                p22: num(6, "p22")?,
            },
            _ => return Err(bad("dgp")),
        };
        let status = match rec[13].as_str() {
            "ok" => CellStatus::Ok,
            s => CellStatus::Failed(s.strip_prefix("failed: ").ok_or_else(|| bad("status"))?.to_string()),
        };
        Ok(Self {
            t: rec[1].parse().map_err(|_| bad("T"))?,
            phi: num(2, "phi")?,
            dgp,
            method: Method::parse(&rec[7]).ok_or_else(|| bad("method"))?,
            replications: rec[8].parse().map_err(|_| bad("replications"))?,
            rejections: if rec[9].is_empty() { None } else { Some(rec[9].parse().map_err(|_| bad("rejections"))?) },
            wall_time_s: num(12, "wall_time_s")?,
            status,
        })
    }

    /// Row with the wall time cleared, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

/// Rejection decisions of every configured method on one simulated sample.
fn replicate_decisions(
    cell: &StudyCell,
    spec: &MsarSpec,
    cfg: &ExperimentConfig,
    table: &LogisticCoeffTable,
    rep_seed: u64,
) -> Result<Vec<bool>> {
    let y = simulate_msar(spec, cell.t, &mut rng_from_seed(derive_seed(rep_seed, &[0])))?;
    let lin: Vec<TestMethod> = cfg
        .methods
        .iter()
        .filter_map(|m| match m {
            Method::Linearity(t) => Some(*t),
            _ => None,
        })
        .collect();
    let lin_reports = if lin.is_empty() {
        Vec::new()
    } else {
        let grid = if lin.iter().any(|m| m.is_maximized()) {
            let fit = ols_ar_fit(&y, cfg.lags)?;
            let ppd = if cfg.grid_points == 0 { default_points_per_dim(cfg.lags) } else { cfg.grid_points };
            Some(build_grid(&fit, ppd, true)?)
        } else {
            None
        };
        linearity_battery(&y, cfg.lags, cfg.mc, &lin, table, grid.as_ref(), derive_seed(rep_seed, &[1]))?
    };
    let chp = if cfg.methods.iter().any(|m| matches!(m, Method::SupTs | Method::ExpTs)) {
        Some(chp_bootstrap_test(&y, cfg.bootstrap, cfg.chp_draws, derive_seed(rep_seed, &[2]))?)
    } else {
        None
    };
    let mut lin_iter = lin_reports.iter();
    Ok(cfg
        .methods
        .iter()
        .map(|m| match m {
            Method::Linearity(_) => lin_iter.next().expect("one report per method").p_value <= cfg.alpha,
            Method::SupTs => chp.as_ref().expect("chp computed").reject_sup(cfg.alpha),
            Method::ExpTs => chp.as_ref().expect("chp computed").reject_exp(cfg.alpha),
        })
        .collect())
}

/// Run every replication of one cell. Errors mark the cell failed.
pub fn run_cell(cell: &StudyCell, cfg: &ExperimentConfig, table: &LogisticCoeffTable) -> Vec<StudyRow> {
    let start = Instant::now();
    let cell_seed = derive_seed(cfg.seed, &[cell.index as u64]);
    let outcome: Result<Vec<usize>> = cell.dgp.spec(cell.phi).and_then(|spec| {
        let decisions: Vec<Vec<bool>> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|rep| replicate_decisions(cell, &spec, cfg, table, derive_seed(cell_seed, &[rep])))
            .collect::<Result<_>>()?;
        Ok((0..cfg.methods.len()).map(|k| decisions.iter().filter(|d| d[k]).count()).collect())
    });
    let wall_time_s = start.elapsed().as_secs_f64();
    if let Err(e) = &outcome {
        log::warn!("cell {} failed: {e}", cell.index);
    }
    cfg.methods
        .iter()
        .enumerate()
        .map(|(k, &method)| StudyRow {
            t: cell.t,
            phi: cell.phi,
            dgp: cell.dgp,
            method,
            replications: cfg.replications,
            rejections: outcome.as_ref().ok().map(|c| c[k]),
            wall_time_s,
            status: match &outcome {
                Ok(_) => CellStatus::Ok,
                Err(e) => CellStatus::Failed(e.to_string()),
            },
        })
        .collect()
}

/// Run all cells in order.
pub fn run_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let table = LogisticCoeffTable::default();
    let cells = study_cells(cfg);
    let mut rows = Vec::with_capacity(cells.len() * cfg.methods.len());
    for cell in &cells {
        log::info!("cell {}/{}: T={} phi={} {:?}", cell.index + 1, cells.len(), cell.t, cell.phi, cell.dgp);
        rows.extend(run_cell(cell, cfg, &table));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Profile;

    fn tiny() -> ExperimentConfig {
        let mut c = ExperimentConfig::for_profile(Profile::Desk);
        c.replications = 4;
        c.mc = 20;
        c.bootstrap = 9;
        c.chp_draws = 10;
        c.sample_sizes = vec![60];
        c.phis = vec![0.1];
        c.separations = vec![(2.0, 0.0)];
        c.transitions = vec![(0.9, 0.5)];
        c.grid_points = 5;
        c
    }

    #[test]
    fn cell_enumeration() {
        let cfg = ExperimentConfig::for_profile(Profile::Desk);
        let cells = study_cells(&cfg);
        assert_eq!(cells.len(), 2 * 2 * (1 + 9));
        assert_eq!(cells[0].dgp, Dgp::Null);
        assert!(cells.iter().enumerate().all(|(i, c)| c.index == i));
    }

    #[test]
    fn rows_round_trip() {
        let rows = run_study(&tiny()).unwrap();
        assert_eq!(rows.len(), 2 * 6);
        for row in &rows {
            assert_eq!(row.status, CellStatus::Ok);
            let back = StudyRow::from_record(&row.to_record()).unwrap();
            assert_eq!(back.to_record(), row.to_record());
        }
    }

    #[test]
    fn failed_cell_is_isolated() {
        let mut cfg = tiny();
        cfg.transitions = vec![(1.0, 1.0), (0.9, 0.5)];
        cfg.methods = vec![Method::Linearity(TestMethod::LmcMin)];
        let rows = run_study(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(matches!(rows[1].status, CellStatus::Failed(_)));
        assert_eq!(rows[1].rejections, None);
        assert_eq!(rows[0].status, CellStatus::Ok);
        assert_eq!(rows[2].status, CellStatus::Ok);
        let back = StudyRow::from_record(&rows[1].to_record()).unwrap();
        assert_eq!(back.status, rows[1].status);
    }

    #[test]
    fn single_replication_convention() {
        let mut cfg = tiny();
        cfg.replications = 1;
        for row in run_study(&cfg).unwrap() {
            let p = row.rejection_rate().unwrap();
            assert!(p == 0.0 || p == 1.0);
            assert_eq!(row.mc_se(), Some(0.0));
        }
    }
}
