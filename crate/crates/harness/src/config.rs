//! Experiment configuration.
//!
//! Files are flat `key = value` text; `#` starts a comment and list values
//! are comma separated. Pairs such as transition probabilities are written
//! `a:b`. Every key is optional and falls back to the selected profile.
//!
//! | key | meaning |
//! |-----|---------|
//! | `profile` | `desk` or `paper` |
//! | `replications` | simulated samples per cell |
//! | `mc` | MC test size `N` |
//! | `bootstrap` | bootstrap samples `B` for supTS/expTS |
//! | `chp_draws` | nuisance draws for supTS/expTS |
//! | `alpha` | nominal level |
//! | `seed` | master seed |
//! | `methods` | any of `LMC_min, LMC_prod, MMC_min, MMC_prod, supTS, expTS` |
//! | `sample_sizes` | list of `T` |
//! | `phis` | list of AR coefficients |
//! | `separations` | list of `delta_mu:delta_sigma` |
//! | `transitions` | list of `p11:p22` |
//! | `include_null` | also run the linear null for each `(T, phi)` |
//! | `lags` | AR order used by the tests |
//! | `grid_points` | MMC points per dimension, `0` for the default |

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::study::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Desk,
    Paper,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

impl FromStr for Profile {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(HarnessError::Config(format!("unknown profile `{other}` (expected desk or paper)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub profile: Profile,
    pub replications: usize,
    pub mc: usize,
    pub bootstrap: usize,
    pub chp_draws: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub sample_sizes: Vec<usize>,
    pub phis: Vec<f64>,
    pub separations: Vec<(f64, f64)>,
    pub transitions: Vec<(f64, f64)>,
    pub include_null: bool,
    pub lags: usize,
    /// `0` selects the default for the AR order.
    pub grid_points: usize,
}

impl ExperimentConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let (replications, bootstrap) = match profile {
            Profile::Desk => (500, 200),
            Profile::Paper => (1000, 500),
        };
        Self {
            profile,
            replications,
            mc: 100,
            bootstrap,
            chp_draws: 200,
            alpha: 0.05,
            seed: 20_120_501,
            methods: Method::ALL.to_vec(),
            sample_sizes: vec![100, 200],
            phis: vec![0.1, 0.9],
            separations: vec![(2.0, 0.0), (0.0, 1.0), (2.0, 1.0)],
            transitions: vec![(0.9, 0.9), (0.9, 0.5), (0.9, 0.1)],
            include_null: true,
            lags: 1,
            grid_points: 0,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse `key = value` text on top of the profile it names (desk when
    /// absent).
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries: Vec<(u64, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::parse(source, i as u64 + 1, "expected `key = value`"))?;
            entries.push((i as u64 + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let profile = match entries.iter().find(|e| e.1 == "profile") {
            Some((line, _, v)) => v.parse().map_err(|e: HarnessError| HarnessError::parse(source, *line, e.to_string()))?,
            None => Profile::Desk,
        };
        let mut cfg = Self::for_profile(profile);
        for (line, key, value) in &entries {
            cfg.set(key, value).map_err(|e| HarnessError::parse(source, *line, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "profile" => self.profile = value.parse()?,
            "replications" => self.replications = parse_num(key, value)?,
            "mc" => self.mc = parse_num(key, value)?,
            "bootstrap" => self.bootstrap = parse_num(key, value)?,
            "chp_draws" => self.chp_draws = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "methods" => {
                self.methods = split_list(value)
                    .map(|m| Method::parse(m).ok_or_else(|| HarnessError::Config(format!("unknown method `{m}`"))))
                    .collect::<Result<_>>()?
            }
            "sample_sizes" => self.sample_sizes = split_list(value).map(|v| parse_num(key, v)).collect::<Result<_>>()?,
            "phis" => self.phis = split_list(value).map(|v| parse_num(key, v)).collect::<Result<_>>()?,
            "separations" => self.separations = split_list(value).map(|v| parse_pair(key, v)).collect::<Result<_>>()?,
            "transitions" => self.transitions = split_list(value).map(|v| parse_pair(key, v)).collect::<Result<_>>()?,
            "include_null" => self.include_null = parse_num(key, value)?,
            "lags" => self.lags = parse_num(key, value)?,
            "grid_points" => self.grid_points = parse_num(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.replications == 0 {
            return fail("replications must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail("alpha must lie in (0, 1)");
        }
        if self.mc < 2 {
            return fail("mc must be at least 2");
        }
        if self.bootstrap < 2 {
            return fail("bootstrap must be at least 2");
        }
        if self.chp_draws == 0 {
            return fail("chp_draws must be at least 1");
        }
        if self.methods.is_empty() {
            return fail("no methods selected");
        }
        if self.grid_points != 0 && self.grid_points.is_multiple_of(2) {
            return fail("grid_points must be odd (or 0 for the default)");
        }
        if self.sample_sizes.iter().any(|&t| t <= 2 * self.lags + 2) {
            return fail("every sample size must exceed 2 * lags + 2");
        }
        Ok(())
    }

    /// Canonical `key = value` listing; parsing it reproduces `self`.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let list = |v: Vec<String>| v.join(",");
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("profile", self.profile.to_string());
        m.insert("replications", self.replications.to_string());
        m.insert("mc", self.mc.to_string());
        m.insert("bootstrap", self.bootstrap.to_string());
        m.insert("chp_draws", self.chp_draws.to_string());
        m.insert("alpha", format!("{:?}", self.alpha));
        m.insert("seed", self.seed.to_string());
        m.insert("methods", list(self.methods.iter().map(|x| x.to_string()).collect()));
        m.insert("sample_sizes", list(self.sample_sizes.iter().map(|x| x.to_string()).collect()));
        m.insert("phis", list(self.phis.iter().map(|x| format!("{x:?}")).collect()));
        m.insert("separations", list(self.separations.iter().map(|(a, b)| format!("{a:?}:{b:?}")).collect()));
        m.insert("transitions", list(self.transitions.iter().map(|(a, b)| format!("{a:?}:{b:?}")).collect()));
        m.insert("include_null", self.include_null.to_string());
        m.insert("lags", self.lags.to_string());
        m.insert("grid_points", self.grid_points.to_string());
        m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_key_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical listing, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| HarnessError::Config(format!("`{v}` is not a valid value for {key}")))
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64)> {
    let (a, b) = v
        .split_once(':')
        .ok_or_else(|| HarnessError::Config(format!("`{v}` in {key} is not of the form a:b")))?;
    Ok((parse_num(key, a)?, parse_num(key, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        let d = ExperimentConfig::for_profile(Profile::Desk);
        assert_eq!((d.replications, d.mc, d.bootstrap, d.chp_draws), (500, 100, 200, 200));
        let p = ExperimentConfig::for_profile(Profile::Paper);
        assert_eq!((p.replications, p.mc, p.bootstrap), (1000, 100, 500));
    }

    #[test]
    fn parse_overrides_profile() {
        let text = "# study\nprofile = paper\nreplications = 20  # quick\nphis = 0.1\ntransitions = 0.9:0.5, 0.9:0.1\n";
        let c = ExperimentConfig::parse(text, "mem").unwrap();
        assert_eq!(c.profile, Profile::Paper);
        assert_eq!(c.replications, 20);
        assert_eq!(c.bootstrap, 500);
        assert_eq!(c.phis, vec![0.1]);
        assert_eq!(c.transitions, vec![(0.9, 0.5), (0.9, 0.1)]);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::for_profile(Profile::Desk);
        c.alpha = 0.1;
        c.methods = vec![Method::Linearity(msar_mc::linearity::TestMethod::MmcProd), Method::ExpTs];
        let back = ExperimentConfig::parse(&c.to_text(), "echo").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn invalid_values_reported_with_line() {
        let err = ExperimentConfig::parse("alpha = 0.05\nreplications = many\n", "cfg").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(ExperimentConfig::parse("alpha = 1.5\n", "cfg").is_err());
        assert!(ExperimentConfig::parse("colour = red\n", "cfg").is_err());
        assert!(ExperimentConfig::parse("grid_points = 4\n", "cfg").is_err());
    }
}
