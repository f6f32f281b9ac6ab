//! CSV result files.
//!
//! Every table starts with comment lines: a first line recording the tool
//! version, master seed and configuration hash, then the configuration
//! echo as `# key = value` lines.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance of one run: master seed plus the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub seed: u64,
    pub settings: Vec<(String, String)>,
}

impl RunInfo {
    pub fn new(seed: u64, settings: Vec<(String, String)>) -> Self {
        Self { seed, settings }
    }

    pub fn settings_text(&self) -> String {
        self.settings.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.settings_text().as_bytes()))
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("# msar-mc v{VERSION} seed={} config_hash={}", self.seed, self.hash())];
        lines.extend(self.settings.iter().map(|(k, v)| format!("# {k} = {v}")));
        lines
    }
}

/// Settings echoed in the comment block of a table written by
/// [`write_table`].
pub fn read_echo(text: &str) -> Vec<(String, String)> {
    text.lines()
        .skip(1)
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

/// Write comment header, column header and rows.
pub fn write_table<W: Write>(out: W, info: &RunInfo, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = out;
    let io = |e| HarnessError::io("<output>", e);
    for line in info.header_lines() {
        writeln!(out, "{line}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| HarnessError::Config(format!("writing CSV: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_table_file(path: &Path, info: &RunInfo, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_table(std::io::BufWriter::new(file), info, header, rows)
}

/// Parse a table written by [`write_table`] into its data rows.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        HarnessError::parse("<table>", line, e.to_string())
    };
    let header = rdr.headers().map_err(err)?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(err))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_echo_round_trip() {
        let info = RunInfo::new(7, vec![("alpha".into(), "0.05".into()), ("methods".into(), "LMC_min,MMC_min".into())]);
        let mut buf = Vec::new();
        let rows = vec![vec!["a".to_string(), "x, y".to_string()]];
        write_table(&mut buf, &info, &["k", "v"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("# msar-mc v{VERSION} seed=7 config_hash=")));
        assert_eq!(read_echo(&text), info.settings);
        let (header, back) = read_table(&text).unwrap();
        assert_eq!(header, vec!["k", "v"]);
        assert_eq!(back, rows);
    }
}
