use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::MetricValues;
use crate::randgen::GENERATOR_NAME;

use super::experiment::TrialRecord;

pub const SCATTER_COLUMNS: [&str; 7] = [
    "trial_index",
    "nsnr_min",
    "d_nsnr",
    "d_kl",
    "d_symkl",
    "d_frobenius",
    "d_spectral",
];

/// `# key=value` comment block written at the top of every CSV file.
///
/// Holds only settings that determine the numbers; execution settings such
/// as the worker count are left out so output bytes do not depend on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunHeader {
    entries: Vec<(String, String)>,
}

impl RunHeader {
    pub fn new(command: &str, master_seed: u64) -> Self {
        let mut header = Self {
            entries: Vec::new(),
        };
        header.push("tool", format!("nsnr {}", env!("CARGO_PKG_VERSION")));
        header.push("generator", GENERATOR_NAME);
        header.push("command", command);
        header.push("master_seed", master_seed);
        header
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}

/// One row per trial, floats printed in shortest round-trip form.
pub fn scatter_csv(records: &[TrialRecord], header: &RunHeader) -> Result<String> {
    if records.is_empty() {
        return Err(Error::DegenerateInput("no records to export".into()));
    }
    let mut out = header.render();
    out.push_str(&SCATTER_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.trial_index, m.nsnr_min, m.d_nsnr, m.d_kl, m.d_symkl, m.d_frobenius, m.d_spectral
        );
    }
    Ok(out)
}

pub fn parse_scatter_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let bad = |line: &str| Error::DegenerateInput(format!("malformed scatter row: {line}"));
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h == SCATTER_COLUMNS.join(",") => {}
        other => return Err(bad(other.unwrap_or(""))),
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != SCATTER_COLUMNS.len() {
                return Err(bad(line));
            }
            let f = |i: usize| fields[i].parse::<f64>().map_err(|_| bad(line));
            Ok(TrialRecord {
                trial_index: fields[0].parse().map_err(|_| bad(line))?,
                metrics: MetricValues {
                    nsnr_min: f(1)?,
                    d_nsnr: f(2)?,
                    d_kl: f(3)?,
                    d_symkl: f(4)?,
                    d_frobenius: f(5)?,
                    d_spectral: f(6)?,
                },
            })
        })
        .collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: u64, x: f64) -> TrialRecord {
        TrialRecord {
            trial_index: i,
            metrics: MetricValues {
                d_nsnr: x,
                d_kl: x * 3.0,
                d_symkl: 1.0 / 3.0,
                d_frobenius: std::f64::consts::PI,
                d_spectral: 1e-300,
                nsnr_min: 0.1 + 0.2,
            },
        }
    }

    #[test]
    fn two_records_make_three_data_lines() {
        let header = RunHeader::new("scatter", 1);
        let csv = scatter_csv(&[record(0, 0.5), record(1, 0.25)], &header).unwrap();
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        assert!(csv.contains("# master_seed=1"));
        assert!(csv.contains(GENERATOR_NAME));
    }

    #[test]
    fn round_trip_is_exact() {
        let records = vec![record(0, 0.12345678901234568), record(7, 1e-17)];
        let csv = scatter_csv(&records, &RunHeader::new("scatter", 0)).unwrap();
        assert_eq!(parse_scatter_csv(&csv).unwrap(), records);
    }

    #[test]
    fn rejects_empty_and_malformed() {
        assert!(scatter_csv(&[], &RunHeader::new("scatter", 0)).is_err());
        assert!(parse_scatter_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_file(Path::new("/nonexistent-dir/x.csv"), "x").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
