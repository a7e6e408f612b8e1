use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::MetricKind;

use super::experiment::{run_trials, ScenarioSpec};
use super::output::RunHeader;
use super::stats::pearson;

#[derive(Debug, Clone)]
pub struct TableColumn {
    pub label: String,
    pub spec: ScenarioSpec,
}

/// Pearson correlation of each competing metric with `d_nsnr`, one column
/// per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub columns: Vec<String>,
    pub rows: Vec<(MetricKind, Vec<f64>)>,
}

impl CorrelationTable {
    pub fn get(&self, metric: MetricKind, column: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|(m, _)| *m == metric)
            .and_then(|(_, v)| v.get(column).copied())
    }

    pub fn row(&self, metric: MetricKind) -> Option<&[f64]> {
        self.rows
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self, header: &RunHeader) -> String {
        let mut out = header.render();
        out.push_str("metric");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (metric, values) in &self.rows {
            out.push_str(metric.label());
            for v in values {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text rounded to two decimals.
    pub fn to_text(&self) -> String {
        let label_width = self
            .rows
            .iter()
            .map(|(m, _)| m.label().len())
            .max()
            .unwrap_or(0)
            .max(6);
        let col_width = self
            .columns
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = format!("{:label_width$}", "");
        for c in &self.columns {
            let _ = write!(out, "  {c:>col_width$}");
        }
        out.push('\n');
        for (metric, values) in &self.rows {
            let _ = write!(out, "{:label_width$}", metric.label());
            for v in values {
                let _ = write!(out, "  {v:>col_width$.2}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn correlation_table(columns: &[TableColumn], exec: Execution) -> Result<CorrelationTable> {
    if columns.is_empty() {
        return Err(Error::ConfigInvalid(
            "correlation table needs at least one column".into(),
        ));
    }
    let mut rows: Vec<(MetricKind, Vec<f64>)> = MetricKind::COMPETITORS
        .iter()
        .map(|&m| (m, Vec::with_capacity(columns.len())))
        .collect();
    for column in columns {
        let run = run_trials(&column.spec, exec)?;
        let reference = run.column(|m| m.d_nsnr);
        for (metric, values) in rows.iter_mut() {
            let series = run.column(|m| m.get(*metric));
            values.push(pearson(&series, &reference)?);
        }
    }
    Ok(CorrelationTable {
        columns: columns.iter().map(|c| c.label.clone()).collect(),
        rows,
    })
}
