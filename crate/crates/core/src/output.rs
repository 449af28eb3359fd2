//! Result files: CSV tables with `#` metadata lines and JSON reports.
//!
//! Numbers are written in their shortest round-trip form, so a fixed seed
//! gives byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::montecarlo::{ConvergenceReport, TableRow, TABLE_PROBES};
use crate::network::DegreeDistribution;

/// Package version plus `git describe` of the build tree.
pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "+",
    env!("BUBBLEFLOW_GIT_DESCRIBE")
);

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "t", "WF", "M", "Lambda", "theta", "X", "n", "beta", "regime", "path_id",
];

/// Provenance written at the top of every file.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub seed: u64,
    pub command: String,
    /// Extra `key=value` lines.
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(seed: u64, command: &str) -> Self {
        Self {
            seed,
            command: command.to_string(),
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    pub fn write_header<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# bubbleflow {VERSION}")?;
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "# command={}", self.command)?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

/// Shortest decimal that reads back to the same `f64`; exponent form
/// outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Long-format trajectory table, one block of rows per path.
pub fn write_trajectories<W: Write>(
    mut out: W,
    meta: &Metadata,
    paths: &[Trajectory],
) -> Result<()> {
    meta.write_header(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(TRAJECTORY_COLUMNS)?;
    for tr in paths {
        let id = tr.path_index.to_string();
        for i in 0..tr.len() {
            let nums = [
                tr.times[i],
                tr.wf[i],
                tr.m[i],
                tr.lambda[i],
                tr.theta[i],
                tr.x[i],
                tr.n[i],
                tr.beta[i],
            ];
            let mut rec: Vec<String> = nums.iter().map(|&v| fmt_f64(v)).collect();
            rec.push(tr.regime[i].as_str().to_string());
            rec.push(id.clone());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Column names of the comparison table.
pub fn table_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "network",
        "mean_degree",
        "n_paths",
        "n_born",
        "mean_max",
        "se_max",
        "argmax",
        "se_argmax",
    ]
    .map(String::from)
    .to_vec();
    for t in TABLE_PROBES {
        cols.push(format!("beta_at_{t}"));
        cols.push(format!("se_beta_at_{t}"));
    }
    cols
}

pub fn write_table<W: Write>(mut out: W, meta: &Metadata, rows: &[TableRow]) -> Result<()> {
    meta.write_header(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(table_columns())?;
    for row in rows {
        let s0 = &row.stats[0];
        let mut rec = vec![
            row.network.clone(),
            fmt_f64(row.mean_degree),
            s0.n_paths.to_string(),
            s0.n_born.to_string(),
            fmt_f64(s0.mean_max),
            fmt_f64(s0.se_max),
            fmt_f64(s0.mean_argmax),
            fmt_f64(s0.se_argmax),
        ];
        for s in &row.stats {
            rec.push(fmt_f64(s.beta_at));
            rec.push(fmt_f64(s.se_beta_at));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence<W: Write>(
    mut out: W,
    meta: &Metadata,
    report: &ConvergenceReport,
) -> Result<()> {
    meta.write_header(&mut out)?;
    let mut w = csv_writer(out);
    w.write_record(["dt", "median_error", "mean_error", "median_ratio"])?;
    for r in &report.rows {
        w.write_record([
            fmt_f64(r.dt),
            fmt_f64(r.median_error),
            fmt_f64(r.mean_error),
            r.median_ratio.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_degrees<W: Write>(
    mut out: W,
    meta: &Metadata,
    dist: &DegreeDistribution,
) -> Result<()> {
    meta.write_header(&mut out)?;
    dist.write_csv(out)
}

/// A report with the version and seed in front of its own fields.
#[derive(Debug, Serialize)]
pub struct Stamped<'a, T: Serialize> {
    pub version: &'static str,
    pub seed: u64,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn write_report<W: Write, T: Serialize>(mut out: W, meta: &Metadata, body: &T) -> Result<()> {
    let stamped = Stamped {
        version: VERSION,
        seed: meta.seed,
        command: &meta.command,
        body,
    };
    serde_json::to_writer_pretty(&mut out, &stamped)?;
    writeln!(out)?;
    Ok(())
}

/// Creates parent directories and writes `path` through `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, buf)?;
    Ok(())
}
