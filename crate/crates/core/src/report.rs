//! Trace, manifest, and summary-table files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::format_value;
use crate::error::{Error, Result};
use crate::runner::{SolverTrace, TraceRecord};

pub const TRACE_COLUMNS: [&str; 10] = [
    "iter",
    "time_s",
    "objective",
    "potential",
    "rel_error",
    "kkt_w",
    "kkt_h",
    "restart_reason",
    "lambda_w",
    "lambda_h",
];

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn trace_line(r: &TraceRecord) -> String {
    [
        r.iter.to_string(),
        format_value(r.time_s),
        format_value(r.objective),
        opt(r.potential),
        opt(r.rel_error),
        format_value(r.kkt_w),
        format_value(r.kkt_h),
        r.restart.as_str().to_string(),
        opt(r.info.lambda_w),
        opt(r.info.lambda_h),
    ]
    .join(",")
}

pub fn write_trace(trace: &SolverTrace, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
    for r in &trace.records {
        writeln!(out, "{}", trace_line(r))?;
    }
    Ok(())
}

pub fn write_trace_csv(trace: &SolverTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    write_trace(trace, &mut out)?;
    out.flush()?;
    Ok(())
}

/// A flat `key=value` file, one entry per line, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path.as_ref())?);
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path.as_ref())?);
        let mut m = Manifest::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected key=value".into(),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}

/// Final metrics of one run, or `None` when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: String,
    pub iterations: usize,
    pub rel_error: Option<f64>,
    pub objective: f64,
    pub kkt_w: f64,
    pub kkt_h: f64,
    pub time_s: f64,
}

impl RunSummary {
    pub fn from_trace(trace: &SolverTrace) -> Self {
        let last = trace.last();
        Self {
            algorithm: trace.algorithm.clone(),
            iterations: trace.iterations,
            rel_error: last.rel_error,
            objective: last.objective,
            kkt_w: last.kkt_w,
            kkt_h: last.kkt_h,
            time_s: trace.solve_seconds,
        }
    }
}

/// Per-algorithm means over instances.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub runs: usize,
    pub failed: usize,
    pub iter: f64,
    pub rel: f64,
    pub kkt_w: f64,
    pub kkt_h: f64,
    pub time: f64,
}

/// Averages successful runs per algorithm, keeping first-seen order.
/// Failed runs are counted but excluded from the means.
pub fn aggregate(runs: &[(String, Option<RunSummary>)]) -> Vec<AggregateRow> {
    let mut order: Vec<&str> = Vec::new();
    for (name, _) in runs {
        if !order.contains(&name.as_str()) {
            order.push(name);
        }
    }
    order
        .into_iter()
        .map(|name| {
            let mine: Vec<&Option<RunSummary>> = runs
                .iter()
                .filter(|(n, _)| n == name)
                .map(|(_, s)| s)
                .collect();
            let ok: Vec<&RunSummary> = mine.iter().filter_map(|s| s.as_ref()).collect();
            let mean = |f: &dyn Fn(&RunSummary) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|s| f(s)).sum::<f64>() / ok.len() as f64
                }
            };
            AggregateRow {
                algorithm: name.to_string(),
                runs: mine.len(),
                failed: mine.len() - ok.len(),
                iter: mean(&|s| s.iterations as f64),
                rel: mean(&|s| s.rel_error.unwrap_or(f64::NAN)),
                kkt_w: mean(&|s| s.kkt_w),
                kkt_h: mean(&|s| s.kkt_h),
                time: mean(&|s| s.time_s),
            }
        })
        .collect()
}

pub const AGGREGATE_COLUMNS: [&str; 8] =
    ["algorithm", "iter", "rel", "kkt_w", "kkt_h", "time", "runs", "failed"];

pub fn write_aggregate_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(out, "{}", AGGREGATE_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.algorithm,
            format_value(r.iter),
            format_value(r.rel),
            format_value(r.kkt_w),
            format_value(r.kkt_h),
            format_value(r.time),
            r.runs,
            r.failed
        )?;
    }
    out.flush()?;
    Ok(())
}
