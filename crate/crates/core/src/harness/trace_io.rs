//! Trace CSV writing and reading.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::{IterateRecord, RunTrace};

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "alpha",
    "beta",
    "t_k",
    "g_k",
    "grad_map_norm",
    "psi",
    "A_k",
    "grad_calls",
    "lmo_calls",
    "so_calls",
];

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub t_k: Option<u32>,
    pub g_k: Option<f64>,
    pub grad_map_norm: Option<f64>,
    pub psi: f64,
    pub a_k: f64,
    pub grad_calls: u64,
    pub lmo_calls: u64,
    pub so_calls: u64,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Row 0 and every row with a recorded gap. `f64` values use the shortest
/// representation that parses back to the same bits.
pub fn write_trace_to<W: Write>(trace: &RunTrace, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER)?;
    for r in trace.records.iter().filter(|r| r.k == 0 || r.g_k.is_some()) {
        out.write_record(row_fields(r))?;
    }
    out.flush().map_err(|e| Error::io("trace", e))?;
    Ok(())
}

fn row_fields(r: &IterateRecord) -> [String; 11] {
    [
        r.k.to_string(),
        opt(r.alpha),
        opt(r.beta),
        opt(r.t_k),
        opt(r.g_k),
        opt(r.grad_map_norm),
        r.psi.to_string(),
        r.a_k.to_string(),
        r.grad_calls.to_string(),
        r.lmo_calls.to_string(),
        r.so_calls.to_string(),
    ]
}

pub fn write_trace(trace: &RunTrace, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_to(trace, std::io::BufWriter::new(f))
}

fn parse<T: std::str::FromStr>(s: &str, col: &str, line: u64) -> Result<T> {
    s.parse().map_err(|_| {
        Error::InvalidInput(format!("trace line {line}: cannot parse {col} = {s:?}"))
    })
}

fn parse_opt<T: std::str::FromStr>(s: &str, col: &str, line: u64) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(s, col, line).map(Some)
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
        return Err(Error::InvalidInput(format!(
            "{}: not a trace file (unexpected header)",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        let f = |j: usize| rec.get(j).unwrap_or("");
        rows.push(TraceRow {
            k: parse(f(0), "k", line)?,
            alpha: parse_opt(f(1), "alpha", line)?,
            beta: parse_opt(f(2), "beta", line)?,
            t_k: parse_opt(f(3), "t_k", line)?,
            g_k: parse_opt(f(4), "g_k", line)?,
            grad_map_norm: parse_opt(f(5), "grad_map_norm", line)?,
            psi: parse(f(6), "psi", line)?,
            a_k: parse(f(7), "A_k", line)?,
            grad_calls: parse(f(8), "grad_calls", line)?,
            lmo_calls: parse(f(9), "lmo_calls", line)?,
            so_calls: parse(f(10), "so_calls", line)?,
        });
    }
    Ok(rows)
}

/// `(k, g_k)` for every row with a gap.
pub fn gap_series(rows: &[TraceRow]) -> Vec<(u64, f64)> {
    rows.iter().filter_map(|r| r.g_k.map(|g| (r.k, g))).collect()
}
