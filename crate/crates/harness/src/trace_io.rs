//! Reading and writing solver traces.
//!
//! Each solver gets two artifacts: a CSV with the per-iteration scalars
//! (schema `iter,resnorm,rank,min_norm_flag,termination`) and a JSON file
//! with the full vectors, which is what `check` replays diagnostics
//! against. All floating-point output uses shortest round-trip
//! formatting, so re-reading a file reproduces the in-memory values
//! bit for bit. Files are written to a temporary sibling and renamed into
//! place, so readers never observe a half-written artifact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ngmres::linalg::Vector;
use ngmres::solvers::{IterationRecord, IterationTrace, TerminationReason};

use crate::error::{Error, Result};

/// Writes `bytes` atomically: to `<name>.tmp` in the same directory,
/// then renamed over the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::artifact(path, "destination has no file name"))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One CSV row of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub iter: usize,
    pub resnorm: f64,
    pub rank: Option<usize>,
    pub min_norm_flag: bool,
    /// Termination reason; present only on the final row.
    pub termination: Option<String>,
}

pub const CSV_HEADER: &str = "iter,resnorm,rank,min_norm_flag,termination";

/// Renders a trace in the fixed CSV schema.
pub fn trace_to_csv(trace: &IterationTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let last = trace.records.len() - 1;
    for (i, rec) in trace.records.iter().enumerate() {
        let rank = rec.lstsq_rank.map(|r| r.to_string()).unwrap_or_default();
        let term = if i == last { trace.termination.as_str() } else { "" };
        out.push_str(&format!(
            "{i},{},{rank},{},{term}\n",
            rec.res_norm,
            u8::from(rec.min_norm_applied)
        ));
    }
    out
}

/// Parses the fixed CSV schema back into rows.
pub fn csv_to_rows(path: &Path, text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::artifact(
                path,
                format!("expected header '{CSV_HEADER}', found {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::artifact(
                path,
                format!("row {}: expected 5 fields, found {}", lineno + 2, fields.len()),
            ));
        }
        let parse_err =
            |what: &str| Error::artifact(path, format!("row {}: bad {what}", lineno + 2));
        rows.push(CsvRow {
            iter: fields[0].parse().map_err(|_| parse_err("iter"))?,
            resnorm: fields[1].parse().map_err(|_| parse_err("resnorm"))?,
            rank: match fields[2] {
                "" => None,
                r => Some(r.parse().map_err(|_| parse_err("rank"))?),
            },
            min_norm_flag: match fields[3] {
                "0" => false,
                "1" => true,
                _ => return Err(parse_err("min_norm_flag")),
            },
            termination: match fields[4] {
                "" => None,
                t => Some(t.to_string()),
            },
        });
    }
    Ok(rows)
}

/// JSON image of one iteration record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoredRecord {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub res_norm: f64,
    pub coeffs: Option<Vec<f64>>,
    pub lstsq_rank: Option<usize>,
    pub min_norm_applied: bool,
}

/// JSON image of a full trace, including the vectors the CSV drops.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoredTrace {
    pub solver: String,
    pub termination: String,
    pub records: Vec<StoredRecord>,
}

fn termination_from_str(s: &str, path: &Path) -> Result<TerminationReason> {
    match s {
        "tolerance" => Ok(TerminationReason::Tolerance),
        "max_iter" => Ok(TerminationReason::MaxIter),
        "stagnation" => Ok(TerminationReason::Stagnation),
        "breakdown" => Ok(TerminationReason::Breakdown),
        other => Err(Error::artifact(path, format!("unknown termination reason '{other}'"))),
    }
}

impl StoredTrace {
    pub fn from_trace(trace: &IterationTrace) -> Self {
        StoredTrace {
            solver: trace.solver.clone(),
            termination: trace.termination.as_str().to_string(),
            records: trace
                .records
                .iter()
                .map(|rec| StoredRecord {
                    x: rec.x.as_slice().to_vec(),
                    r: rec.r.as_slice().to_vec(),
                    res_norm: rec.res_norm,
                    coeffs: rec.coeffs.clone(),
                    lstsq_rank: rec.lstsq_rank,
                    min_norm_applied: rec.min_norm_applied,
                })
                .collect(),
        }
    }

    pub fn into_trace(self, path: &Path) -> Result<IterationTrace> {
        if self.records.is_empty() {
            return Err(Error::artifact(path, "trace has no records"));
        }
        let termination = termination_from_str(&self.termination, path)?;
        Ok(IterationTrace {
            solver: self.solver,
            termination,
            records: self
                .records
                .into_iter()
                .map(|rec| IterationRecord {
                    x: Vector::from(rec.x),
                    r: Vector::from(rec.r),
                    res_norm: rec.res_norm,
                    coeffs: rec.coeffs,
                    lstsq_rank: rec.lstsq_rank,
                    min_norm_applied: rec.min_norm_applied,
                })
                .collect(),
        })
    }
}

/// Writes both artifacts for one trace; returns the two file names.
pub fn write_trace(dir: &Path, name: &str, trace: &IterationTrace) -> Result<(String, String)> {
    let csv_name = format!("trace-{name}.csv");
    let json_name = format!("trace-{name}.json");
    write_atomic(&dir.join(&csv_name), trace_to_csv(trace).as_bytes())?;
    let stored = StoredTrace::from_trace(trace);
    let json = serde_json::to_string_pretty(&stored)
        .map_err(|e| Error::artifact(dir.join(&json_name), e.to_string()))?;
    write_atomic(&dir.join(&json_name), json.as_bytes())?;
    Ok((csv_name, json_name))
}

/// Reads a JSON trace artifact back.
pub fn read_trace(path: &Path) -> Result<IterationTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stored: StoredTrace =
        serde_json::from_str(&text).map_err(|e| Error::artifact(path, e.to_string()))?;
    stored.into_trace(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ngmres::problems::build_convection_diffusion;
    use ngmres::solvers::{ngmres, SolveConfig, Window};

    fn sample_trace() -> IterationTrace {
        let p = build_convection_diffusion(5, 2.0, 1.0).unwrap();
        let x0 = Vector::zeros(p.dim());
        ngmres(&p, &x0, Window::Size(2), &SolveConfig::default()).unwrap()
    }

    #[test]
    fn csv_round_trips_resnorms_exactly() {
        let t = sample_trace();
        let csv = trace_to_csv(&t);
        let rows = csv_to_rows(Path::new("mem"), &csv).unwrap();
        assert_eq!(rows.len(), t.records.len());
        for (row, rec) in rows.iter().zip(&t.records) {
            assert_eq!(row.resnorm.to_bits(), rec.res_norm.to_bits());
        }
        assert_eq!(rows.last().unwrap().termination.as_deref(), Some("tolerance"));
        assert!(rows[..rows.len() - 1].iter().all(|r| r.termination.is_none()));
    }

    #[test]
    fn csv_rejects_schema_drift() {
        assert!(csv_to_rows(Path::new("mem"), "iter,resnorm\n0,1.0\n").is_err());
        let bad_row = format!("{CSV_HEADER}\n0,1.0,,2,\n");
        assert!(csv_to_rows(Path::new("mem"), &bad_row).is_err());
    }

    #[test]
    fn json_round_trips_the_full_trace() {
        let t = sample_trace();
        let json = serde_json::to_string(&StoredTrace::from_trace(&t)).unwrap();
        let back: StoredTrace = serde_json::from_str(&json).unwrap();
        let rebuilt = back.into_trace(Path::new("mem")).unwrap();
        assert_eq!(rebuilt.solver, t.solver);
        assert_eq!(rebuilt.termination, t.termination);
        assert_eq!(rebuilt.records.len(), t.records.len());
        for (a, b) in rebuilt.records.iter().zip(&t.records) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.r, b.r);
            assert_eq!(a.res_norm.to_bits(), b.res_norm.to_bits());
            assert_eq!(a.coeffs, b.coeffs);
        }
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("artifact.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, vec!["artifact.txt".to_string()]);
    }
}
