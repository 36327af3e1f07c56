//! CSV tables and JSON documents written by the subcommands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::certify::Certificate;
use crate::iterate::{empirical_contraction, IterationReport, Method};

pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table.csv";

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e6)`.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

fn write_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is built from UTF-8 strings"))
}

/// One row per iterate: `n, step_norm, residual_norm, ratio`. Row 0 carries the
/// starting residual only; the ratio column starts at `n = 2`.
pub fn convergence_table(report: &IterationReport) -> Result<String, CliError> {
    let rows = (0..report.residual_norms.len())
        .map(|n| {
            vec![
                n.to_string(),
                cell(n.checked_sub(1).map(|k| report.step_norms[k])),
                number(report.residual_norms[n]),
                cell(n.checked_sub(2).and_then(|k| report.ratios.get(k).copied())),
            ]
        })
        .collect();
    write_csv(&["n", "step_norm", "residual_norm", "ratio"], rows)
}

/// Outcome of one method in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub method: Method,
    pub wall_time_ms: f64,
    /// `None` when the method does not apply to the problem.
    pub report: Option<IterationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn compare_table(entries: &[CompareEntry]) -> Result<String, CliError> {
    let rows = entries
        .iter()
        .map(|e| match &e.report {
            Some(r) => vec![
                e.method.name().to_string(),
                r.iterations.to_string(),
                number(r.final_residual()),
                format!("{:.3}", e.wall_time_ms),
                r.termination.name().to_string(),
            ],
            None => vec![e.method.name().to_string(), String::new(), String::new(), format!("{:.3}", e.wall_time_ms), "unsupported".into()],
        })
        .collect();
    write_csv(&["method", "iterations", "final_residual", "wall_time_ms", "termination"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub q_hat: Option<f64>,
    pub certified_q: Option<f64>,
    pub report: Option<IterationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sweep_table(rows: &[SweepRow]) -> Result<String, CliError> {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                number(r.value),
                r.converged.to_string(),
                r.iterations.map(|n| n.to_string()).unwrap_or_default(),
                cell(r.q_hat),
                cell(r.certified_q),
            ]
        })
        .collect();
    write_csv(&["param", "converged", "iterations", "q_hat", "certified_q"], rows)
}

pub fn certificate_table(c: &Certificate) -> Result<String, CliError> {
    let mut rows: Vec<(&str, String)> = vec![
        ("p", number(c.p)),
        ("s", number(c.s)),
        ("ps", number(c.ps)),
        ("inverse_bound", c.inverse_bound.map_or("inf".into(), number)),
        ("q", number(c.q)),
        ("q_derivative_check", cell(c.q_derivative_check)),
        ("contraction_q", number(c.contraction_q)),
        ("radius", number(c.radius)),
        ("s_radius", cell(c.s_radius)),
        ("first_step", number(c.first_step)),
        ("rhs_norm", number(c.rhs_norm)),
        ("max_sample_amplitude", number(c.max_sample_amplitude)),
    ];
    if let Some(fq) = &c.feasible_q {
        rows.push(("feasible_q_max", number(fq.q_max)));
    }
    rows.extend([
        ("samples", c.samples.to_string()),
        ("pairs", c.pairs.to_string()),
        ("seed", c.seed.to_string()),
        ("invertibility_verified", c.invertibility_verified.to_string()),
        ("contraction_verified", c.contraction_verified.to_string()),
    ]);
    write_csv(&["quantity", "value"], rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect())
}

/// Statistics recomputed from a report, used to check that a written report
/// reads back to the same run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub termination: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_step: Option<f64>,
    pub q_hat: Option<f64>,
    pub final_norm: f64,
}

impl Summary {
    pub fn of(report: &IterationReport) -> Self {
        Self {
            method: report.method,
            termination: report.termination.name().to_string(),
            iterations: report.iterations,
            final_residual: report.final_residual(),
            final_step: report.step_norms.last().copied(),
            q_hat: empirical_contraction(report).ok(),
            final_norm: report.iterate_norms.last().copied().unwrap_or(0.0),
        }
    }
}

/// Reads back a `report.json` written by `solve`.
pub fn read_report(path: &Path) -> Result<IterationReport, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io)?;
    serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn write_outputs(out: &Path, json: &impl Serialize, table: &str) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(CliError::io)?;
    let json = serde_json::to_string_pretty(json).map_err(CliError::io)?;
    fs::write(out.join(REPORT_FILE), json + "\n").map_err(CliError::io)?;
    fs::write(out.join(TABLE_FILE), table).map_err(CliError::io)?;
    Ok(())
}
