//! CSV and summary writers. CSV is the only data interchange; floats are
//! written with the shortest round-trip representation so repeated runs
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use spdc3_core::observables::ObservableRecord;
use spdc3_core::sparse::SparseOperator;

use crate::config::{join_f64, RunConfig};
use crate::error::CliError;
use crate::sweep::{RegimeSummary, SweepResult};

/// Observable CSV columns, in the exact contract order.
pub const OBSERVABLE_COLUMNS: [&str; 22] = [
    "t",
    "g0",
    "G_CV",
    "G_CV_prime",
    "G_DV",
    "Δ²x12",
    "Δ²x13",
    "Δ²x23",
    "Δ²p12",
    "Δ²p13",
    "Δ²p23",
    "Δ²Sx12",
    "Δ²Sx13",
    "Δ²Sx23",
    "Δ²Sy12",
    "Δ²Sy13",
    "Δ²Sy23",
    "Δ²Sz12",
    "Δ²Sz13",
    "Δ²Sz23",
    "P_expect",
    "norm",
];

fn observable_values(record: &ObservableRecord, g0: f64) -> Vec<f64> {
    let w = &record.witnesses;
    let c = &record.covariances;
    let mut v = vec![record.t, g0, w.g_cv, w.g_cv_prime, w.g_dv];
    v.extend_from_slice(&c.xx.cross);
    v.extend_from_slice(&c.pp.cross);
    v.extend_from_slice(&c.spin_x.cross);
    v.extend_from_slice(&c.spin_y.cross);
    v.extend_from_slice(&c.spin_z.cross);
    v.push(record.p_expect);
    v.push(record.norm);
    v
}

fn csv_line(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Sweep CSV: provenance comments, the contract header, one line per cell.
pub fn render_sweep_csv(config: &RunConfig, result: &SweepResult) -> String {
    let mut out = config.provenance_comment();
    let _ = writeln!(out, "# grid_g0 = {}", join_f64(&result.grid.g0_values));
    let _ = writeln!(out, "# grid_t = {}", join_f64(&result.grid.sample_times));
    for row in &result.rows {
        if let Some(reason) = &row.failure {
            let _ = writeln!(out, "# failed_row g0 = {} : {}", row.g0, reason);
        }
    }
    out.push_str(&OBSERVABLE_COLUMNS.join(","));
    out.push('\n');
    for row in &result.rows {
        if row.failed() {
            continue;
        }
        for cell in &row.cells {
            out.push_str(&csv_line(&observable_values(cell, row.g0)));
            out.push('\n');
        }
    }
    out
}

/// Trajectory CSV: per-sample norm, parity, leakage, then the observable
/// columns that are not already present.
pub fn render_trajectory_csv(config: &RunConfig, records: &[ObservableRecord]) -> String {
    let mut out = config.provenance_comment();
    out.push_str("t,norm,P_expect,leak1,leak2,leak3");
    for col in &OBSERVABLE_COLUMNS[2..20] {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for r in records {
        let mut values = vec![r.t, r.norm, r.p_expect, r.leak[0], r.leak[1], r.leak[2]];
        let obs = observable_values(r, config.g0);
        values.extend_from_slice(&obs[2..20]);
        out.push_str(&csv_line(&values));
        out.push('\n');
    }
    out
}

/// Flat JSON summary of a sweep: counts, flags, provenance.
pub fn render_summary_json(
    config: &RunConfig,
    result: &SweepResult,
    summary: &RegimeSummary,
) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"version\": \"{}\",", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "  \"config_hash\": \"{}\",", config.grid_hash());
    let _ = writeln!(out, "  \"method\": \"{}\",", config.method.name());
    let _ = writeln!(out, "  \"dt\": {},", config.dt);
    let _ = writeln!(
        out,
        "  \"cutoffs\": [{}],",
        config.cutoffs.map(|n| n.to_string()).join(",")
    );
    let _ = writeln!(out, "  \"mode_freqs\": [{}],", join_f64(&config.mode_freqs));
    let _ = writeln!(
        out,
        "  \"qubit_freqs\": [{}],",
        join_f64(&config.qubit_freqs)
    );
    let _ = writeln!(
        out,
        "  \"rabi_couplings\": [{}],",
        join_f64(&config.rabi_couplings)
    );
    let _ = writeln!(
        out,
        "  \"drive_freq\": {},",
        config.space_config().drive_freq()
    );
    let _ = writeln!(out, "  \"seed\": {},", config.seed);
    let _ = writeln!(
        out,
        "  \"grid_g0\": [{}],",
        join_f64(&result.grid.g0_values)
    );
    let _ = writeln!(
        out,
        "  \"grid_t_count\": {},",
        result.grid.sample_times.len()
    );
    let _ = writeln!(out, "  \"cells_total\": {},", summary.cells_total);
    let _ = writeln!(out, "  \"cells_evaluated\": {},", summary.cells_evaluated);
    let _ = writeln!(
        out,
        "  \"cells_cv_positive\": {},",
        summary.cells_cv_positive
    );
    let _ = writeln!(
        out,
        "  \"cells_dv_positive\": {},",
        summary.cells_dv_positive
    );
    let ratio = summary
        .ratio
        .map(|r| r.to_string())
        .unwrap_or_else(|| "null".into());
    let _ = writeln!(out, "  \"dv_cv_ratio\": {ratio},");
    let failed: Vec<String> = result
        .rows
        .iter()
        .filter(|r| r.failed())
        .map(|r| r.g0.to_string())
        .collect();
    let _ = writeln!(out, "  \"failed_row_g0\": [{}],", failed.join(","));
    let flagged: Vec<String> = result
        .rows
        .iter()
        .filter(|r| r.leak_warning)
        .map(|r| r.g0.to_string())
        .collect();
    let _ = writeln!(out, "  \"leak_flagged_row_g0\": [{}]", flagged.join(","));
    out.push_str("}\n");
    out
}

/// One line per nonzero, `row col re im`, for cross-implementation diffing.
pub fn render_operator_dump(op: &SparseOperator) -> String {
    let mut out = String::new();
    for (r, c, v) in op.entries() {
        let _ = writeln!(out, "{r} {c} {} {}", v.re, v.im);
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io {
                message: format!("cannot create {}: {e}", parent.display()),
            })?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::Io {
        message: format!("cannot create {}: {e}", path.display()),
    })?;
    f.write_all(contents.as_bytes()).map_err(|e| CliError::Io {
        message: format!("cannot write {}: {e}", path.display()),
    })?;
    Ok(())
}

pub fn output_path(config: &RunConfig, stem: &str, ext: &str) -> PathBuf {
    config
        .out_dir
        .join(format!("{stem}_{}.{ext}", config.grid_hash()))
}
