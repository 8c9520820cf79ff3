//! (g0, t) parameter sweeps: one trajectory per g0 row, observables harvested
//! at the grid times along the way, rows run in parallel with no shared
//! mutable state.

use rayon::prelude::*;

use spdc3_core::dynamics::{evolve_observed, EvolutionSpec};
use spdc3_core::fock::Space;
use spdc3_core::observables::{ObservableRecord, ObservableSet};
use spdc3_core::operators::HamiltonianModel;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub g0_values: Vec<f64>,
    pub sample_times: Vec<f64>,
}

impl SweepGrid {
    pub fn from_config(config: &RunConfig) -> Self {
        Self {
            g0_values: config.grid_g0.clone(),
            sample_times: config.grid_t.clone(),
        }
    }
}

/// One g0 row: its cells in time order, or a failure diagnostic covering the
/// whole row.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub g0: f64,
    pub cells: Vec<ObservableRecord>,
    pub failure: Option<String>,
    pub leak_warning: bool,
    pub peak_leak: [f64; 3],
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeSummary {
    pub cells_total: usize,
    pub cells_evaluated: usize,
    pub cells_cv_positive: usize,
    pub cells_dv_positive: usize,
    pub failed_rows: usize,
    /// dv/cv positive-cell ratio; `None` when no cell is CV-positive.
    pub ratio: Option<f64>,
}

/// Run the full grid. Rows are independent work units; cells within a row
/// share one trajectory and are never re-integrated per sample time.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult, CliError> {
    config.validate()?;
    let grid = SweepGrid::from_config(config);
    let space = Space::new(config.space_config()).map_err(|e| CliError::Config {
        message: e.to_string(),
    })?;
    let base_hamiltonian = HamiltonianModel::build(&space);
    let observables = ObservableSet::new(&space);

    let run_row = |&g0: &f64| -> SweepRow {
        let hamiltonian = base_hamiltonian.with_pump_coupling(g0);
        let mut spec = EvolutionSpec::new(*grid.sample_times.last().unwrap(), config.method);
        spec.sample_times = grid.sample_times.clone();
        spec.max_dt = config.dt;
        spec.norm_tolerance = config.norm_tolerance;
        spec.leak_threshold = config.leak_threshold;

        let mut cells = Vec::with_capacity(grid.sample_times.len());
        let mut observable_error: Option<String> = None;
        let outcome = evolve_observed(&space, &hamiltonian, &spec, &space.vacuum(), |t, state| {
            if observable_error.is_some() {
                return;
            }
            match observables.record(t, state) {
                Ok(record) => cells.push(record),
                Err(e) => observable_error = Some(e.to_string()),
            }
        });
        match outcome {
            Ok(summary) => {
                let failure = observable_error.or_else(|| {
                    summary
                        .failure
                        .map(|f| format!("norm deviation {} at t = {}", f.norm_deviation, f.t))
                });
                SweepRow {
                    g0,
                    cells,
                    failure,
                    leak_warning: summary.leak_warning,
                    peak_leak: summary.peak_top_level,
                }
            }
            Err(e) => SweepRow {
                g0,
                cells,
                failure: Some(e.to_string()),
                leak_warning: false,
                peak_leak: [0.0; 3],
            },
        }
    };

    let rows: Vec<SweepRow> = if config.jobs == 1 {
        grid.g0_values.iter().map(run_row).collect()
    } else if config.jobs == 0 {
        grid.g0_values.par_iter().map(run_row).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| CliError::Config {
                message: e.to_string(),
            })?;
        pool.install(|| grid.g0_values.par_iter().map(run_row).collect())
    };

    Ok(SweepResult { grid, rows })
}

/// Count witness-positive cells over non-failed rows.
pub fn compare_regimes(result: &SweepResult) -> Result<RegimeSummary, CliError> {
    let cells_total = result.grid.g0_values.len() * result.grid.sample_times.len();
    if cells_total == 0 {
        return Err(CliError::Failure {
            message: "empty sweep".into(),
        });
    }
    let mut summary = RegimeSummary {
        cells_total,
        cells_evaluated: 0,
        cells_cv_positive: 0,
        cells_dv_positive: 0,
        failed_rows: 0,
        ratio: None,
    };
    for row in &result.rows {
        if row.failed() {
            summary.failed_rows += 1;
            continue;
        }
        for cell in &row.cells {
            summary.cells_evaluated += 1;
            if cell.witnesses.g_cv > 0.0 {
                summary.cells_cv_positive += 1;
            }
            if cell.witnesses.g_dv > 0.0 {
                summary.cells_dv_positive += 1;
            }
        }
    }
    if summary.cells_evaluated == 0 {
        return Err(CliError::Failure {
            message: "all sweep rows failed".into(),
        });
    }
    if summary.cells_cv_positive > 0 {
        summary.ratio = Some(summary.cells_dv_positive as f64 / summary.cells_cv_positive as f64);
    }
    Ok(summary)
}
