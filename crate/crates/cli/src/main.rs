//! Command-line entry point: evolve, sweep, verify, reference, dump.

use std::path::Path;
use std::process::ExitCode;

use spdc3_cli::config::RunConfig;
use spdc3_cli::error::CliError;
use spdc3_cli::output;
use spdc3_cli::reference::reference_report;
use spdc3_cli::sweep::{compare_regimes, run_sweep};
use spdc3_cli::verify::run_verification;
use spdc3_core::dynamics::{evolve_observed, EvolutionSpec};
use spdc3_core::fock::Space;
use spdc3_core::observables::ObservableSet;
use spdc3_core::operators::{
    parity_projector, parity_projector_literal, pump_operator, HamiltonianModel,
};

const USAGE: &str = "usage: spdc3 <command> [flags]

commands:
  evolve             integrate one trajectory, write a trajectory CSV
  sweep              run the (g0, t) grid, write sweep CSV + summary JSON
  verify             run the invariant suite, exit 0 only if all checks pass
  reference <kind>   report on ghz | w | mimic | zbound
  dump <operator>    print h0 | x3 | p | p-literal as `row col re im` lines

flags:
  --config PATH      flat key = value file applied before other flags
  --g0 F             pump coupling
  --t-final F        integration end, units of 1/omega1
  --dt F             max step size
  --cutoff N         Fock cutoff for all three modes
  --method a|b       a = fixed-step RK4, b = midpoint exponential propagator
  --grid-g0 LIST     comma-separated sweep couplings
  --grid-t LIST      comma-separated sweep sample times
  --jobs N           parallel sweep rows (0 = all cores)
  --seed N           RNG seed for sampled checks
  --samples N        sample count for the zbound search
  --strict           exit nonzero if any sweep row failed
  --use-literal-P    run parity checks with the literal projector variant
  --out DIR          output directory
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spdc3: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage {
            message: format!("missing command\n{USAGE}"),
        });
    };
    let mut positional: Vec<&str> = Vec::new();
    let mut config = RunConfig::default();

    // config file first so explicit flags override it
    let mut iter = args[1..].iter().peekable();
    let mut pairs: Vec<(String, String)> = Vec::new();
    while let Some(arg) = iter.next() {
        if let Some(flag) = arg.strip_prefix("--") {
            let key = flag.replace('-', "_");
            match key.as_str() {
                "strict" | "use_literal_P" | "use_literal_p" => {
                    pairs.push((key.to_lowercase(), "true".into()));
                }
                _ => {
                    let value = iter.next().ok_or_else(|| CliError::Usage {
                        message: format!("flag --{flag} needs a value\n{USAGE}"),
                    })?;
                    pairs.push((key, value.clone()));
                }
            }
        } else {
            positional.push(arg);
        }
    }
    if let Some((_, path)) = pairs.iter().find(|(k, _)| k == "config") {
        config.apply_file(Path::new(path))?;
    }
    for (key, value) in &pairs {
        if key == "config" {
            continue;
        }
        config.set(key, value)?;
    }

    match command.as_str() {
        "evolve" => cmd_evolve(&config),
        "sweep" => cmd_sweep(&config),
        "verify" => cmd_verify(&config),
        "reference" => {
            let kind = positional.first().ok_or_else(|| CliError::Usage {
                message: format!("reference needs a state kind\n{USAGE}"),
            })?;
            let report = reference_report(kind, config.samples, config.seed)?;
            print!("{report}");
            Ok(())
        }
        "dump" => {
            let which = positional.first().ok_or_else(|| CliError::Usage {
                message: format!("dump needs an operator name\n{USAGE}"),
            })?;
            cmd_dump(&config, which)
        }
        other => Err(CliError::Usage {
            message: format!("unknown command `{other}`\n{USAGE}"),
        }),
    }
}

fn cmd_evolve(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    let space = Space::new(config.space_config()).map_err(|e| CliError::Config {
        message: e.to_string(),
    })?;
    let hamiltonian = HamiltonianModel::build(&space);
    let observables = ObservableSet::new(&space);
    let mut spec =
        EvolutionSpec::with_uniform_samples(config.t_final, config.sample_spacing, config.method);
    spec.max_dt = config.dt;
    spec.norm_tolerance = config.norm_tolerance;
    spec.leak_threshold = config.leak_threshold;

    let mut records = Vec::new();
    let mut observable_error: Option<String> = None;
    let summary = evolve_observed(&space, &hamiltonian, &spec, &space.vacuum(), |t, state| {
        if observable_error.is_none() {
            match observables.record(t, state) {
                Ok(r) => records.push(r),
                Err(e) => observable_error = Some(e.to_string()),
            }
        }
    })
    .map_err(|e| CliError::Failure {
        message: e.to_string(),
    })?;

    let path = output::output_path(config, "trajectory", "csv");
    output::write_file(&path, &output::render_trajectory_csv(config, &records))?;
    println!("wrote {}", path.display());
    let min_parity = records
        .iter()
        .map(|r| r.p_expect)
        .fold(f64::INFINITY, f64::min);
    println!(
        "samples = {}, min P_expect = {}, max |norm-1| = {:e}, leak warning = {}",
        records.len(),
        min_parity,
        summary.max_norm_deviation,
        summary.leak_warning,
    );
    if let Some(msg) = observable_error {
        return Err(CliError::Failure { message: msg });
    }
    if let Some(f) = summary.failure {
        return Err(CliError::Failure {
            message: format!(
                "trajectory failed: norm deviation {} at t = {}",
                f.norm_deviation, f.t
            ),
        });
    }
    Ok(())
}

fn cmd_sweep(config: &RunConfig) -> Result<(), CliError> {
    let result = run_sweep(config)?;
    let summary = compare_regimes(&result)?;
    let csv_path = output::output_path(config, "sweep", "csv");
    output::write_file(&csv_path, &output::render_sweep_csv(config, &result))?;
    let summary_path = output::output_path(config, "summary", "json");
    output::write_file(
        &summary_path,
        &output::render_summary_json(config, &result, &summary),
    )?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", summary_path.display());
    println!(
        "cells: {} evaluated / {} total, G_CV>0: {}, G_DV>0: {}, failed rows: {}",
        summary.cells_evaluated,
        summary.cells_total,
        summary.cells_cv_positive,
        summary.cells_dv_positive,
        summary.failed_rows,
    );
    if config.strict && summary.failed_rows > 0 {
        return Err(CliError::Failure {
            message: format!("{} sweep row(s) failed", summary.failed_rows),
        });
    }
    Ok(())
}

fn cmd_verify(config: &RunConfig) -> Result<(), CliError> {
    print!("{}", config.provenance_comment());
    let report = run_verification(config)?;
    print!("{}", report.render());
    if report.all_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass())
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Failure {
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

fn cmd_dump(config: &RunConfig, which: &str) -> Result<(), CliError> {
    config.validate()?;
    let space = Space::new(config.space_config()).map_err(|e| CliError::Config {
        message: e.to_string(),
    })?;
    let op = match which {
        "h0" => HamiltonianModel::build(&space).static_part().clone(),
        "x3" => pump_operator(&space),
        "p" => parity_projector(&space),
        "p-literal" => parity_projector_literal(&space),
        other => {
            return Err(CliError::Usage {
                message: format!("unknown operator `{other}` (expected h0|x3|p|p-literal)"),
            })
        }
    };
    print!("{}", output::render_operator_dump(&op));
    Ok(())
}
