//! The full invariant suite: commutator certificates, conservation along
//! trajectories, constant-covariance checks, the rate audit, reference-state
//! moment equalities, and the z-covariance bound search. One line per
//! invariant, machine readable, exit status decided by the caller.

use std::fmt::Write as _;
use std::time::Instant;

use spdc3_core::dynamics::{evolve, EvolutionSpec, Method};
use spdc3_core::fock::{Space, SpaceConfig, StateVector};
use spdc3_core::observables::{witness_dv, CovarianceSet, ObservableSet};
use spdc3_core::operators::{
    commutator_norm, parity_projector, parity_projector_literal, HamiltonianModel,
};
use spdc3_core::qubit::{
    closed_form_audit, dv_witness_moments, make_reference, mimic_ghz_pairwise, spin_moments,
    zcov_formula, zcov_maximize, ReferenceState, TwoQubitPure,
};
use spdc3_core::rng::{random_state, SplitMix64};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOL_COMMUTATOR: f64 = 1e-12;
pub const LITERAL_COMMUTATOR_FLOOR: f64 = 1e-6;
pub const TOL_PARITY: f64 = 1e-8;
pub const TOL_SUBSPACE: f64 = 1e-10;
pub const TOL_ZERO_MOMENTS: f64 = 1e-10;
pub const UNITARITY_PER_UNIT_TIME: f64 = 1e-9;
pub const TOL_COV_CONSTANT: f64 = 1e-6;
pub const SZ_DEPARTURE_FLOOR: f64 = 1e-4;
pub const TOL_RATE_FD: f64 = 1e-5;
pub const TOL_MOMENT_EQUALITY: f64 = 1e-12;
pub const TOL_WITNESS_REFERENCE: f64 = 1e-12;
pub const ZBOUND_LOWER: f64 = 0.2499;
pub const ZBOUND_UPPER: f64 = 0.25 + 1e-9;
pub const TOL_ARGMAX: f64 = 1e-4;
pub const TOL_FORMULA_DIRECT: f64 = 1e-12;
pub const TOL_OVERLAP_DEFICIT: f64 = 1e-8;
pub const TOL_METHOD_AGREEMENT: f64 = 1e-6;
pub const TOL_DT_REFINEMENT: f64 = 1e-6;
pub const TOL_CUTOFF_SHIFT: f64 = 1e-4;
const FD_DELTA: f64 = 0.01;

/// Pass when `value ≤ tolerance` (UpperBound) or `value ≥ tolerance`
/// (LowerBound).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::Upper => self.value <= self.tolerance,
            Bound::Lower => self.value >= self.tolerance,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    fn upper(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::Upper,
        });
    }

    fn lower(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::Lower,
        });
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let _ = writeln!(
                out,
                "{} {} {:e} {:e}",
                check.name,
                if check.pass() { "PASS" } else { "FAIL" },
                check.value,
                check.tolerance
            );
        }
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        out
    }
}

/// Run every invariant at the configured parameters.
pub fn run_verification(config: &RunConfig) -> Result<VerifyReport, CliError> {
    config.validate()?;
    let mut report = VerifyReport::default();
    let started = Instant::now();

    let space = Space::new(config.space_config()).map_err(|e| CliError::Config {
        message: e.to_string(),
    })?;
    let hamiltonian = HamiltonianModel::build(&space);
    let observables = ObservableSet::new(&space);

    operator_checks(config, &space, &hamiltonian, &mut report)?;
    let trajectory_time = Instant::now();
    trajectory_checks(config, &space, &hamiltonian, &observables, &mut report)?;
    report.note(format!(
        "trajectory checks took {:.1} s (D = {})",
        trajectory_time.elapsed().as_secs_f64(),
        space.dim()
    ));
    rate_audit_offtrajectory(config, &space, &hamiltonian, &observables, &mut report);
    numerical_soundness_checks(config, &mut report)?;
    reference_state_checks(config, &mut report);

    report.note(format!(
        "verification suite completed in {:.1} s",
        started.elapsed().as_secs_f64()
    ));
    Ok(report)
}

fn operator_checks(
    config: &RunConfig,
    space: &Space,
    hamiltonian: &HamiltonianModel,
    report: &mut VerifyReport,
) -> Result<(), CliError> {
    let projector = if config.use_literal_p {
        parity_projector_literal(space)
    } else {
        parity_projector(space)
    };
    report.upper(
        "projector_idempotent",
        projector.matmul(&projector).sub(&projector).max_abs_entry(),
        0.0,
    );
    report.upper("projector_hermitian", projector.hermitian_deviation(), 0.0);

    let period = 2.0 * std::f64::consts::PI / hamiltonian.drive_freq();
    let mut h_dev: f64 = 0.0;
    let mut comm_max: f64 = 0.0;
    let mut literal_min = f64::INFINITY;
    let literal = parity_projector_literal(space);
    for k in 0..20 {
        let t = period * k as f64 / 19.0;
        let ht = hamiltonian.at(t);
        h_dev = h_dev.max(ht.hermitian_deviation());
        comm_max = comm_max.max(commutator_norm(&ht, &projector).map_err(to_cli)?);
        literal_min = literal_min.min(commutator_norm(&ht, &literal).map_err(to_cli)?);
    }
    report.upper("hamiltonian_hermitian", h_dev, 0.0);
    report.upper("commutator_h_projector", comm_max, TOL_COMMUTATOR);
    // documented negative result: the shared-(α,β) projector variant does
    // not commute once the Rabi coupling is on
    report.lower(
        "literal_projector_noncommuting",
        literal_min,
        LITERAL_COMMUTATOR_FLOOR,
    );
    Ok(())
}

fn trajectory_checks(
    config: &RunConfig,
    space: &Space,
    hamiltonian: &HamiltonianModel,
    observables: &ObservableSet,
    report: &mut VerifyReport,
) -> Result<(), CliError> {
    // uniform grid plus tight probe triplets for finite-difference rates
    let mut samples: Vec<f64> = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * config.sample_spacing;
        if t > config.t_final * (1.0 + 1e-12) {
            break;
        }
        samples.push(t.min(config.t_final));
        k += 1;
    }
    let mut probes: Vec<f64> = Vec::new();
    for center in [2.0, 5.0] {
        if center + FD_DELTA <= config.t_final {
            probes.push(center);
            samples.push(center - FD_DELTA);
            samples.push(center);
            samples.push(center + FD_DELTA);
        }
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples.dedup();

    let mut spec = EvolutionSpec::new(config.t_final, config.method);
    spec.sample_times = samples;
    spec.max_dt = config.dt;
    spec.norm_tolerance = config.norm_tolerance;
    spec.leak_threshold = config.leak_threshold;
    let result = evolve(space, hamiltonian, &spec, &space.vacuum()).map_err(to_cli)?;
    if let Some(f) = result.summary.failure {
        return Err(CliError::Failure {
            message: format!(
                "verification trajectory failed: norm deviation {} at t = {}",
                f.norm_deviation, f.t
            ),
        });
    }

    report.upper(
        "unitarity_drift",
        result.summary.max_norm_deviation,
        UNITARITY_PER_UNIT_TIME * config.t_final.max(1.0),
    );
    let leak = result.summary.peak_top_level;
    report.note(format!(
        "peak top-level populations = {:e}, {:e}, {:e}",
        leak[0], leak[1], leak[2]
    ));

    let literal_p = config
        .use_literal_p
        .then(|| parity_projector_literal(space));
    let parity_projector_used = |state: &StateVector| -> f64 {
        match &literal_p {
            Some(p) => state.inner(&p.apply(state)).re,
            None => observables.parity_expectation(state),
        }
    };

    let mut min_parity = f64::INFINITY;
    let mut max_off = 0.0f64;
    let mut max_zero_moment = 0.0f64;
    let mut base_cov: Option<CovarianceSet> = None;
    let mut max_dev_xx = 0.0f64;
    let mut max_dev_pp = 0.0f64;
    let mut max_dev_sx = 0.0f64;
    let mut max_dev_sy = 0.0f64;
    let mut max_abs_sz = 0.0f64;
    for (_, state) in &result.samples {
        min_parity = min_parity.min(parity_projector_used(state));
        max_off = max_off.max(observables.off_subspace_probability(state));
        let suite = observables.zero_moment_suite(state).map_err(to_cli)?;
        max_zero_moment = max_zero_moment.max(suite.max_abs());
        let cov = observables.covariances(state).map_err(to_cli)?;
        let base = base_cov.get_or_insert(cov);
        for idx in 0..3 {
            max_dev_xx = max_dev_xx.max((cov.xx.cross[idx] - base.xx.cross[idx]).abs());
            max_dev_pp = max_dev_pp.max((cov.pp.cross[idx] - base.pp.cross[idx]).abs());
            max_dev_sx = max_dev_sx.max((cov.spin_x.cross[idx] - base.spin_x.cross[idx]).abs());
            max_dev_sy = max_dev_sy.max((cov.spin_y.cross[idx] - base.spin_y.cross[idx]).abs());
            max_abs_sz = max_abs_sz.max(cov.spin_z.cross[idx].abs());
        }
    }
    report.upper("parity_conserved", 1.0 - min_parity, TOL_PARITY);
    report.upper("subspace_support", max_off, TOL_SUBSPACE);
    report.upper("zero_moments", max_zero_moment, TOL_ZERO_MOMENTS);
    report.upper("covariance_constant_xx", max_dev_xx, TOL_COV_CONSTANT);
    report.upper("covariance_constant_pp", max_dev_pp, TOL_COV_CONSTANT);
    report.upper("covariance_constant_sxsx", max_dev_sx, TOL_COV_CONSTANT);
    report.upper("covariance_constant_sysy", max_dev_sy, TOL_COV_CONSTANT);
    report.lower("covariance_szsz_departs", max_abs_sz, SZ_DEPARTURE_FLOOR);

    // centered finite differences against the exact commutator rates
    let mut max_fd_dev = 0.0f64;
    let mut max_sy_freq_dev = 0.0f64;
    let mut max_sy_coupling_dev = 0.0f64;
    for &center in &probes {
        let find = |t: f64| {
            result
                .samples
                .iter()
                .find(|(s, _)| (*s - t).abs() < 1e-12)
                .map(|(_, st)| st)
        };
        let (before, at, after) = match (
            find(center - FD_DELTA),
            find(center),
            find(center + FD_DELTA),
        ) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => continue,
        };
        let audit = observables
            .covariance_rates(at, hamiltonian, center)
            .map_err(to_cli)?;
        let c_minus = observables.covariances(before).map_err(to_cli)?;
        let c_plus = observables.covariances(after).map_err(to_cli)?;
        for idx in 0..3 {
            let families = [
                (
                    audit.exact_xx[idx],
                    c_plus.xx.cross[idx] - c_minus.xx.cross[idx],
                ),
                (
                    audit.exact_pp[idx],
                    c_plus.pp.cross[idx] - c_minus.pp.cross[idx],
                ),
                (
                    audit.exact_sxsx[idx],
                    c_plus.spin_x.cross[idx] - c_minus.spin_x.cross[idx],
                ),
                (
                    audit.exact_sysy[idx],
                    c_plus.spin_y.cross[idx] - c_minus.spin_y.cross[idx],
                ),
                (
                    audit.exact_szsz[idx],
                    c_plus.spin_z.cross[idx] - c_minus.spin_z.cross[idx],
                ),
            ];
            for (rate, diff) in families {
                max_fd_dev = max_fd_dev.max((rate - diff / (2.0 * FD_DELTA)).abs());
            }
            max_sy_freq_dev = max_sy_freq_dev
                .max((audit.stated_sysy_freq_only[idx] - audit.exact_sysy[idx]).abs());
            max_sy_coupling_dev = max_sy_coupling_dev
                .max((audit.stated_sysy_with_coupling[idx] - audit.exact_sysy[idx]).abs());
        }
    }
    report.upper("rate_exact_matches_fd", max_fd_dev, TOL_RATE_FD);
    report.upper(
        "rate_sy_freq_variant_on_trajectory",
        max_sy_freq_dev,
        TOL_RATE_FD,
    );
    report.upper(
        "rate_sy_coupling_variant_on_trajectory",
        max_sy_coupling_dev,
        TOL_RATE_FD,
    );
    Ok(())
}

/// Discriminate the stated S_y-rate variants on a state outside the
/// dynamical subspace, where their terms stop vanishing.
fn rate_audit_offtrajectory(
    config: &RunConfig,
    space: &Space,
    hamiltonian: &HamiltonianModel,
    observables: &ObservableSet,
    report: &mut VerifyReport,
) {
    let mut rng = SplitMix64::new(config.seed ^ 0x5eed_0ff7);
    let state = random_state(space.dim(), &mut rng);
    let t = 0.7;
    let audit = match observables.covariance_rates(&state, hamiltonian, t) {
        Ok(a) => a,
        Err(e) => {
            report.note(format!("off-trajectory rate audit skipped: {e}"));
            return;
        }
    };
    let mut freq_dev = 0.0f64;
    let mut coupling_dev = 0.0f64;
    let mut xx_dev = 0.0f64;
    let mut szsz_dev = 0.0f64;
    let mut pp_imag = 0.0f64;
    let mut pp_real_dev = 0.0f64;
    for idx in 0..3 {
        freq_dev = freq_dev.max((audit.stated_sysy_freq_only[idx] - audit.exact_sysy[idx]).abs());
        coupling_dev =
            coupling_dev.max((audit.stated_sysy_with_coupling[idx] - audit.exact_sysy[idx]).abs());
        xx_dev = xx_dev.max((audit.stated_xx[idx] - audit.exact_xx[idx]).abs());
        szsz_dev = szsz_dev.max((audit.stated_szsz[idx] - audit.exact_szsz[idx]).abs());
        pp_imag = pp_imag.max(audit.stated_pp[idx].im.abs());
        pp_real_dev = pp_real_dev.max((audit.stated_pp[idx].re - audit.exact_pp[idx]).abs());
    }
    let verdict = match (freq_dev < 1e-10, coupling_dev < 1e-10) {
        (true, true) => "both",
        (true, false) => "the frequency-only variant",
        (false, true) => "the variant with coupling terms",
        (false, false) => "neither",
    };
    report.note(format!(
        "S_y rate audit: on the evolved trajectory every stated term vanishes and both variants match the exact commutator; on a generic (parity-broken) state the exact commutator matches: {verdict} (frequency-only dev {freq_dev:e}, with-coupling dev {coupling_dev:e})"
    ));
    report.note(format!(
        "stated-rate audit on generic state: xx dev {xx_dev:e}, szsz dev {szsz_dev:e}, pp imaginary part {pp_imag:e} (the stated form carries an explicit i factor), pp real dev {pp_real_dev:e}"
    ));
}

fn numerical_soundness_checks(
    config: &RunConfig,
    report: &mut VerifyReport,
) -> Result<(), CliError> {
    // pinned cross-validation point: g0 = 0.1, t = 5
    let t_end = 5.0;
    let compare_g0 = 0.1;
    let mut base_cfg = config.space_config();
    base_cfg.pump_coupling = compare_g0;

    let run =
        |cfg: &SpaceConfig, method: Method, dt: f64| -> Result<(Space, StateVector), CliError> {
            let space = Space::new(cfg.clone()).map_err(|e| CliError::Config {
                message: e.to_string(),
            })?;
            let h = HamiltonianModel::build(&space);
            let mut spec = EvolutionSpec::new(t_end, method);
            spec.sample_times = vec![t_end];
            spec.max_dt = dt;
            spec.norm_tolerance = config.norm_tolerance;
            let result = evolve(&space, &h, &spec, &space.vacuum()).map_err(to_cli)?;
            let (_, state) = result.samples.into_iter().next().ok_or(CliError::Failure {
                message: "cross-validation trajectory failed".into(),
            })?;
            Ok((space, state))
        };

    let (space_a, state_a) = run(&base_cfg, Method::Rk4, config.dt)?;
    let (_, state_b) = run(&base_cfg, Method::ExpMid, config.dt)?;
    let overlap = state_a.inner(&state_b).norm();
    report.upper(
        "stepper_overlap_deficit",
        1.0 - overlap,
        TOL_OVERLAP_DEFICIT,
    );

    let obs = ObservableSet::new(&space_a);
    let rec_a = obs.record(t_end, &state_a).map_err(to_cli)?;
    let rec_b = obs.record(t_end, &state_b).map_err(to_cli)?;
    report.upper(
        "method_observable_agreement",
        record_distance(&rec_a, &rec_b),
        TOL_METHOD_AGREEMENT,
    );

    let (_, state_fine) = run(&base_cfg, Method::Rk4, config.dt / 2.0)?;
    let rec_fine = obs.record(t_end, &state_fine).map_err(to_cli)?;
    report.upper(
        "dt_refinement_shift",
        witness_distance(&rec_a, &rec_fine),
        TOL_DT_REFINEMENT,
    );

    let mut big_cfg = base_cfg.clone();
    for n in &mut big_cfg.cutoffs {
        *n += 2;
    }
    let (space_big, state_big) = run(&big_cfg, Method::Rk4, config.dt)?;
    let obs_big = ObservableSet::new(&space_big);
    let rec_big = obs_big.record(t_end, &state_big).map_err(to_cli)?;
    report.upper(
        "cutoff_convergence_shift",
        witness_distance(&rec_a, &rec_big),
        TOL_CUTOFF_SHIFT,
    );
    Ok(())
}

fn record_distance(
    a: &spdc3_core::observables::ObservableRecord,
    b: &spdc3_core::observables::ObservableRecord,
) -> f64 {
    let mut d = witness_distance(a, b);
    d = d.max((a.p_expect - b.p_expect).abs());
    for idx in 0..3 {
        d = d.max((a.covariances.xx.cross[idx] - b.covariances.xx.cross[idx]).abs());
        d = d.max((a.covariances.pp.cross[idx] - b.covariances.pp.cross[idx]).abs());
        d = d.max((a.covariances.spin_x.cross[idx] - b.covariances.spin_x.cross[idx]).abs());
        d = d.max((a.covariances.spin_y.cross[idx] - b.covariances.spin_y.cross[idx]).abs());
        d = d.max((a.covariances.spin_z.cross[idx] - b.covariances.spin_z.cross[idx]).abs());
    }
    d
}

fn witness_distance(
    a: &spdc3_core::observables::ObservableRecord,
    b: &spdc3_core::observables::ObservableRecord,
) -> f64 {
    (a.witnesses.g_cv - b.witnesses.g_cv)
        .abs()
        .max((a.witnesses.g_cv_prime - b.witnesses.g_cv_prime).abs())
        .max((a.witnesses.g_dv - b.witnesses.g_dv).abs())
}

fn reference_state_checks(config: &RunConfig, report: &mut VerifyReport) {
    let ghz = make_reference(ReferenceState::Ghz);
    let mimic = make_reference(ReferenceState::MimicGhz);
    let ghz_table = spin_moments(&ghz).expect("GHZ is a valid density matrix");
    let mimic_table = spin_moments(&mimic).expect("mimic is a valid density matrix");
    report.upper(
        "ghz_mimic_moment_equality",
        ghz_table.max_abs_difference(&mimic_table),
        TOL_MOMENT_EQUALITY,
    );
    let mut zcov_err = 0.0f64;
    for pi in 0..3 {
        zcov_err = zcov_err.max((ghz_table.cov[2][pi] - 0.25).abs());
    }
    report.upper("ghz_szsz_quarter", zcov_err, 0.0);

    // documented discrepancy: the pairwise twelve-projector mixture caps
    // the z covariance at 1/12 by construction (GHZ needs 1/4)
    let pairwise = spin_moments(&mimic_ghz_pairwise()).expect("pairwise mimic is valid");
    report.lower(
        "mimic_pairwise_moment_deviation",
        pairwise.max_abs_difference(&ghz_table),
        0.1,
    );
    report.note(format!(
        "pairwise mimic z covariance = {} (GHZ: 0.25); the perfectly correlated separable mimic is used for the equality check",
        pairwise.cov[2][0]
    ));

    let ghz_dv = dv_witness_moments(&ghz).expect("ghz moments");
    report.upper(
        "witness_dv_ghz_zero",
        witness_dv(&ghz_dv).expect("ghz witness").abs(),
        TOL_WITNESS_REFERENCE,
    );
    let mimic_dv = dv_witness_moments(&mimic).expect("mimic moments");
    let g_mimic = witness_dv(&mimic_dv).expect("mimic witness");
    report.upper("witness_dv_mimic_nonpositive", g_mimic, 0.0);
    report.note(format!(
        "G_DV(mimic) = {g_mimic} (third-moment coherence absent in the separable mixture)"
    ));

    let search = zcov_maximize(config.samples, config.seed, None);
    report.lower("zbound_max_lower", search.max, ZBOUND_LOWER);
    report.upper("zbound_max_upper", search.max, ZBOUND_UPPER);
    report.upper(
        "zbound_argmax_at_quarter",
        (zcov_formula(&search.argmax) - 0.25).abs(),
        TOL_ARGMAX,
    );
    let bell = zcov_maximize(1, config.seed, Some(TwoQubitPure::bell()));
    report.upper("zbound_bell_exact", (bell.max - 0.25).abs(), 0.0);

    let audit = closed_form_audit(10_000, config.seed);
    report.upper(
        "zcov_formula_matches_direct",
        audit.max_formula_deviation,
        TOL_FORMULA_DIRECT,
    );
    report.upper("popoviciu_bound", audit.max_abs_covariance, 0.25 + 1e-12);

    // witness ordering on random states of a small composite space
    let small = Space::new(SpaceConfig::default().with_cutoff(1)).expect("small space");
    let obs = ObservableSet::new(&small);
    let mut rng = SplitMix64::new(config.seed ^ 0x07de_41b9);
    let mut min_gap = f64::INFINITY;
    for _ in 0..200 {
        let state = random_state(small.dim(), &mut rng);
        let m = obs.moments(&state).expect("moments");
        let w = obs.witnesses(&m).expect("witness");
        min_gap = min_gap.min(w.g_cv - w.g_cv_prime);
    }
    report.lower("witness_max_dominates_sum", min_gap, -1e-12);
}

fn to_cli<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Failure {
        message: e.to_string(),
    }
}
