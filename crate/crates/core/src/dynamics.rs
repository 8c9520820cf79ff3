//! Time-dependent Schrödinger integration i∂t ψ = H(t)ψ from a given state,
//! with two independent steppers for cross-validation and with norm/leakage
//! monitoring. The state is never renormalized: norm drift is a measured
//! error signal, and a drift beyond tolerance fails the trajectory.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::fock::{Space, StateVector, SITES};
use crate::operators::HamiltonianModel;

/// Fixed-step integration method.
///
/// `Rk4` is a classical 4th-order explicit integrator on the amplitude ODE;
/// `ExpMid` exponentiates the midpoint Hamiltonian over each step by a scaled
/// truncated series applied to the vector. The two share no code path beyond
/// the Hamiltonian application, so their agreement serves as the ground
/// truth for trajectory outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    ExpMid,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::ExpMid => "expmid",
        }
    }
}

/// Default max step, in units of 1/ω1. Resolves the cos(ω_d t) drive (period
/// 2π/4 ≈ 1.57 at default frequencies) by three orders of magnitude.
pub const DEFAULT_MAX_DT: f64 = 1e-3;
/// Default tolerance on |norm − 1| before a trajectory is flagged failed.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-7;
/// Default top-Fock-level population above which a leakage warning attaches.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    /// End of integration, units of 1/ω1.
    pub t_final: f64,
    /// Strictly increasing observation times in [0, t_final].
    pub sample_times: Vec<f64>,
    pub method: Method,
    /// Step-size ceiling; segments between samples are subdivided evenly.
    pub max_dt: f64,
    pub norm_tolerance: f64,
    pub leak_threshold: f64,
}

impl EvolutionSpec {
    pub fn new(t_final: f64, method: Method) -> Self {
        Self {
            t_final,
            sample_times: Vec::new(),
            method,
            max_dt: DEFAULT_MAX_DT,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
            leak_threshold: DEFAULT_LEAK_THRESHOLD,
        }
    }

    /// Samples at 0, spacing, 2·spacing, … up to t_final.
    pub fn with_uniform_samples(t_final: f64, spacing: f64, method: Method) -> Self {
        let mut spec = Self::new(t_final, method);
        let mut samples = vec![0.0];
        let mut k = 1usize;
        loop {
            let t = k as f64 * spacing;
            if t > t_final * (1.0 + 1e-12) {
                break;
            }
            samples.push(t.min(t_final));
            k += 1;
        }
        spec.sample_times = samples;
        spec
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(DynamicsError::InvalidSpec(
                "t_final must be finite and non-negative",
            ));
        }
        if !self.max_dt.is_finite() || self.max_dt <= 0.0 {
            return Err(DynamicsError::InvalidSpec("max_dt must be positive"));
        }
        if !self.norm_tolerance.is_finite() || self.norm_tolerance <= 0.0 {
            return Err(DynamicsError::InvalidSpec(
                "norm tolerance must be positive",
            ));
        }
        let mut prev = -1.0;
        for &t in &self.sample_times {
            if t.is_nan() || t < 0.0 || t > self.t_final * (1.0 + 1e-12) {
                return Err(DynamicsError::InvalidSpec(
                    "sample times must lie in [0, t_final]",
                ));
            }
            if t <= prev {
                return Err(DynamicsError::InvalidSpec(
                    "sample times must be strictly increasing",
                ));
            }
            prev = t;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum DynamicsError {
    InvalidSpec(&'static str),
    DimensionMismatch { state: usize, operator: usize },
    UnnormalizedInitial { norm: f64 },
    SeriesDiverged { t: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::InvalidSpec(msg) => write!(f, "invalid evolution spec: {msg}"),
            DynamicsError::DimensionMismatch { state, operator } => {
                write!(
                    f,
                    "state dimension {state} does not match operator dimension {operator}"
                )
            }
            DynamicsError::UnnormalizedInitial { norm } => {
                write!(f, "initial state has norm {norm}, expected 1")
            }
            DynamicsError::SeriesDiverged { t } => {
                write!(f, "propagator series failed to converge at t = {t}")
            }
        }
    }
}

/// Where and how badly a trajectory lost unitarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryFailure {
    pub t: f64,
    pub norm_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectorySummary {
    pub method: Method,
    pub max_norm_deviation: f64,
    pub final_norm_deviation: f64,
    /// Peak population at the top retained Fock level, per mode.
    pub peak_top_level: [f64; SITES],
    pub leak_warning: bool,
    pub failure: Option<TrajectoryFailure>,
    pub steps_taken: usize,
}

impl TrajectorySummary {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Evolution result with per-sample state snapshots retained.
#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub summary: TrajectorySummary,
    pub samples: Vec<(f64, StateVector)>,
}

impl TrajectoryResult {
    /// Per-mode peak top-level population; `None` for failed trajectories.
    pub fn leakage_report(&self) -> Option<[f64; SITES]> {
        self.summary
            .succeeded()
            .then_some(self.summary.peak_top_level)
    }
}

/// Evolve and keep every sampled state.
pub fn evolve(
    space: &Space,
    hamiltonian: &HamiltonianModel,
    spec: &EvolutionSpec,
    initial: &StateVector,
) -> Result<TrajectoryResult, DynamicsError> {
    let mut samples = Vec::with_capacity(spec.sample_times.len());
    let summary = evolve_observed(space, hamiltonian, spec, initial, |t, state| {
        samples.push((t, state.clone()));
    })?;
    Ok(TrajectoryResult { summary, samples })
}

/// Evolve, streaming each sampled state to `on_sample` without retaining it.
pub fn evolve_observed<F>(
    space: &Space,
    hamiltonian: &HamiltonianModel,
    spec: &EvolutionSpec,
    initial: &StateVector,
    mut on_sample: F,
) -> Result<TrajectorySummary, DynamicsError>
where
    F: FnMut(f64, &StateVector),
{
    spec.validate()?;
    let dim = space.dim();
    if initial.dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            state: initial.dim(),
            operator: dim,
        });
    }
    if hamiltonian.dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            state: dim,
            operator: hamiltonian.dim(),
        });
    }
    let init_norm = initial.norm();
    if (init_norm - 1.0).abs() > 1e-6 {
        return Err(DynamicsError::UnnormalizedInitial { norm: init_norm });
    }

    // flat indices at the top retained Fock level, per mode
    let top_indices: [Vec<usize>; SITES] = {
        let mut lists: [Vec<usize>; SITES] = [Vec::new(), Vec::new(), Vec::new()];
        for (k, idx) in space.basis_iter() {
            for (mode, list) in lists.iter_mut().enumerate() {
                if idx.occupations[mode] == space.config().cutoffs[mode] {
                    list.push(k);
                }
            }
        }
        lists
    };

    let mut state = initial.clone();
    let mut stepper = Stepper::new(spec.method, dim, hamiltonian);
    let mut summary = TrajectorySummary {
        method: spec.method,
        max_norm_deviation: 0.0,
        final_norm_deviation: 0.0,
        peak_top_level: [0.0; SITES],
        leak_warning: false,
        failure: None,
        steps_taken: 0,
    };

    let observe = |t: f64, state: &StateVector, summary: &mut TrajectorySummary| -> bool {
        let deviation = (state.norm() - 1.0).abs();
        summary.max_norm_deviation = summary.max_norm_deviation.max(deviation);
        for (peak, indices) in summary.peak_top_level.iter_mut().zip(&top_indices) {
            let pop: f64 = indices
                .iter()
                .map(|&k| state.amplitudes()[k].norm_sqr())
                .sum();
            *peak = peak.max(pop);
        }
        if deviation > spec.norm_tolerance {
            summary.failure = Some(TrajectoryFailure {
                t,
                norm_deviation: deviation,
            });
            return false;
        }
        true
    };

    let mut prev_t = 0.0;
    let mut sample_iter = spec.sample_times.iter().copied().peekable();
    if let Some(&t0) = sample_iter.peek() {
        if t0 == 0.0 {
            sample_iter.next();
            if observe(0.0, &state, &mut summary) {
                on_sample(0.0, &state);
            }
        }
    }

    if summary.failure.is_none() {
        let checkpoints: Vec<(f64, bool)> = {
            let mut pts: Vec<(f64, bool)> = sample_iter.map(|t| (t, true)).collect();
            if pts
                .last()
                .map(|&(t, _)| t < spec.t_final)
                .unwrap_or(spec.t_final > 0.0)
            {
                pts.push((spec.t_final, false));
            }
            pts
        };
        'outer: for (target, is_sample) in checkpoints {
            let span = target - prev_t;
            let n_steps = (span / spec.max_dt).ceil().max(1.0) as usize;
            let h = span / n_steps as f64;
            for j in 0..n_steps {
                let t = prev_t + j as f64 * h;
                stepper.step(hamiltonian, t, h, &mut state)?;
                summary.steps_taken += 1;
            }
            prev_t = target;
            let ok = observe(target, &state, &mut summary);
            if is_sample && ok {
                on_sample(target, &state);
            }
            if !ok {
                break 'outer;
            }
        }
    }

    summary.final_norm_deviation = (state.norm() - 1.0).abs();
    summary.leak_warning = summary
        .peak_top_level
        .iter()
        .any(|&p| p > spec.leak_threshold);
    Ok(summary)
}

enum Stepper {
    Rk4 {
        k1: Vec<Complex64>,
        k2: Vec<Complex64>,
        k3: Vec<Complex64>,
        k4: Vec<Complex64>,
        tmp: Vec<Complex64>,
    },
    ExpMid {
        term: Vec<Complex64>,
        next: Vec<Complex64>,
        norm_bound: f64,
    },
}

impl Stepper {
    fn new(method: Method, dim: usize, hamiltonian: &HamiltonianModel) -> Self {
        match method {
            Method::Rk4 => Stepper::Rk4 {
                k1: vec![Complex64::ZERO; dim],
                k2: vec![Complex64::ZERO; dim],
                k3: vec![Complex64::ZERO; dim],
                k4: vec![Complex64::ZERO; dim],
                tmp: vec![Complex64::ZERO; dim],
            },
            Method::ExpMid => Stepper::ExpMid {
                term: vec![Complex64::ZERO; dim],
                next: vec![Complex64::ZERO; dim],
                norm_bound: hamiltonian.norm_bound(),
            },
        }
    }

    fn step(
        &mut self,
        hamiltonian: &HamiltonianModel,
        t: f64,
        h: f64,
        state: &mut StateVector,
    ) -> Result<(), DynamicsError> {
        match self {
            Stepper::Rk4 {
                k1,
                k2,
                k3,
                k4,
                tmp,
            } => {
                let y = state.amplitudes_mut();
                // k = −i H(t') y'
                hamiltonian.apply_into(t, y, k1);
                mul_neg_i(k1);
                assign_axpy(tmp, y, h / 2.0, k1);
                hamiltonian.apply_into(t + h / 2.0, tmp, k2);
                mul_neg_i(k2);
                assign_axpy(tmp, y, h / 2.0, k2);
                hamiltonian.apply_into(t + h / 2.0, tmp, k3);
                mul_neg_i(k3);
                assign_axpy(tmp, y, h, k3);
                hamiltonian.apply_into(t + h, tmp, k4);
                mul_neg_i(k4);
                let w = h / 6.0;
                for i in 0..y.len() {
                    y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                Ok(())
            }
            Stepper::ExpMid {
                term,
                next,
                norm_bound,
            } => {
                // ψ ← exp(−i h H(t + h/2)) ψ, Taylor series with substep
                // scaling keeping ‖h H‖ per application below 1/2.
                let t_mid = t + h / 2.0;
                let substeps = ((h.abs() * *norm_bound) / 0.5).ceil().max(1.0) as usize;
                let hs = h / substeps as f64;
                let y = state.amplitudes_mut();
                for _ in 0..substeps {
                    term.copy_from_slice(y);
                    let mut converged = false;
                    for order in 1..=48usize {
                        hamiltonian.apply_into(t_mid, term, next);
                        let scale = Complex64::new(0.0, -hs / order as f64);
                        for (dst, src) in term.iter_mut().zip(next.iter()) {
                            *dst = scale * *src;
                        }
                        let mut term_sq = 0.0;
                        for i in 0..y.len() {
                            y[i] += term[i];
                            term_sq += term[i].norm_sqr();
                        }
                        // ‖term‖ at double precision relative to a unit-norm state
                        if term_sq <= 1e-32 {
                            converged = true;
                            break;
                        }
                    }
                    if !converged {
                        return Err(DynamicsError::SeriesDiverged { t });
                    }
                }
                Ok(())
            }
        }
    }
}

fn mul_neg_i(v: &mut [Complex64]) {
    for z in v {
        *z = Complex64::new(z.im, -z.re);
    }
}

/// dst = base + c·k
fn assign_axpy(dst: &mut [Complex64], base: &[Complex64], c: f64, k: &[Complex64]) {
    for i in 0..dst.len() {
        dst[i] = base[i] + c * k[i];
    }
}
