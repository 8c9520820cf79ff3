//! Moments, covariances, analytic covariance rates, and the genuine-tripartite
//! entanglement witnesses, all evaluated from a state vector by sparse
//! operator application (no dense intermediates).
//!
//! Cross-subsystem covariances need no operator-ordering choice since the
//! factors commute; same-site variances use the plain squared operator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::fock::{equal_pair_parity, Space, StateVector, SITES};
use crate::operators::{
    ladder, pauli, quadratures, triple_mode_lowering, triple_qubit_lowering, HamiltonianModel,
    Ladder, Pauli,
};
use crate::sparse::SparseOperator;

/// Site pairs in reporting order: (1,2), (1,3), (2,3) in 1-based labels.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Complement of site i: the pair (j, k) with j < k and i ∉ {j, k}.
pub const COMPLEMENT: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

const MOMENT_IMAG_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-6;
const OCCUPATION_FLOOR: f64 = -1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableError {
    Unnormalized { norm: f64 },
    NonHermitianMoment { name: String, imag: f64 },
    NegativeOccupation { name: String, value: f64 },
}

impl fmt::Display for ObservableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableError::Unnormalized { norm } => {
                write!(f, "state is not normalized: norm = {norm}")
            }
            ObservableError::NonHermitianMoment { name, imag } => {
                write!(
                    f,
                    "moment {name} of a Hermitian observable has imaginary part {imag}"
                )
            }
            ObservableError::NegativeOccupation { name, value } => {
                write!(
                    f,
                    "occupation moment {name} is negative beyond tolerance: {value}"
                )
            }
        }
    }
}

/// First and second moments entering the witnesses and the zero-moment suite.
#[derive(Clone, Debug)]
pub struct MomentSet {
    /// ⟨a_i⟩
    pub mode_lower: [Complex64; SITES],
    /// ⟨σ+_i⟩
    pub qubit_raise: [Complex64; SITES],
    /// ⟨σ−_i⟩
    pub qubit_lower: [Complex64; SITES],
    /// ⟨x_i⟩
    pub quad_x: [Complex64; SITES],
    /// ⟨p_i⟩
    pub quad_p: [Complex64; SITES],
    /// ⟨S_x^i⟩, ⟨S_y^i⟩, ⟨S_z^i⟩
    pub spin_x: [Complex64; SITES],
    pub spin_y: [Complex64; SITES],
    pub spin_z: [Complex64; SITES],
    /// ⟨a†_i a_i⟩
    pub occupation: [Complex64; SITES],
    /// ⟨a†_j a_j a†_k a_k⟩ with (j, k) the complement of i
    pub occupation_pair: [Complex64; SITES],
    /// ⟨a_1 a_2 a_3⟩
    pub triple_mode: Complex64,
    /// ⟨σ+_i σ−_i⟩
    pub excited: [Complex64; SITES],
    /// ⟨σ+_j σ−_j σ+_k σ−_k⟩ with (j, k) the complement of i
    pub excited_pair: [Complex64; SITES],
    /// ⟨σ−_1 σ−_2 σ−_3⟩
    pub triple_qubit: Complex64,
}

/// Inputs to one witness evaluation: the triple coherence, the single-site
/// occupations, and the complement-pair occupations.
#[derive(Clone, Copy, Debug)]
pub struct WitnessMoments {
    pub triple: Complex64,
    pub single: [f64; SITES],
    pub pair: [f64; SITES],
}

impl MomentSet {
    pub fn cv(&self) -> WitnessMoments {
        WitnessMoments {
            triple: self.triple_mode,
            single: [
                self.occupation[0].re,
                self.occupation[1].re,
                self.occupation[2].re,
            ],
            pair: [
                self.occupation_pair[0].re,
                self.occupation_pair[1].re,
                self.occupation_pair[2].re,
            ],
        }
    }

    pub fn dv(&self) -> WitnessMoments {
        WitnessMoments {
            triple: self.triple_qubit,
            single: [self.excited[0].re, self.excited[1].re, self.excited[2].re],
            pair: [
                self.excited_pair[0].re,
                self.excited_pair[1].re,
                self.excited_pair[2].re,
            ],
        }
    }
}

/// The three witness values; positive means genuine tripartite entanglement
/// detected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessValues {
    pub g_cv: f64,
    pub g_cv_prime: f64,
    pub g_dv: f64,
}

/// |triple| − max_i √(single_i · pair_i) and the older sum-over-splittings
/// form. Splittings are scanned in the fixed order 1|23, 2|13, 3|12.
pub fn witness_value(m: &WitnessMoments) -> Result<(f64, f64), ObservableError> {
    let mut max_term = 0.0_f64;
    let mut sum = 0.0_f64;
    for i in 0..SITES {
        if m.single[i] < OCCUPATION_FLOOR {
            return Err(ObservableError::NegativeOccupation {
                name: format!("single[{i}]"),
                value: m.single[i],
            });
        }
        if m.pair[i] < OCCUPATION_FLOOR {
            return Err(ObservableError::NegativeOccupation {
                name: format!("pair[{i}]"),
                value: m.pair[i],
            });
        }
        let term = (m.single[i].max(0.0) * m.pair[i].max(0.0)).sqrt();
        sum += term;
        if term > max_term {
            max_term = term;
        }
    }
    let coherence = m.triple.norm();
    Ok((coherence - max_term, coherence - sum))
}

/// Mode witness: (G_CV, G′_CV).
pub fn witness_cv(m: &WitnessMoments) -> Result<(f64, f64), ObservableError> {
    witness_value(m)
}

/// Qubit witness G_DV (max form only, as defined).
pub fn witness_dv(m: &WitnessMoments) -> Result<f64, ObservableError> {
    witness_value(m).map(|(g, _)| g)
}

/// Covariances Δ²O_iO_j = ⟨O_iO_j⟩ − ⟨O_i⟩⟨O_j⟩ for one family of
/// single-site observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCov {
    /// Cross covariances for [`PAIRS`].
    pub cross: [f64; 3],
    /// Same-site variances.
    pub var: [f64; SITES],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceSet {
    pub xx: PairCov,
    pub pp: PairCov,
    pub spin_x: PairCov,
    pub spin_y: PairCov,
    pub spin_z: PairCov,
}

/// Time-stamped observable bundle for one trajectory sample.
#[derive(Clone, Debug)]
pub struct ObservableRecord {
    pub t: f64,
    pub norm: f64,
    /// ⟨P⟩ for the pair-parity projector.
    pub p_expect: f64,
    /// Probability outside the equal-parity subspace.
    pub off_subspace: f64,
    /// Top-Fock-level population per mode at this sample.
    pub leak: [f64; SITES],
    pub witnesses: WitnessValues,
    pub covariances: CovarianceSet,
}

/// Exact commutator rates next to the stated closed-form rate expressions,
/// per pair.
///
/// The exact form is ⟨\[O_iO_j,H\]⟩ − ⟨O_i⟩⟨\[O_j,H\]⟩ − ⟨O_j⟩⟨\[O_i,H\]⟩ over iħ
/// and is the authoritative value; the stated expressions are evaluated
/// verbatim (m_i = 1) and reported for comparison, never substituted. Two
/// variants of the stated S_y rate circulate, one with qubit frequency terms
/// alone and one carrying additional −2g qubit-mode coupling terms; both are
/// recorded.
#[derive(Clone, Debug)]
pub struct RateAudit {
    pub exact_xx: [f64; 3],
    pub exact_pp: [f64; 3],
    pub exact_sxsx: [f64; 3],
    pub exact_sysy: [f64; 3],
    pub exact_szsz: [f64; 3],
    pub stated_xx: [f64; 3],
    /// Complex: the stated Rabi contribution carries an explicit iħ factor,
    /// recorded as-is.
    pub stated_pp: [Complex64; 3],
    pub stated_sxsx: [f64; 3],
    /// S_y rate variant with qubit frequency terms only.
    pub stated_sysy_freq_only: [f64; 3],
    /// S_y rate variant carrying the additional −2g coupling terms.
    pub stated_sysy_with_coupling: [f64; 3],
    pub stated_szsz: [f64; 3],
}

/// Magnitudes of the expectation values that vanish identically in the
/// dynamical subspace.
#[derive(Clone, Debug)]
pub struct ZeroMomentSuite {
    pub entries: Vec<(String, f64)>,
}

impl ZeroMomentSuite {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

/// Prebuilt sparse operators for observable evaluation on one space.
pub struct ObservableSet {
    dim: usize,
    config: crate::fock::SpaceConfig,
    lower: [SparseOperator; SITES],
    raise: [SparseOperator; SITES],
    sigma_plus: [SparseOperator; SITES],
    sigma_minus: [SparseOperator; SITES],
    quad_x: [SparseOperator; SITES],
    quad_p: [SparseOperator; SITES],
    pauli_x: [SparseOperator; SITES],
    pauli_y: [SparseOperator; SITES],
    pauli_z: [SparseOperator; SITES],
    triple_mode: SparseOperator,
    triple_qubit: SparseOperator,
    number_diag: [Vec<f64>; SITES],
    excited_diag: [Vec<f64>; SITES],
    parity_mask: Vec<bool>,
    top_indices: [Vec<usize>; SITES],
}

fn build_per_site<F>(mut f: F) -> [SparseOperator; SITES]
where
    F: FnMut(usize) -> SparseOperator,
{
    [f(0), f(1), f(2)]
}

impl ObservableSet {
    pub fn new(space: &Space) -> Self {
        let lower = build_per_site(|i| ladder(space, i, Ladder::Lower).unwrap());
        let raise = build_per_site(|i| ladder(space, i, Ladder::Raise).unwrap());
        let sigma_plus = build_per_site(|i| pauli(space, i, Pauli::Plus).unwrap());
        let sigma_minus = build_per_site(|i| pauli(space, i, Pauli::Minus).unwrap());
        let quads = build_per_site(|i| {
            let (x, _) = quadratures(space, i).unwrap();
            x
        });
        let quad_p = build_per_site(|i| {
            let (_, p) = quadratures(space, i).unwrap();
            p
        });
        let pauli_x = build_per_site(|i| pauli(space, i, Pauli::X).unwrap());
        let pauli_y = build_per_site(|i| pauli(space, i, Pauli::Y).unwrap());
        let pauli_z = build_per_site(|i| pauli(space, i, Pauli::Z).unwrap());
        let mut number_diag: [Vec<f64>; SITES] = [Vec::new(), Vec::new(), Vec::new()];
        let mut excited_diag: [Vec<f64>; SITES] = [Vec::new(), Vec::new(), Vec::new()];
        let mut parity_mask = Vec::with_capacity(space.dim());
        let mut top_indices: [Vec<usize>; SITES] = [Vec::new(), Vec::new(), Vec::new()];
        for (k, idx) in space.basis_iter() {
            for i in 0..SITES {
                number_diag[i].push(idx.occupations[i] as f64);
                excited_diag[i].push(idx.qubit_levels[i] as f64);
                if idx.occupations[i] == space.config().cutoffs[i] {
                    top_indices[i].push(k);
                }
            }
            parity_mask.push(equal_pair_parity(&idx));
        }
        Self {
            dim: space.dim(),
            config: space.config().clone(),
            lower,
            raise,
            sigma_plus,
            sigma_minus,
            quad_x: quads,
            quad_p,
            pauli_x,
            pauli_y,
            pauli_z,
            triple_mode: triple_mode_lowering(space),
            triple_qubit: triple_qubit_lowering(space),
            number_diag,
            excited_diag,
            parity_mask,
            top_indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_normalized(&self, state: &StateVector) -> Result<(), ObservableError> {
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ObservableError::Unnormalized { norm });
        }
        Ok(())
    }

    /// ⟨P⟩ for the pair-parity projector.
    pub fn parity_expectation(&self, state: &StateVector) -> f64 {
        state
            .amplitudes()
            .iter()
            .zip(&self.parity_mask)
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }

    /// Total probability on basis states with unequal pair parities.
    pub fn off_subspace_probability(&self, state: &StateVector) -> f64 {
        state
            .amplitudes()
            .iter()
            .zip(&self.parity_mask)
            .filter(|(_, &m)| !m)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }

    /// Top-Fock-level population per mode.
    pub fn top_level_population(&self, state: &StateVector) -> [f64; SITES] {
        let mut pops = [0.0; SITES];
        for (pop, indices) in pops.iter_mut().zip(&self.top_indices) {
            *pop = indices
                .iter()
                .map(|&k| state.amplitudes()[k].norm_sqr())
                .sum();
        }
        pops
    }

    fn diag_expect(diag: &[f64], state: &StateVector) -> f64 {
        diag.iter()
            .zip(state.amplitudes())
            .map(|(d, a)| d * a.norm_sqr())
            .sum()
    }

    fn diag_pair_expect(d1: &[f64], d2: &[f64], state: &StateVector) -> f64 {
        d1.iter()
            .zip(d2)
            .zip(state.amplitudes())
            .map(|((a, b), amp)| a * b * amp.norm_sqr())
            .sum()
    }

    pub fn moments(&self, state: &StateVector) -> Result<MomentSet, ObservableError> {
        self.check_normalized(state)?;
        let expect = |op: &SparseOperator| state.inner(&op.apply(state));
        let hermitian_expect =
            |op: &SparseOperator, name: &str| -> Result<Complex64, ObservableError> {
                let v = expect(op);
                if v.im.abs() > MOMENT_IMAG_TOL {
                    return Err(ObservableError::NonHermitianMoment {
                        name: String::from(name),
                        imag: v.im,
                    });
                }
                Ok(v)
            };

        let mut m = MomentSet {
            mode_lower: [Complex64::ZERO; SITES],
            qubit_raise: [Complex64::ZERO; SITES],
            qubit_lower: [Complex64::ZERO; SITES],
            quad_x: [Complex64::ZERO; SITES],
            quad_p: [Complex64::ZERO; SITES],
            spin_x: [Complex64::ZERO; SITES],
            spin_y: [Complex64::ZERO; SITES],
            spin_z: [Complex64::ZERO; SITES],
            occupation: [Complex64::ZERO; SITES],
            occupation_pair: [Complex64::ZERO; SITES],
            triple_mode: expect(&self.triple_mode),
            excited: [Complex64::ZERO; SITES],
            excited_pair: [Complex64::ZERO; SITES],
            triple_qubit: expect(&self.triple_qubit),
        };
        for i in 0..SITES {
            m.mode_lower[i] = expect(&self.lower[i]);
            m.qubit_raise[i] = expect(&self.sigma_plus[i]);
            m.qubit_lower[i] = expect(&self.sigma_minus[i]);
            m.quad_x[i] = hermitian_expect(&self.quad_x[i], "x")?;
            m.quad_p[i] = hermitian_expect(&self.quad_p[i], "p")?;
            m.spin_x[i] = hermitian_expect(&self.pauli_x[i], "S_x")? / 2.0;
            m.spin_y[i] = hermitian_expect(&self.pauli_y[i], "S_y")? / 2.0;
            m.spin_z[i] = hermitian_expect(&self.pauli_z[i], "S_z")? / 2.0;
            m.occupation[i] = Complex64::new(Self::diag_expect(&self.number_diag[i], state), 0.0);
            m.excited[i] = Complex64::new(Self::diag_expect(&self.excited_diag[i], state), 0.0);
            let (j, k) = COMPLEMENT[i];
            m.occupation_pair[i] = Complex64::new(
                Self::diag_pair_expect(&self.number_diag[j], &self.number_diag[k], state),
                0.0,
            );
            m.excited_pair[i] = Complex64::new(
                Self::diag_pair_expect(&self.excited_diag[j], &self.excited_diag[k], state),
                0.0,
            );
        }
        Ok(m)
    }

    /// Witness triple (G_CV, G′_CV, G_DV) from precomputed moments.
    pub fn witnesses(&self, m: &MomentSet) -> Result<WitnessValues, ObservableError> {
        let (g_cv, g_cv_prime) = witness_cv(&m.cv())?;
        let g_dv = witness_dv(&m.dv())?;
        Ok(WitnessValues {
            g_cv,
            g_cv_prime,
            g_dv,
        })
    }

    pub fn covariances(&self, state: &StateVector) -> Result<CovarianceSet, ObservableError> {
        self.check_normalized(state)?;
        let xx = self.family_cov(state, &self.quad_x, 1.0, "x")?;
        let pp = self.family_cov(state, &self.quad_p, 1.0, "p")?;
        let sx = self.family_cov(state, &self.pauli_x, 0.5, "S_x")?;
        let sy = self.family_cov(state, &self.pauli_y, 0.5, "S_y")?;
        let sz = self.family_cov(state, &self.pauli_z, 0.5, "S_z")?;
        Ok(CovarianceSet {
            xx,
            pp,
            spin_x: sx,
            spin_y: sy,
            spin_z: sz,
        })
    }

    /// Covariances of one family O_i = scale·B_i from applied vectors B_iψ.
    fn family_cov(
        &self,
        state: &StateVector,
        ops: &[SparseOperator; SITES],
        scale: f64,
        name: &str,
    ) -> Result<PairCov, ObservableError> {
        let applied: [StateVector; SITES] = [
            ops[0].apply(state),
            ops[1].apply(state),
            ops[2].apply(state),
        ];
        let mut mean = [0.0; SITES];
        let mut var = [0.0; SITES];
        for i in 0..SITES {
            let m = state.inner(&applied[i]);
            if m.im.abs() > MOMENT_IMAG_TOL {
                return Err(ObservableError::NonHermitianMoment {
                    name: String::from(name),
                    imag: m.im,
                });
            }
            mean[i] = m.re * scale;
            var[i] = applied[i].norm_sqr() * scale * scale - mean[i] * mean[i];
        }
        let mut cross = [0.0; 3];
        for (idx, &(i, j)) in PAIRS.iter().enumerate() {
            let second = applied[i].inner(&applied[j]);
            if second.im.abs() > MOMENT_IMAG_TOL {
                return Err(ObservableError::NonHermitianMoment {
                    name: format!("{name}{}{}", i + 1, j + 1),
                    imag: second.im,
                });
            }
            cross[idx] = second.re * scale * scale - mean[i] * mean[j];
        }
        Ok(PairCov { cross, var })
    }

    /// Full per-sample record: witnesses, covariances, parity, leakage.
    pub fn record(&self, t: f64, state: &StateVector) -> Result<ObservableRecord, ObservableError> {
        let m = self.moments(state)?;
        let witnesses = self.witnesses(&m)?;
        let covariances = self.covariances(state)?;
        Ok(ObservableRecord {
            t,
            norm: state.norm(),
            p_expect: self.parity_expectation(state),
            off_subspace: self.off_subspace_probability(state),
            leak: self.top_level_population(state),
            witnesses,
            covariances,
        })
    }

    /// All expectation values that vanish in the dynamical subspace.
    pub fn zero_moment_suite(
        &self,
        state: &StateVector,
    ) -> Result<ZeroMomentSuite, ObservableError> {
        self.check_normalized(state)?;
        let mut entries = Vec::new();
        let a: Vec<StateVector> = self.lower.iter().map(|op| op.apply(state)).collect();
        let adag: Vec<StateVector> = self.raise.iter().map(|op| op.apply(state)).collect();
        let sp: Vec<StateVector> = self.sigma_plus.iter().map(|op| op.apply(state)).collect();
        let sm: Vec<StateVector> = self.sigma_minus.iter().map(|op| op.apply(state)).collect();
        for i in 0..SITES {
            entries.push((format!("a{}", i + 1), state.inner(&a[i]).norm()));
            entries.push((format!("sp{}", i + 1), state.inner(&sp[i]).norm()));
            entries.push((format!("sm{}", i + 1), state.inner(&sm[i]).norm()));
        }
        for i in 0..SITES {
            for j in 0..SITES {
                if i == j {
                    continue;
                }
                let l = (i + 1, j + 1);
                if i < j {
                    // symmetric in (i, j); record once
                    entries.push((format!("a{}a{}", l.0, l.1), adag[i].inner(&a[j]).norm()));
                }
                entries.push((format!("adag{}a{}", l.0, l.1), a[i].inner(&a[j]).norm()));
                if i < j {
                    entries.push((format!("sp{}sp{}", l.0, l.1), sm[i].inner(&sp[j]).norm()));
                    entries.push((format!("sm{}sm{}", l.0, l.1), sp[i].inner(&sm[j]).norm()));
                }
                entries.push((format!("sp{}sm{}", l.0, l.1), sm[i].inner(&sm[j]).norm()));
                entries.push((format!("a{}sp{}", l.0, l.1), adag[i].inner(&sp[j]).norm()));
                entries.push((format!("a{}sm{}", l.0, l.1), adag[i].inner(&sm[j]).norm()));
                entries.push((format!("adag{}sp{}", l.0, l.1), a[i].inner(&sp[j]).norm()));
                entries.push((format!("adag{}sm{}", l.0, l.1), a[i].inner(&sm[j]).norm()));
                // ⟨a†_i a_i a_j⟩ via the diagonal number operator
                let mut weighted = state.clone();
                for (amp, d) in weighted
                    .amplitudes_mut()
                    .iter_mut()
                    .zip(&self.number_diag[i])
                {
                    *amp *= *d;
                }
                entries.push((format!("n{}a{}", l.0, l.1), weighted.inner(&a[j]).norm()));
            }
        }
        Ok(ZeroMomentSuite { entries })
    }

    /// Exact commutator covariance rates next to the stated closed forms.
    ///
    /// `t` selects the drive phase entering H(t).
    pub fn covariance_rates(
        &self,
        state: &StateVector,
        hamiltonian: &HamiltonianModel,
        t: f64,
    ) -> Result<RateAudit, ObservableError> {
        self.check_normalized(state)?;
        let mut hpsi = StateVector::zero(self.dim);
        hamiltonian.apply_into(t, state.amplitudes(), hpsi.amplitudes_mut());

        // exact rates: ∂tΔ²O_iO_j = 2Im⟨ψ|O_iO_j|Hψ⟩ − 2⟨O_i⟩Im⟨ψ|O_j|Hψ⟩
        //                                            − 2⟨O_j⟩Im⟨ψ|O_i|Hψ⟩
        let exact_family = |ops: &[SparseOperator; SITES], scale: f64| -> [f64; 3] {
            let u: [StateVector; SITES] = [
                ops[0].apply(state),
                ops[1].apply(state),
                ops[2].apply(state),
            ];
            let z: [StateVector; SITES] = [
                ops[0].apply(&hpsi),
                ops[1].apply(&hpsi),
                ops[2].apply(&hpsi),
            ];
            let mut mean = [0.0; SITES];
            let mut dmean = [0.0; SITES];
            for i in 0..SITES {
                mean[i] = state.inner(&u[i]).re;
                dmean[i] = state.inner(&z[i]).im;
            }
            let mut rates = [0.0; 3];
            for (idx, &(i, j)) in PAIRS.iter().enumerate() {
                let second = u[i].inner(&z[j]).im;
                rates[idx] =
                    2.0 * scale * scale * (second - mean[i] * dmean[j] - mean[j] * dmean[i]);
            }
            rates
        };
        let exact_xx = exact_family(&self.quad_x, 1.0);
        let exact_pp = exact_family(&self.quad_p, 1.0);
        let exact_sxsx = exact_family(&self.pauli_x, 0.5);
        let exact_sysy = exact_family(&self.pauli_y, 0.5);
        let exact_szsz = exact_family(&self.pauli_z, 0.5);

        // applied vectors for the stated right-hand sides
        let ux: Vec<StateVector> = self.quad_x.iter().map(|op| op.apply(state)).collect();
        let up: Vec<StateVector> = self.quad_p.iter().map(|op| op.apply(state)).collect();
        let usx: Vec<StateVector> = self.pauli_x.iter().map(|op| op.apply(state)).collect();
        let usy: Vec<StateVector> = self.pauli_y.iter().map(|op| op.apply(state)).collect();
        let usz: Vec<StateVector> = self.pauli_z.iter().map(|op| op.apply(state)).collect();
        let mean_x: Vec<f64> = ux.iter().map(|u| state.inner(u).re).collect();
        let mean_p: Vec<f64> = up.iter().map(|u| state.inner(u).re).collect();
        let mean_sx: Vec<f64> = usx.iter().map(|u| state.inner(u).re).collect();

        let cfg_g = self.config.rabi_couplings;
        let omega = self.config.mode_freqs;
        let qubit_freqs = self.config.qubit_freqs;
        let envelope = hamiltonian.envelope(t);

        let mut stated_xx = [0.0; 3];
        let mut stated_pp = [Complex64::ZERO; 3];
        let mut stated_sxsx = [0.0; 3];
        let mut stated_sysy_freq_only = [0.0; 3];
        let mut stated_sysy_with_coupling = [0.0; 3];
        let mut stated_szsz = [0.0; 3];

        for (idx, &(i, j)) in PAIRS.iter().enumerate() {
            let k = 3 - i - j;
            // ∂tΔ²x_ix_j = ⟨x_ip_j + x_jp_i⟩ − ⟨x_i⟩⟨p_j⟩ − ⟨p_i⟩⟨x_j⟩
            stated_xx[idx] = ux[i].inner(&up[j]).re + ux[j].inner(&up[i]).re
                - mean_x[i] * mean_p[j]
                - mean_p[i] * mean_x[j];

            // momentum rate, kept complex because the stated Rabi term has
            // an explicit −iħ in front
            let pi_xj = up[i].inner(&ux[j]);
            let xi_pj = ux[i].inner(&up[j]);
            let sxj_pi = usx[j].inner(&up[i]);
            let sxi_pj = usx[i].inner(&up[j]);
            let xk = &ux[k];
            let pi_xi_xk = up[i].inner(&self.quad_x[i].apply(xk));
            let xj_pj_xk = ux[j].inner(&self.quad_p[j].apply(xk));
            let xj_xk = ux[j].inner(&ux[k]);
            let xi_xk = ux[i].inner(&ux[k]);
            let bracket_i =
                omega[i] * omega[i] * mean_x[i] + cfg_g[i] * mean_sx[i] + envelope * xi_xk;
            let bracket_j =
                omega[j] * omega[j] * mean_x[j] + cfg_g[j] * mean_sx[j] + envelope * xj_xk;
            stated_pp[idx] = -(omega[j] * omega[j] * pi_xj + omega[i] * omega[i] * xi_pj)
                - Complex64::new(0.0, 1.0) * (cfg_g[j] * sxj_pi + cfg_g[i] * sxi_pj)
                - envelope * (pi_xi_xk + xj_pj_xk)
                + bracket_i * mean_p[j]
                + bracket_j * mean_p[i];

            // stated spin rates, in terms of bare Pauli products
            let sx_i_sy_j = usx[i].inner(&usy[j]).re;
            let sy_i_sx_j = usy[i].inner(&usx[j]).re;
            stated_sxsx[idx] = qubit_freqs[i] * sx_i_sy_j + qubit_freqs[j] * sy_i_sx_j;
            stated_sysy_freq_only[idx] = qubit_freqs[j] * sy_i_sx_j + qubit_freqs[i] * sx_i_sy_j;
            let xj_syi_szj = ux[j].inner(&self.pauli_y[i].apply(&usz[j])).re;
            let xi_szi_syj = ux[i].inner(&self.pauli_z[i].apply(&usy[j])).re;
            stated_sysy_with_coupling[idx] = stated_sysy_freq_only[idx]
                - 2.0 * cfg_g[j] * xj_syi_szj
                - 2.0 * cfg_g[i] * xi_szi_syj;

            let szi_xj_syj = usz[i].inner(&self.quad_x[j].apply(&usy[j])).re;
            let xi_syi_szj = ux[i].inner(&self.pauli_y[i].apply(&usz[j])).re;
            stated_szsz[idx] = cfg_g[j] / 2.0 * szi_xj_syj + cfg_g[i] / 2.0 * xi_syi_szj;
        }

        Ok(RateAudit {
            exact_xx,
            exact_pp,
            exact_sxsx,
            exact_sysy,
            exact_szsz,
            stated_xx,
            stated_pp,
            stated_sxsx,
            stated_sysy_freq_only,
            stated_sysy_with_coupling,
            stated_szsz,
        })
    }
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use crate::fock::{BasisIndex, SpaceConfig};

    fn space(cutoff: usize) -> Space {
        Space::new(SpaceConfig::default().with_cutoff(cutoff)).unwrap()
    }

    fn put(space: &Space, state: &mut StateVector, occ: [usize; 3], q: [u8; 3], amp: f64) {
        let k = space.flat(&BasisIndex::new(occ, q));
        state.amplitudes_mut()[k] = Complex64::new(amp, 0.0);
    }

    /// √0.9|000⟩ + √0.1|111⟩ on the modes, qubits in |ggg⟩.
    fn two_term_state(space: &Space) -> StateVector {
        let mut v = StateVector::zero(space.dim());
        put(space, &mut v, [0, 0, 0], [0, 0, 0], 0.9_f64.sqrt());
        put(space, &mut v, [1, 1, 1], [0, 0, 0], 0.1_f64.sqrt());
        v
    }

    #[test]
    fn vacuum_moments_vanish() {
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let m = obs.moments(&s.vacuum()).unwrap();
        for i in 0..SITES {
            assert_eq!(m.mode_lower[i], Complex64::ZERO);
            assert_eq!(m.occupation[i], Complex64::ZERO);
            assert_eq!(m.excited[i], Complex64::ZERO);
            assert_eq!(m.spin_z[i], Complex64::new(-0.5, 0.0));
        }
        assert_eq!(m.triple_mode, Complex64::ZERO);
        assert_eq!(m.triple_qubit, Complex64::ZERO);
        let w = obs.witnesses(&m).unwrap();
        assert_eq!(w.g_cv, 0.0);
        assert_eq!(w.g_dv, 0.0);
    }

    #[test]
    fn two_term_superposition_oracle() {
        // oracle: ⟨a1a2a3⟩ = √0.9·√0.1·1 = 0.3, ⟨n_i⟩ = 0.1, ⟨n_jn_k⟩ = 0.1,
        // so G_CV = 0.3 − √(0.1·0.1) = 0.2
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let v = two_term_state(&s);
        let m = obs.moments(&v).unwrap();
        assert!((m.triple_mode.re - 0.3).abs() < 1e-14);
        for i in 0..SITES {
            assert!((m.occupation[i].re - 0.1).abs() < 1e-14);
            assert!((m.occupation_pair[i].re - 0.1).abs() < 1e-14);
        }
        let w = obs.witnesses(&m).unwrap();
        assert!((w.g_cv - 0.2).abs() < 1e-14);
        // sum form subtracts all three identical terms
        assert!((w.g_cv_prime - 0.0).abs() < 1e-14);
        assert!(w.g_cv >= w.g_cv_prime);
    }

    #[test]
    fn fock_triple_gives_negative_witness() {
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let mut v = StateVector::zero(s.dim());
        put(&s, &mut v, [1, 1, 1], [0, 0, 0], 1.0);
        let m = obs.moments(&v).unwrap();
        let w = obs.witnesses(&m).unwrap();
        assert!((w.g_cv - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn vacuum_covariances_match_convention() {
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let c = obs.covariances(&s.vacuum()).unwrap();
        for idx in 0..3 {
            assert!(c.xx.cross[idx].abs() < 1e-15);
            assert!(c.pp.cross[idx].abs() < 1e-15);
        }
        for i in 0..SITES {
            assert!((c.xx.var[i] - 0.5).abs() < 1e-15);
            assert!((c.pp.var[i] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn ghz_spin_covariances() {
        // (|ggg⟩ + |eee⟩)/√2 with modes in vacuum
        let s = space(1);
        let obs = ObservableSet::new(&s);
        let mut v = StateVector::zero(s.dim());
        let a = 0.5_f64.sqrt();
        put(&s, &mut v, [0, 0, 0], [0, 0, 0], a);
        put(&s, &mut v, [0, 0, 0], [1, 1, 1], a);
        let c = obs.covariances(&v).unwrap();
        for idx in 0..3 {
            assert!((c.spin_z.cross[idx] - 0.25).abs() < 1e-15);
            assert!(c.spin_x.cross[idx].abs() < 1e-15);
            assert!(c.spin_y.cross[idx].abs() < 1e-15);
        }
        // G_DV(GHZ) = 1/2 − √(1/2 · 1/2) = 0
        let m = obs.moments(&v).unwrap();
        assert!((m.triple_qubit.norm() - 0.5).abs() < 1e-15);
        let w = obs.witnesses(&m).unwrap();
        assert!(w.g_dv.abs() < 1e-15);
    }

    #[test]
    fn w_state_witness_is_zero() {
        // (|egg⟩ + |geg⟩ + |gge⟩)/√3, modes in vacuum
        let s = space(1);
        let obs = ObservableSet::new(&s);
        let mut v = StateVector::zero(s.dim());
        let a = (1.0_f64 / 3.0).sqrt();
        put(&s, &mut v, [0, 0, 0], [1, 0, 0], a);
        put(&s, &mut v, [0, 0, 0], [0, 1, 0], a);
        put(&s, &mut v, [0, 0, 0], [0, 0, 1], a);
        let m = obs.moments(&v).unwrap();
        assert_eq!(m.triple_qubit, Complex64::ZERO);
        for i in 0..SITES {
            assert!((m.excited[i].re - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(m.excited_pair[i], Complex64::ZERO);
        }
        let w = obs.witnesses(&m).unwrap();
        assert_eq!(w.g_dv, 0.0);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let s = space(1);
        let obs = ObservableSet::new(&s);
        let mut v = s.vacuum();
        v.scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            obs.moments(&v),
            Err(ObservableError::Unnormalized { .. })
        ));
    }

    #[test]
    fn vacuum_rates_vanish() {
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let h = HamiltonianModel::build(&s);
        let audit = obs.covariance_rates(&s.vacuum(), &h, 0.0).unwrap();
        for idx in 0..3 {
            assert!(audit.exact_xx[idx].abs() < 1e-14);
            assert!(audit.exact_pp[idx].abs() < 1e-14);
            assert!(audit.exact_sxsx[idx].abs() < 1e-14);
            assert!(audit.exact_sysy[idx].abs() < 1e-14);
            assert!(audit.exact_szsz[idx].abs() < 1e-14);
            // the product state also zeroes the stated S_z expression
            assert!(audit.stated_szsz[idx].abs() < 1e-14);
        }
    }

    #[test]
    fn zero_moment_suite_vanishes_on_parity_eigenstate() {
        let s = space(2);
        let obs = ObservableSet::new(&s);
        let v = two_term_state(&s);
        let suite = obs.zero_moment_suite(&v).unwrap();
        assert!(suite.max_abs() < 1e-15, "max {}", suite.max_abs());
        // sanity: the suite actually inspected a few dozen moments
        assert!(suite.entries.len() > 30);
    }
}
