//! Sparse operator constructions: ladder operators, quadratures, Pauli
//! operators, the three pieces of the driven Hamiltonian, and the conserved
//! pair-parity projector.
//!
//! All operators act on the full composite basis of a [`Space`]; single-site
//! operators are the identity on every other tensor factor. Creation above
//! the cutoff is truncated hard: a†|N_i⟩ = 0.

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::fock::{equal_pair_parity, BasisIndex, Space, SITES};
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorError {
    InvalidSite { site: usize },
    DimensionMismatch { left: usize, right: usize },
}

impl fmt::Display for OperatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorError::InvalidSite { site } => {
                write!(f, "site index {site} out of range (expected 0..{SITES})")
            }
            OperatorError::DimensionMismatch { left, right } => {
                write!(f, "operator dimensions differ: {left} vs {right}")
            }
        }
    }
}

fn check_site(site: usize) -> Result<(), OperatorError> {
    if site < SITES {
        Ok(())
    } else {
        Err(OperatorError::InvalidSite { site })
    }
}

/// Creation or annihilation operator on one mode.
pub fn ladder(space: &Space, mode: usize, kind: Ladder) -> Result<SparseOperator, OperatorError> {
    check_site(mode)?;
    let cutoff = space.config().cutoffs[mode];
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        let n = idx.occupations[mode];
        match kind {
            Ladder::Lower if n >= 1 => {
                let mut to = idx;
                to.occupations[mode] = n - 1;
                triplets.push((space.flat(&to), k, Complex64::new((n as f64).sqrt(), 0.0)));
            }
            Ladder::Raise if n < cutoff => {
                let mut to = idx;
                to.occupations[mode] = n + 1;
                triplets.push((
                    space.flat(&to),
                    k,
                    Complex64::new(((n + 1) as f64).sqrt(), 0.0),
                ));
            }
            _ => {}
        }
    }
    Ok(SparseOperator::from_triplets(space.dim(), triplets))
}

/// Photon number operator a†_i a_i (diagonal).
pub fn number_operator(space: &Space, mode: usize) -> Result<SparseOperator, OperatorError> {
    check_site(mode)?;
    let diag: Vec<Complex64> = space
        .basis_iter()
        .map(|(_, idx)| Complex64::new(idx.occupations[mode] as f64, 0.0))
        .collect();
    Ok(SparseOperator::from_diagonal(&diag))
}

/// Quadratures x = (a + a†)/√2 and p = i(a† − a)/√2 for one mode.
///
/// ħ = 1, m_i = 1; the ladder form of the Hamiltonian is authoritative, so
/// no mass or frequency scaling is folded into the quadratures.
pub fn quadratures(
    space: &Space,
    mode: usize,
) -> Result<(SparseOperator, SparseOperator), OperatorError> {
    let lower = ladder(space, mode, Ladder::Lower)?;
    let raise = ladder(space, mode, Ladder::Raise)?;
    let inv_sqrt2 = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i_sqrt2 = Complex64::new(0.0, core::f64::consts::FRAC_1_SQRT_2);
    let x = lower.add(&raise).scale(inv_sqrt2);
    let p = raise.sub(&lower).scale(i_sqrt2);
    Ok((x, p))
}

/// Pauli operator on one qubit; σ− = |g⟩⟨e|, σ+ = |e⟩⟨g|, σz|g⟩ = −|g⟩.
pub fn pauli(space: &Space, qubit: usize, which: Pauli) -> Result<SparseOperator, OperatorError> {
    check_site(qubit)?;
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        let q = idx.qubit_levels[qubit];
        let mut flipped = idx;
        flipped.qubit_levels[qubit] = 1 - q;
        let kf = space.flat(&flipped);
        match which {
            Pauli::X => triplets.push((kf, k, Complex64::ONE)),
            Pauli::Y => {
                // σy|g⟩ = i|e⟩, σy|e⟩ = −i|g⟩
                let v = if q == 0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, -1.0)
                };
                triplets.push((kf, k, v));
            }
            Pauli::Z => {
                let v = if q == 0 {
                    -Complex64::ONE
                } else {
                    Complex64::ONE
                };
                triplets.push((k, k, v));
            }
            Pauli::Plus => {
                if q == 0 {
                    triplets.push((kf, k, Complex64::ONE));
                }
            }
            Pauli::Minus => {
                if q == 1 {
                    triplets.push((kf, k, Complex64::ONE));
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(space.dim(), triplets))
}

/// The bare Rabi coupling operator σ_{x,i}(a_i + a†_i), without g_i.
pub fn rabi_term(space: &Space, site: usize) -> Result<SparseOperator, OperatorError> {
    check_site(site)?;
    let cutoff = space.config().cutoffs[site];
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        let n = idx.occupations[site];
        let mut to = idx;
        to.qubit_levels[site] = 1 - idx.qubit_levels[site];
        if n >= 1 {
            to.occupations[site] = n - 1;
            triplets.push((space.flat(&to), k, Complex64::new((n as f64).sqrt(), 0.0)));
        }
        if n < cutoff {
            to.occupations[site] = n + 1;
            triplets.push((
                space.flat(&to),
                k,
                Complex64::new(((n + 1) as f64).sqrt(), 0.0),
            ));
        }
    }
    Ok(SparseOperator::from_triplets(space.dim(), triplets))
}

/// The pump operator X3 = (a†_1 + a_1)(a†_2 + a_2)(a†_3 + a_3).
pub fn pump_operator(space: &Space) -> SparseOperator {
    let cutoffs = space.config().cutoffs;
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        // all 2^3 sign choices of ±1 photon per mode
        for choice in 0..(1usize << SITES) {
            let mut to = idx;
            let mut coeff = 1.0;
            let mut valid = true;
            for (mode, &cutoff) in cutoffs.iter().enumerate() {
                let n = idx.occupations[mode];
                if choice & (1 << mode) != 0 {
                    if n < cutoff {
                        to.occupations[mode] = n + 1;
                        coeff *= ((n + 1) as f64).sqrt();
                    } else {
                        valid = false;
                        break;
                    }
                } else if n >= 1 {
                    to.occupations[mode] = n - 1;
                    coeff *= (n as f64).sqrt();
                } else {
                    valid = false;
                    break;
                }
            }
            if valid {
                triplets.push((space.flat(&to), k, Complex64::new(coeff, 0.0)));
            }
        }
    }
    SparseOperator::from_triplets(space.dim(), triplets)
}

/// The full Hamiltonian H(t) = H0 + g0·cos(ω_d t)·X3, kept in split form so
/// steppers never materialize the sum.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    static_part: SparseOperator,
    pump: SparseOperator,
    pump_coupling: f64,
    drive_freq: f64,
}

impl HamiltonianModel {
    /// Assemble H0 (mode + qubit energies + Rabi terms) and the pump operator.
    pub fn build(space: &Space) -> Self {
        let cfg = space.config().clone();
        let mut triplets = Vec::new();
        for (k, idx) in space.basis_iter() {
            let mut diag = 0.0;
            for i in 0..SITES {
                diag += cfg.mode_freqs[i] * idx.occupations[i] as f64;
                diag +=
                    cfg.qubit_freqs[i] / 2.0 * if idx.qubit_levels[i] == 1 { 1.0 } else { -1.0 };
            }
            triplets.push((k, k, Complex64::new(diag, 0.0)));
            for i in 0..SITES {
                let g = cfg.rabi_couplings[i];
                if g == 0.0 {
                    continue;
                }
                let n = idx.occupations[i];
                let mut to = idx;
                to.qubit_levels[i] = 1 - idx.qubit_levels[i];
                if n >= 1 {
                    to.occupations[i] = n - 1;
                    triplets.push((
                        space.flat(&to),
                        k,
                        Complex64::new(g * (n as f64).sqrt(), 0.0),
                    ));
                }
                if n < cfg.cutoffs[i] {
                    to.occupations[i] = n + 1;
                    triplets.push((
                        space.flat(&to),
                        k,
                        Complex64::new(g * ((n + 1) as f64).sqrt(), 0.0),
                    ));
                }
            }
        }
        let static_part = SparseOperator::from_triplets(space.dim(), triplets);
        let pump = pump_operator(space);
        debug_assert_eq!(static_part.hermitian_deviation(), 0.0);
        debug_assert_eq!(pump.hermitian_deviation(), 0.0);
        Self {
            static_part,
            pump,
            pump_coupling: cfg.pump_coupling,
            drive_freq: cfg.drive_freq(),
        }
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn static_part(&self) -> &SparseOperator {
        &self.static_part
    }

    pub fn pump_op(&self) -> &SparseOperator {
        &self.pump
    }

    pub fn drive_freq(&self) -> f64 {
        self.drive_freq
    }

    /// Pump envelope g(t) = g0·cos(ω_d t).
    pub fn envelope(&self, t: f64) -> f64 {
        self.pump_coupling * (self.drive_freq * t).cos()
    }

    /// out = H(t)·v
    pub fn apply_into(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) {
        self.static_part.apply_into(v, out);
        let g = self.envelope(t);
        if g != 0.0 {
            self.pump.apply_acc(v, Complex64::new(g, 0.0), out);
        }
    }

    /// Materialize H(t) as a single sparse operator.
    pub fn at(&self, t: f64) -> SparseOperator {
        self.static_part
            .add_scaled(&self.pump, Complex64::new(self.envelope(t), 0.0))
    }

    /// Upper bound on the induced infinity norm of H(t), any t.
    pub fn norm_bound(&self) -> f64 {
        self.static_part.norm_inf() + self.pump_coupling.abs() * self.pump.norm_inf()
    }

    /// Same static part and pump operator under a different pump coupling.
    /// H0 carries no g0 dependence, so sweeps reuse one assembly per space.
    pub fn with_pump_coupling(&self, g0: f64) -> Self {
        Self {
            static_part: self.static_part.clone(),
            pump: self.pump.clone(),
            pump_coupling: g0,
            drive_freq: self.drive_freq,
        }
    }

    pub fn pump_coupling(&self) -> f64 {
        self.pump_coupling
    }
}

/// Projector onto equal combined (photon + qubit) parity across the three
/// pairs. This is the conserved quantity of the driven system: the Rabi term
/// flips a pair's photon parity and qubit level together, and the pump flips
/// all three photon parities at once.
pub fn parity_projector(space: &Space) -> SparseOperator {
    let diag: Vec<Complex64> = space
        .basis_iter()
        .map(|(_, idx)| {
            if equal_pair_parity(&idx) {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    SparseOperator::from_diagonal(&diag)
}

/// The projector summed over a single (α, β) shared by all three pairs:
/// requires every mode to have photon parity α and every qubit to sit at
/// level β. Does not commute with the Rabi terms; retained for the
/// documented negative commutator test.
pub fn parity_projector_literal(space: &Space) -> SparseOperator {
    let diag: Vec<Complex64> = space
        .basis_iter()
        .map(|(_, idx)| {
            let pn: [usize; SITES] = [
                idx.occupations[0] % 2,
                idx.occupations[1] % 2,
                idx.occupations[2] % 2,
            ];
            let q = idx.qubit_levels;
            let same_photon_parity = pn[0] == pn[1] && pn[1] == pn[2];
            let same_qubit_level = q[0] == q[1] && q[1] == q[2];
            if same_photon_parity && same_qubit_level {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    SparseOperator::from_diagonal(&diag)
}

/// Max-absolute-entry of AB − BA.
pub fn commutator_norm(a: &SparseOperator, b: &SparseOperator) -> Result<f64, OperatorError> {
    if a.dim() != b.dim() {
        return Err(OperatorError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.matmul(b).sub(&b.matmul(a)).max_abs_entry())
}

/// a_1 a_2 a_3 built directly (one entry per eligible column).
pub fn triple_mode_lowering(space: &Space) -> SparseOperator {
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        if idx.occupations.iter().all(|&n| n >= 1) {
            let mut to = idx;
            let mut coeff = 1.0;
            for m in 0..SITES {
                to.occupations[m] -= 1;
                coeff *= (idx.occupations[m] as f64).sqrt();
            }
            triplets.push((space.flat(&to), k, Complex64::new(coeff, 0.0)));
        }
    }
    SparseOperator::from_triplets(space.dim(), triplets)
}

/// σ−_1 σ−_2 σ−_3 built directly.
pub fn triple_qubit_lowering(space: &Space) -> SparseOperator {
    let mut triplets = Vec::new();
    for (k, idx) in space.basis_iter() {
        if idx.qubit_levels.iter().all(|&q| q == 1) {
            let to = BasisIndex::new(idx.occupations, [0; SITES]);
            triplets.push((space.flat(&to), k, Complex64::ONE));
        }
    }
    SparseOperator::from_triplets(space.dim(), triplets)
}
