//! Composite Hilbert space of three (boson mode ⊗ qubit) pairs with a hard
//! per-mode Fock truncation.
//!
//! Basis states are labelled `(n1 q1 n2 q2 n3 q3)` with photon numbers
//! `n_i ∈ [0, N_i]` and qubit levels `q_i ∈ {0, 1}` (0 = ground). The pair
//! interleaving keeps the (photon + qubit) parity of each pair local in the
//! flat index.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

/// Number of mode-qubit pairs in the system.
pub const SITES: usize = 3;

/// Truncation cutoffs, frequencies and couplings defining the composite space.
///
/// All frequencies and couplings are in units of the first mode frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceConfig {
    /// Max photon number per mode, inclusive.
    pub cutoffs: [usize; SITES],
    /// Mode frequencies ω_i.
    pub mode_freqs: [f64; SITES],
    /// Qubit frequencies Ω_i.
    pub qubit_freqs: [f64; SITES],
    /// Qubit-mode Rabi couplings g_i.
    pub rabi_couplings: [f64; SITES],
    /// Pump coupling g0.
    pub pump_coupling: f64,
    /// Pump drive frequency override; `None` means ω1 + ω2 + ω3.
    pub drive_override: Option<f64>,
}

impl Default for SpaceConfig {
    /// Reference parameters: ω = (1, 2, 1), Ω_i = ω_i, g_i = 0.01, g0 = 0.1,
    /// drive resonant at Σω_i. The default cutoff of 7 per mode is the
    /// smallest that passes the cutoff-convergence check (raising all N_i by
    /// two moves no witness by more than 1e−4 at g0 = 0.1, t = 5).
    fn default() -> Self {
        Self {
            cutoffs: [7; SITES],
            mode_freqs: [1.0, 2.0, 1.0],
            qubit_freqs: [1.0, 2.0, 1.0],
            rabi_couplings: [0.01; SITES],
            pump_coupling: 0.1,
            drive_override: None,
        }
    }
}

impl SpaceConfig {
    /// Effective drive frequency: the override if set, else ω1 + ω2 + ω3.
    pub fn drive_freq(&self) -> f64 {
        self.drive_override
            .unwrap_or_else(|| self.mode_freqs.iter().sum())
    }

    pub fn with_pump(mut self, g0: f64) -> Self {
        self.pump_coupling = g0;
        self
    }

    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.cutoffs = [n; SITES];
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, &n) in self.cutoffs.iter().enumerate() {
            if n < 1 {
                return Err(ConfigError::CutoffTooSmall { mode: i });
            }
        }
        for (i, &w) in self.mode_freqs.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(ConfigError::NonPositiveFrequency { site: i, value: w });
            }
        }
        for (i, &w) in self.qubit_freqs.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(ConfigError::NonPositiveFrequency { site: i, value: w });
            }
        }
        for (i, &g) in self.rabi_couplings.iter().enumerate() {
            if !g.is_finite() || g < 0.0 {
                return Err(ConfigError::NegativeCoupling { site: i, value: g });
            }
        }
        if !self.pump_coupling.is_finite() || self.pump_coupling < 0.0 {
            return Err(ConfigError::NegativeCoupling {
                site: SITES,
                value: self.pump_coupling,
            });
        }
        if !self.drive_freq().is_finite() || self.drive_freq() <= 0.0 {
            return Err(ConfigError::NonPositiveFrequency {
                site: SITES,
                value: self.drive_freq(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    CutoffTooSmall { mode: usize },
    NonPositiveFrequency { site: usize, value: f64 },
    NegativeCoupling { site: usize, value: f64 },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::CutoffTooSmall { mode } => {
                write!(f, "mode {mode}: cutoff must be at least 1")
            }
            ConfigError::NonPositiveFrequency { site, value } => {
                write!(f, "site {site}: frequency must be positive, got {value}")
            }
            ConfigError::NegativeCoupling { site, value } => {
                write!(f, "site {site}: coupling must be non-negative, got {value}")
            }
        }
    }
}

/// Structured label of one product-basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    /// Photon numbers n_i.
    pub occupations: [usize; SITES],
    /// Qubit levels q_i, 0 = |g⟩, 1 = |e⟩.
    pub qubit_levels: [u8; SITES],
}

impl BasisIndex {
    pub fn new(occupations: [usize; SITES], qubit_levels: [u8; SITES]) -> Self {
        Self {
            occupations,
            qubit_levels,
        }
    }
}

/// Combined (photon + qubit) excitation parity of each pair.
pub fn pair_parity(index: &BasisIndex) -> [u8; SITES] {
    let mut p = [0u8; SITES];
    for (slot, (&n, &q)) in p
        .iter_mut()
        .zip(index.occupations.iter().zip(&index.qubit_levels))
    {
        *slot = ((n + q as usize) % 2) as u8;
    }
    p
}

/// True when all three pairs share the same combined parity.
pub fn equal_pair_parity(index: &BasisIndex) -> bool {
    let p = pair_parity(index);
    p[0] == p[1] && p[1] == p[2]
}

/// The composite Hilbert space: dimension and flat ↔ structured index maps.
///
/// Flat ordering is lexicographic in `(n1, q1, n2, q2, n3, q3)` with `q3`
/// fastest. Immutable after construction and safe to share across workers.
#[derive(Clone, Debug)]
pub struct Space {
    config: SpaceConfig,
    dim: usize,
}

impl Space {
    /// Build the space, validating the configuration.
    pub fn new(config: SpaceConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let dim = config.cutoffs.iter().map(|&n| 2 * (n + 1)).product();
        Ok(Self { config, dim })
    }

    pub fn config(&self) -> &SpaceConfig {
        &self.config
    }

    /// Total dimension D = ∏ 2(N_i + 1).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat index of a structured label.
    pub fn flat(&self, index: &BasisIndex) -> usize {
        let n = &self.config.cutoffs;
        debug_assert!((0..SITES).all(|i| index.occupations[i] <= n[i]));
        debug_assert!((0..SITES).all(|i| index.qubit_levels[i] <= 1));
        let mut k = 0usize;
        for ((&cutoff, &occ), &q) in n.iter().zip(&index.occupations).zip(&index.qubit_levels) {
            k = (k * (cutoff + 1) + occ) * 2 + q as usize;
        }
        k
    }

    /// Structured label of a flat index.
    pub fn unflat(&self, mut k: usize) -> BasisIndex {
        debug_assert!(k < self.dim);
        let n = &self.config.cutoffs;
        let mut occupations = [0usize; SITES];
        let mut qubit_levels = [0u8; SITES];
        for i in (0..SITES).rev() {
            qubit_levels[i] = (k % 2) as u8;
            k /= 2;
            occupations[i] = k % (n[i] + 1);
            k /= n[i] + 1;
        }
        BasisIndex {
            occupations,
            qubit_levels,
        }
    }

    /// Iterate all basis labels in flat order.
    pub fn basis_iter(&self) -> impl Iterator<Item = (usize, BasisIndex)> + '_ {
        (0..self.dim).map(move |k| (k, self.unflat(k)))
    }

    /// The state |0g0g0g⟩.
    pub fn vacuum(&self) -> StateVector {
        let mut amps = vec![Complex64::ZERO; self.dim];
        let k = self.flat(&BasisIndex::new([0; SITES], [0; SITES]));
        amps[k] = Complex64::ONE;
        StateVector { amps }
    }
}

/// Complex amplitude vector over the product basis of one [`Space`].
///
/// Physical states stay normalized; norm drift is monitored by the dynamics
/// layer and never silently corrected.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(dim: usize) -> Self {
        Self {
            amps: vec![Complex64::ZERO; dim],
        }
    }

    /// Wrap raw amplitudes without normalizing.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_small_and_reference() {
        let s = Space::new(SpaceConfig::default().with_cutoff(1)).unwrap();
        assert_eq!(s.dim(), 64);
        let s = Space::new(SpaceConfig::default().with_cutoff(6)).unwrap();
        assert_eq!(s.dim(), 2744);
        let s = Space::new(SpaceConfig::default()).unwrap();
        assert_eq!(s.dim(), 4096);
    }

    #[test]
    fn index_roundtrip_exhaustive_asymmetric() {
        let mut cfg = SpaceConfig::default();
        cfg.cutoffs = [2, 3, 1];
        let s = Space::new(cfg).unwrap();
        assert_eq!(s.dim(), 2 * 3 * 2 * 4 * 2 * 2);
        for k in 0..s.dim() {
            let idx = s.unflat(k);
            assert_eq!(s.flat(&idx), k);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = SpaceConfig::default();
        cfg.cutoffs[1] = 0;
        assert_eq!(
            Space::new(cfg).unwrap_err(),
            ConfigError::CutoffTooSmall { mode: 1 }
        );
        let mut cfg = SpaceConfig::default();
        cfg.mode_freqs[2] = -1.0;
        assert!(matches!(
            Space::new(cfg).unwrap_err(),
            ConfigError::NonPositiveFrequency { site: 2, .. }
        ));
    }

    #[test]
    fn vacuum_is_normalized_single_amplitude() {
        let s = Space::new(SpaceConfig::default().with_cutoff(1)).unwrap();
        let v = s.vacuum();
        let k0 = s.flat(&BasisIndex::new([0; 3], [0; 3]));
        assert_eq!(v.amplitudes()[k0], Complex64::ONE);
        assert_eq!(v.norm(), 1.0);
        assert_eq!(
            v.amplitudes().iter().filter(|a| a.norm_sqr() > 0.0).count(),
            1
        );
    }

    #[test]
    fn pair_parity_examples() {
        let b = |occ: [usize; 3], q: [u8; 3]| BasisIndex::new(occ, q);
        assert_eq!(pair_parity(&b([0, 0, 0], [0, 0, 0])), [0, 0, 0]);
        assert_eq!(pair_parity(&b([1, 0, 0], [1, 0, 0])), [0, 0, 0]);
        assert_eq!(pair_parity(&b([1, 0, 0], [0, 0, 0])), [1, 0, 0]);
        assert!(equal_pair_parity(&b([1, 0, 0], [1, 0, 0])));
        assert!(!equal_pair_parity(&b([1, 0, 0], [0, 0, 0])));
    }

    #[test]
    fn drive_frequency_defaults_to_sum() {
        let cfg = SpaceConfig::default();
        assert_eq!(cfg.drive_freq(), 4.0);
        let mut cfg = SpaceConfig::default();
        cfg.drive_override = Some(3.5);
        assert_eq!(cfg.drive_freq(), 3.5);
    }
}
