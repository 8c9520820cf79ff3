//! Discrete-variable reference states and the two-qubit z-covariance bound:
//! GHZ, W, the separable GHZ moment-mimic, spin moment tables, and the
//! randomized + hill-climbed maximization of Δ²S_z1S_z2 over pure two-qubit
//! states.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::observables::WitnessMoments;
use crate::rng::SplitMix64;

const QUBIT_TOL: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum QubitError {
    BadDimension { dim: usize },
    TraceNotOne { trace: f64 },
    NotHermitian { deviation: f64 },
    NegativeEigenvalue { value: f64 },
}

impl fmt::Display for QubitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitError::BadDimension { dim } => {
                write!(f, "density matrix dimension {dim} is not 4 or 8")
            }
            QubitError::TraceNotOne { trace } => write!(f, "trace is {trace}, expected 1"),
            QubitError::NotHermitian { deviation } => {
                write!(f, "matrix deviates from Hermitian by {deviation}")
            }
            QubitError::NegativeEigenvalue { value } => {
                write!(f, "matrix has negative eigenvalue {value}")
            }
        }
    }
}

/// Dense density matrix on two or three qubits, row-major, with qubit 1 the
/// slowest index bit and level 0 meaning ground.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitDensityMatrix {
    qubits: usize,
    data: Vec<Complex64>,
}

impl QubitDensityMatrix {
    pub fn from_elements(qubits: usize, data: Vec<Complex64>) -> Result<Self, QubitError> {
        let dim = 1usize << qubits;
        if !(qubits == 2 || qubits == 3) || data.len() != dim * dim {
            return Err(QubitError::BadDimension { dim: data.len() });
        }
        Ok(Self { qubits, data })
    }

    pub fn from_pure(qubits: usize, amps: &[Complex64]) -> Result<Self, QubitError> {
        let dim = 1usize << qubits;
        if !(qubits == 2 || qubits == 3) || amps.len() != dim {
            return Err(QubitError::BadDimension { dim: amps.len() });
        }
        let mut data = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Ok(Self { qubits, data })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn element(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|k| self.element(k, k)).sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                dev = dev.max((self.element(r, c) - self.element(c, r).conj()).norm());
            }
        }
        dev
    }

    /// Eigenvalues via cyclic Jacobi on the real-symmetric embedding.
    ///
    /// The Hermitian matrix H = A + iB maps to [[A, −B], [B, A]], whose
    /// spectrum is that of H with every eigenvalue doubled in multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut a = vec![0.0f64; m * m];
        for r in 0..n {
            for c in 0..n {
                let v = self.element(r, c);
                a[r * m + c] = v.re;
                a[r * m + (c + n)] = -v.im;
                a[(r + n) * m + c] = v.im;
                a[(r + n) * m + (c + n)] = v.re;
            }
        }
        jacobi_eigenvalues(&mut a, m)
    }

    /// Trace, Hermiticity and positivity checks.
    pub fn validate(&self) -> Result<(), QubitError> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > QUBIT_TOL || tr.im.abs() > QUBIT_TOL {
            return Err(QubitError::TraceNotOne { trace: tr.re });
        }
        let dev = self.hermitian_deviation();
        if dev > QUBIT_TOL {
            return Err(QubitError::NotHermitian { deviation: dev });
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_FLOOR {
            return Err(QubitError::NegativeEigenvalue { value: min });
        }
        Ok(())
    }

    /// tr(ρ·O) for a dense operator of matching dimension.
    fn expect(&self, op: &[Complex64]) -> Complex64 {
        let dim = self.dim();
        let mut acc = Complex64::ZERO;
        for r in 0..dim {
            for c in 0..dim {
                acc += self.element(r, c) * op[c * dim + r];
            }
        }
        acc
    }
}

/// One product projector |b1 b2 (b3)⟩⟨…| with its mixture weight.
pub type ProductTerm = (f64, Vec<u8>);

/// Mixture of computational-basis product projectors; the explicit
/// decomposition is the separability certificate.
pub fn mixture_of_products(qubits: usize, terms: &[ProductTerm]) -> QubitDensityMatrix {
    let dim = 1usize << qubits;
    let mut data = vec![Complex64::ZERO; dim * dim];
    for (w, labels) in terms {
        let mut k = 0usize;
        for &b in labels {
            k = k * 2 + b as usize;
        }
        data[k * dim + k] += Complex64::new(*w, 0.0);
    }
    QubitDensityMatrix { qubits, data }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceState {
    Ghz,
    W,
    /// Separable mixture with exactly the GHZ spin moment table:
    /// (|000⟩⟨000| + |111⟩⟨111|)/2.
    MimicGhz,
}

/// Build a reference three-qubit state.
pub fn make_reference(kind: ReferenceState) -> QubitDensityMatrix {
    match kind {
        ReferenceState::Ghz => {
            // exact 1/2 entries so the moment table is exact in floating point
            let half = Complex64::new(0.5, 0.0);
            let mut data = vec![Complex64::ZERO; 64];
            for (r, c) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
                data[r * 8 + c] = half;
            }
            QubitDensityMatrix::from_elements(3, data).unwrap()
        }
        ReferenceState::W => {
            let a = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
            let mut amps = vec![Complex64::ZERO; 8];
            amps[0b100] = a;
            amps[0b010] = a;
            amps[0b001] = a;
            QubitDensityMatrix::from_pure(3, &amps).unwrap()
        }
        ReferenceState::MimicGhz => mixture_of_products(3, &mimic_ghz_decomposition()),
    }
}

/// Product decomposition of the separable GHZ moment-mimic.
pub fn mimic_ghz_decomposition() -> Vec<ProductTerm> {
    vec![(0.5, vec![0, 0, 0]), (0.5, vec![1, 1, 1])]
}

/// Equal-weight mixture of twelve product projectors that correlates each
/// qubit pair in turn, leaving the third qubit free. Pairwise correlation
/// caps its z covariances at 1/12, short of the GHZ value 1/4, so it cannot
/// mimic the GHZ moment table; retained for the documented discrepancy
/// checks in the verification suite.
pub fn mimic_ghz_pairwise_decomposition() -> Vec<ProductTerm> {
    let w = 1.0 / 12.0;
    let mut terms = Vec::with_capacity(12);
    // free qubit 1, correlated (2,3)
    for b1 in 0..2u8 {
        for c in 0..2u8 {
            terms.push((w, vec![b1, c, c]));
        }
    }
    // free qubit 2, correlated (1,3)
    for b2 in 0..2u8 {
        for c in 0..2u8 {
            terms.push((w, vec![c, b2, c]));
        }
    }
    // free qubit 3, correlated (1,2)
    for b3 in 0..2u8 {
        for c in 0..2u8 {
            terms.push((w, vec![c, c, b3]));
        }
    }
    terms
}

pub fn mimic_ghz_pairwise() -> QubitDensityMatrix {
    mixture_of_products(3, &mimic_ghz_pairwise_decomposition())
}

const AXES: usize = 3;

/// Spin means, same-axis pair covariances and variances of a density matrix.
///
/// Axis order is (x, y, z); `pairs` lists the site pairs covariances refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinMomentTable {
    pub sites: usize,
    pub pairs: Vec<(usize, usize)>,
    /// ⟨S_a^i⟩ indexed `[axis][site]`.
    pub mean: [Vec<f64>; AXES],
    /// Δ²S_a^iS_a^j indexed `[axis][pair]`.
    pub cov: [Vec<f64>; AXES],
    /// Δ²S_a^iS_a^i indexed `[axis][site]`.
    pub var: [Vec<f64>; AXES],
}

impl SpinMomentTable {
    /// Largest absolute difference over all table entries.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..AXES {
            for (x, y) in self.mean[a].iter().zip(&other.mean[a]) {
                d = d.max((x - y).abs());
            }
            for (x, y) in self.cov[a].iter().zip(&other.cov[a]) {
                d = d.max((x - y).abs());
            }
            for (x, y) in self.var[a].iter().zip(&other.var[a]) {
                d = d.max((x - y).abs());
            }
        }
        d
    }
}

fn pauli_2x2(axis: usize) -> [Complex64; 4] {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::new(0.0, 1.0);
    // basis order (|e⟩, |g⟩)? No: index bit 0 = ground comes first, so the
    // matrix is written in (|0⟩=|g⟩, |1⟩=|e⟩) order with σz = diag(−1, +1).
    match axis {
        0 => [z, one, one, z],
        1 => [z, -i, i, z],
        _ => [-one, z, z, one],
    }
}

/// Dense σ_axis on `site` of an n-qubit register (site 0 is the slowest bit).
fn sigma_on_site(axis: usize, site: usize, qubits: usize) -> Vec<Complex64> {
    let dim = 1usize << qubits;
    let s = pauli_2x2(axis);
    let mut out = vec![Complex64::ZERO; dim * dim];
    let shift = qubits - 1 - site;
    for r in 0..dim {
        for c in 0..dim {
            // nonzero only when all other bits agree
            if (r & !(1 << shift)) != (c & !(1 << shift)) {
                continue;
            }
            let rb = (r >> shift) & 1;
            let cb = (c >> shift) & 1;
            out[r * dim + c] = s[rb * 2 + cb];
        }
    }
    out
}

fn dense_mul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; dim * dim];
    for r in 0..dim {
        for m in 0..dim {
            let arm = a[r * dim + m];
            if arm == Complex64::ZERO {
                continue;
            }
            for c in 0..dim {
                out[r * dim + c] += arm * b[m * dim + c];
            }
        }
    }
    out
}

/// Spin moment table of a two- or three-qubit density matrix.
pub fn spin_moments(rho: &QubitDensityMatrix) -> Result<SpinMomentTable, QubitError> {
    rho.validate()?;
    let n = rho.qubits();
    let dim = rho.dim();
    let pairs: Vec<(usize, usize)> = match n {
        2 => vec![(0, 1)],
        _ => vec![(0, 1), (0, 2), (1, 2)],
    };
    let mut table = SpinMomentTable {
        sites: n,
        pairs: pairs.clone(),
        mean: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        cov: [
            vec![0.0; pairs.len()],
            vec![0.0; pairs.len()],
            vec![0.0; pairs.len()],
        ],
        var: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
    };
    for axis in 0..AXES {
        let sigmas: Vec<Vec<Complex64>> = (0..n).map(|s| sigma_on_site(axis, s, n)).collect();
        let means: Vec<f64> = sigmas.iter().map(|s| rho.expect(s).re / 2.0).collect();
        for site in 0..n {
            table.mean[axis][site] = means[site];
            let sq = dense_mul(&sigmas[site], &sigmas[site], dim);
            let second = rho.expect(&sq).re / 4.0;
            table.var[axis][site] = second - means[site] * means[site];
        }
        for (pi, &(i, j)) in pairs.iter().enumerate() {
            let prod = dense_mul(&sigmas[i], &sigmas[j], dim);
            let second = rho.expect(&prod).re / 4.0;
            table.cov[axis][pi] = second - means[i] * means[j];
        }
    }
    Ok(table)
}

/// ⟨σ−σ−σ−⟩, excited populations and pair populations of a three-qubit
/// density matrix, packaged for the qubit witness.
pub fn dv_witness_moments(rho: &QubitDensityMatrix) -> Result<WitnessMoments, QubitError> {
    if rho.qubits() != 3 {
        return Err(QubitError::BadDimension { dim: rho.dim() });
    }
    // ⟨σ−_1σ−_2σ−_3⟩ = tr(ρ |ggg⟩⟨eee|) = ρ[eee, ggg]
    let triple = rho.element(0b111, 0b000);
    let mut single = [0.0; 3];
    let mut pair = [0.0; 3];
    for k in 0..8usize {
        let p = rho.element(k, k).re;
        for site in 0..3 {
            if (k >> (2 - site)) & 1 == 1 {
                single[site] += p;
            }
        }
        for (site, &(j, l)) in crate::observables::COMPLEMENT.iter().enumerate() {
            if (k >> (2 - j)) & 1 == 1 && (k >> (2 - l)) & 1 == 1 {
                pair[site] += p;
            }
        }
    }
    Ok(WitnessMoments {
        triple,
        single,
        pair,
    })
}

/// Pure two-qubit state c00|00⟩ + c01|01⟩ + c10|10⟩ + c11|11⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitPure {
    pub c: [Complex64; 4],
}

impl TwoQubitPure {
    pub fn new(c: [Complex64; 4]) -> Self {
        Self { c }
    }

    pub fn bell() -> Self {
        let a = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new([a, Complex64::ZERO, Complex64::ZERO, a])
    }

    pub fn product(q1: [Complex64; 2], q2: [Complex64; 2]) -> Self {
        Self::new([q1[0] * q2[0], q1[0] * q2[1], q1[1] * q2[0], q1[1] * q2[1]])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        for z in &mut self.c {
            *z /= n;
        }
        self
    }

    pub fn random(rng: &mut SplitMix64) -> Self {
        Self::new([
            rng.next_complex_gaussian(),
            rng.next_complex_gaussian(),
            rng.next_complex_gaussian(),
            rng.next_complex_gaussian(),
        ])
        .normalized()
    }

    pub fn density(&self) -> QubitDensityMatrix {
        QubitDensityMatrix::from_pure(2, &self.c).unwrap()
    }
}

/// Closed form for Δ²S_z1S_z2 of a pure two-qubit state:
/// (1 − |c10|² − |c01|²)|c11|² − |c11|⁴ − |c01|²|c10|².
pub fn zcov_formula(psi: &TwoQubitPure) -> f64 {
    let u = psi.c[1].norm_sqr(); // |c01|²
    let v = psi.c[2].norm_sqr(); // |c10|²
    let w = psi.c[3].norm_sqr(); // |c11|²
    (1.0 - v - u) * w - w * w - u * v
}

/// Δ²S_z1S_z2 computed directly from populations, independent of the closed
/// form.
pub fn zcov_direct(psi: &TwoQubitPure) -> f64 {
    let p: Vec<f64> = psi.c.iter().map(|z| z.norm_sqr()).collect();
    let sign = |b: usize| if b == 1 { 0.5 } else { -0.5 };
    let mut zz = 0.0;
    let mut z1 = 0.0;
    let mut z2 = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        let (b1, b2) = (k >> 1, k & 1);
        zz += pk * sign(b1) * sign(b2);
        z1 += pk * sign(b1);
        z2 += pk * sign(b2);
    }
    zz - z1 * z2
}

/// Result of the randomized z-covariance bound search.
#[derive(Clone, Debug)]
pub struct ZBoundSearch {
    pub max: f64,
    pub argmax: TwoQubitPure,
    pub samples: usize,
}

/// Maximize Δ²S_z1S_z2 over pure two-qubit states: uniform sampling of
/// normalized complex Gaussian 4-vectors followed by hill-climbing on the
/// three squared magnitudes (the closed form does not see the phases).
///
/// `start` seeds the climb directly and counts as one sample.
pub fn zcov_maximize(samples: usize, seed: u64, start: Option<TwoQubitPure>) -> ZBoundSearch {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = SplitMix64::new(seed);
    let mut best_state = start.unwrap_or_else(|| TwoQubitPure::random(&mut rng));
    let mut best = zcov_formula(&best_state);
    let drawn = if start.is_some() {
        samples - 1
    } else {
        samples.saturating_sub(1)
    };
    for _ in 0..drawn {
        let cand = TwoQubitPure::random(&mut rng);
        let v = zcov_formula(&cand);
        if v > best {
            best = v;
            best_state = cand;
        }
    }

    // climb on m = (|c01|², |c10|², |c11|²) within the probability simplex
    let mut m = [
        best_state.c[1].norm_sqr(),
        best_state.c[2].norm_sqr(),
        best_state.c[3].norm_sqr(),
    ];
    let f = |m: &[f64; 3]| (1.0 - m[0] - m[1]) * m[2] - m[2] * m[2] - m[0] * m[1];
    let feasible = |m: &[f64; 3]| m.iter().all(|&x| x >= 0.0) && m.iter().sum::<f64>() <= 1.0;
    let mut value = f(&m);
    let mut step = 0.25;
    while step > 1e-12 {
        let mut improved = false;
        for coord in 0..3 {
            for delta in [step, -step] {
                let mut cand = m;
                cand[coord] += delta;
                if feasible(&cand) {
                    let v = f(&cand);
                    if v > value {
                        value = v;
                        m = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    if value > best {
        best = value;
        let c00 = (1.0 - m[0] - m[1] - m[2]).max(0.0).sqrt();
        best_state = TwoQubitPure::new([
            Complex64::new(c00, 0.0),
            Complex64::new(m[0].sqrt(), 0.0),
            Complex64::new(m[1].sqrt(), 0.0),
            Complex64::new(m[2].sqrt(), 0.0),
        ]);
    }
    ZBoundSearch {
        max: best,
        argmax: best_state,
        samples,
    }
}

/// Outcome of checking the closed-form z covariance against the direct
/// density-matrix moment route over random pure states.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClosedFormAudit {
    pub max_formula_deviation: f64,
    pub max_abs_covariance: f64,
}

/// Sample `samples` Haar-like pure two-qubit states (every tenth one a
/// product state), compare `zcov_formula` with the spin-moment route, and
/// track the largest |Δ²S_z1S_z2| seen.
pub fn closed_form_audit(samples: usize, seed: u64) -> ClosedFormAudit {
    let mut rng = SplitMix64::new(seed ^ 0x00a0_d175);
    let mut audit = ClosedFormAudit::default();
    for k in 0..samples {
        let psi = if k % 10 == 9 {
            let q1 = [rng.next_complex_gaussian(), rng.next_complex_gaussian()];
            let q2 = [rng.next_complex_gaussian(), rng.next_complex_gaussian()];
            TwoQubitPure::product(q1, q2).normalized()
        } else {
            TwoQubitPure::random(&mut rng)
        };
        let formula = zcov_formula(&psi);
        let direct = spin_moments(&psi.density())
            .expect("pure state density is valid")
            .cov[2][0];
        audit.max_formula_deviation = audit.max_formula_deviation.max((formula - direct).abs());
        audit.max_abs_covariance = audit.max_abs_covariance.max(formula.abs());
    }
    audit
}

/// Cyclic Jacobi eigenvalues of a dense real-symmetric matrix (row-major).
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[idx(r, c)] * a[idx(r, c)];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|k| a[idx(k, k)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Human-readable moment table, used by the reference-state CLI report.
pub fn format_table(table: &SpinMomentTable) -> String {
    let mut out = String::new();
    let axis_names = ["S_x", "S_y", "S_z"];
    for (a, name) in axis_names.iter().enumerate() {
        for site in 0..table.sites {
            out += &format!("mean {}^{} = {:.12}\n", name, site + 1, table.mean[a][site]);
        }
    }
    for (a, name) in axis_names.iter().enumerate() {
        for (pi, &(i, j)) in table.pairs.iter().enumerate() {
            out += &format!(
                "cov {}{} {}{} = {:.12}\n",
                name,
                i + 1,
                name,
                j + 1,
                table.cov[a][pi]
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use crate::observables::witness_dv;

    #[test]
    fn ghz_is_pure_rank_one_with_quarter_zcov() {
        let ghz = make_reference(ReferenceState::Ghz);
        ghz.validate().unwrap();
        let eig = ghz.eigenvalues();
        // doubled spectrum from the real embedding: two eigenvalues at 1
        let near_one = eig.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count();
        assert_eq!(near_one, 2);
        let table = spin_moments(&ghz).unwrap();
        for a in 0..3 {
            for site in 0..3 {
                assert!(table.mean[a][site].abs() < 1e-15);
            }
        }
        for pi in 0..3 {
            assert!(table.cov[0][pi].abs() < 1e-15);
            assert!(table.cov[1][pi].abs() < 1e-15);
            assert!((table.cov[2][pi] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn mimic_matches_ghz_moments_exactly() {
        let ghz = spin_moments(&make_reference(ReferenceState::Ghz)).unwrap();
        let mimic_rho = make_reference(ReferenceState::MimicGhz);
        mimic_rho.validate().unwrap();
        let mimic = spin_moments(&mimic_rho).unwrap();
        assert!(ghz.max_abs_difference(&mimic) < 1e-15);
        // separability certificate: rebuild from the decomposition
        let rebuilt = mixture_of_products(3, &mimic_ghz_decomposition());
        assert_eq!(rebuilt, mimic_rho);
    }

    #[test]
    fn pairwise_mimic_deviates_in_z_covariance() {
        let rho = mimic_ghz_pairwise();
        rho.validate().unwrap();
        assert_eq!(mimic_ghz_pairwise_decomposition().len(), 12);
        let table = spin_moments(&rho).unwrap();
        // means and transverse covariances do match GHZ
        for a in 0..3 {
            for site in 0..3 {
                assert!(table.mean[a][site].abs() < 1e-15);
            }
        }
        for pi in 0..3 {
            assert!(table.cov[0][pi].abs() < 1e-15);
            assert!(table.cov[1][pi].abs() < 1e-15);
            // …but the z covariance lands at 1/12, not 1/4
            assert!((table.cov[2][pi] - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_state_has_no_correlations() {
        let eighth = Complex64::new(0.125, 0.0);
        let mut data = vec![Complex64::ZERO; 64];
        for k in 0..8 {
            data[k * 8 + k] = eighth;
        }
        let rho = QubitDensityMatrix::from_elements(3, data).unwrap();
        let table = spin_moments(&rho).unwrap();
        for a in 0..3 {
            for site in 0..3 {
                assert_eq!(table.mean[a][site], 0.0);
            }
            for pi in 0..3 {
                assert_eq!(table.cov[a][pi], 0.0);
            }
        }
    }

    #[test]
    fn w_state_moments() {
        let w = make_reference(ReferenceState::W);
        w.validate().unwrap();
        let m = dv_witness_moments(&w).unwrap();
        for site in 0..3 {
            assert!((m.single[site] - 1.0 / 3.0).abs() < 1e-15);
            assert!(m.pair[site].abs() < 1e-15);
        }
        assert_eq!(m.triple, Complex64::ZERO);
        assert_eq!(witness_dv(&m).unwrap(), 0.0);
    }

    #[test]
    fn dv_witness_on_references() {
        // GHZ sits exactly on the witness boundary: 1/2 − √(1/2 · 1/2) = 0
        let ghz = dv_witness_moments(&make_reference(ReferenceState::Ghz)).unwrap();
        assert!(witness_dv(&ghz).unwrap().abs() < 1e-15);
        // the mimic matches GHZ's second moments but, being a diagonal
        // mixture, has no ⟨σ−σ−σ−⟩ coherence: G_DV = 0 − √(1/2·1/2) = −1/2.
        // The witness cannot report entanglement on it, which is the
        // separability consistency that matters here.
        let mimic = dv_witness_moments(&make_reference(ReferenceState::MimicGhz)).unwrap();
        let g = witness_dv(&mimic).unwrap();
        assert!((g + 0.5).abs() < 1e-15, "G_DV(mimic) = {g}");
        assert!(g <= 0.0);
    }

    #[test]
    fn zcov_examples() {
        assert_eq!(zcov_formula(&TwoQubitPure::bell()), 0.25);
        let product00 = TwoQubitPure::new([
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ZERO,
        ]);
        assert_eq!(zcov_formula(&product00), 0.0);
        // (|01⟩ + |10⟩)/√2 → −1/4
        let a = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = TwoQubitPure::new([Complex64::ZERO, a, a, Complex64::ZERO]);
        assert!((zcov_formula(&psi) + 0.25).abs() < 1e-15);
        assert!((zcov_direct(&psi) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn formula_matches_direct_and_density_route() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..200 {
            let psi = TwoQubitPure::random(&mut rng);
            let f = zcov_formula(&psi);
            assert!((f - zcov_direct(&psi)).abs() < 1e-13);
            let table = spin_moments(&psi.density()).unwrap();
            assert!((f - table.cov[2][0]).abs() < 1e-12);
            assert!(f.abs() <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn maximize_from_bell_is_exact() {
        let res = zcov_maximize(1, 123, Some(TwoQubitPure::bell()));
        assert_eq!(res.max, 0.25);
        assert!((zcov_formula(&res.argmax) - 0.25).abs() < 1e-4);
    }

    #[test]
    fn maximize_random_reaches_bound() {
        let res = zcov_maximize(2000, 7, None);
        assert!(
            res.max >= 0.2499 && res.max <= 0.25 + 1e-9,
            "max {}",
            res.max
        );
        assert!((zcov_formula(&res.argmax) - 0.25).abs() < 1e-4);
    }

    #[test]
    fn product_states_have_no_z_correlation() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            let q1 = [rng.next_complex_gaussian(), rng.next_complex_gaussian()];
            let q2 = [rng.next_complex_gaussian(), rng.next_complex_gaussian()];
            let psi = TwoQubitPure::product(q1, q2).normalized();
            assert!(zcov_formula(&psi).abs() < 1e-13);
        }
    }

    #[test]
    fn validate_rejects_unnormalized() {
        let bad = QubitDensityMatrix::from_elements(2, vec![Complex64::ZERO; 16]).unwrap();
        assert!(matches!(
            bad.validate(),
            Err(QubitError::TraceNotOne { .. })
        ));
    }
}
