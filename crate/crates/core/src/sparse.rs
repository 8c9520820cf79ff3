//! Complex sparse matrices in CSR form with a deterministic canonical entry
//! order (row-major, columns sorted), so that operator construction is
//! bit-reproducible across runs.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::fock::StateVector;

/// Sparse complex operator on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets. Duplicates are summed; entries
    /// that sum to exactly zero are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        let mut it = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            debug_assert!(r < dim && c < dim);
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != Complex64::ZERO {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> Self {
        let triplets = (0..dim).map(|k| (k, k, Complex64::ONE)).collect();
        Self::from_triplets(dim, triplets)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let triplets = diag.iter().enumerate().map(|(k, &v)| (k, k, v)).collect();
        Self::from_triplets(diag.len(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    /// Entry lookup by binary search within the row.
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::ZERO,
        }
    }

    #[inline]
    fn row_dot(&self, r: usize, v: &[Complex64]) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        let mut acc = Complex64::ZERO;
        for (val, &col) in self.vals[lo..hi].iter().zip(&self.cols[lo..hi]) {
            acc += val * v[col];
        }
        acc
    }

    /// out += coeff · (self · v)
    pub fn apply_acc(&self, v: &[Complex64], coeff: Complex64, out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, slot) in out.iter_mut().enumerate() {
            *slot += coeff * self.row_dot(r, v);
        }
    }

    /// out = self · v
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = self.row_dot(r, v);
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = StateVector::zero(self.dim);
        self.apply_into(state.amplitudes(), out.amplitudes_mut());
        out
    }

    /// self + c · other
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in operator sum");
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        triplets.extend(self.entries());
        triplets.extend(other.entries().map(|(r, col, v)| (r, col, c * v)));
        Self::from_triplets(self.dim, triplets)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, Complex64::ONE)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -Complex64::ONE)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let triplets = self.entries().map(|(r, col, v)| (r, col, c * v)).collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// Matrix product self · other, via row-wise sparse accumulation.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.dim, other.dim,
            "dimension mismatch in operator product"
        );
        let dim = self.dim;
        let mut acc = vec![Complex64::ZERO; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let m = self.cols[k];
                let w = self.vals[k];
                for k2 in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let c = other.cols[k2];
                    if acc[c] == Complex64::ZERO {
                        touched.push(c);
                    }
                    acc[c] += w * other.vals[k2];
                }
            }
            for &c in &touched {
                if acc[c] != Complex64::ZERO {
                    triplets.push((r, c, acc[c]));
                }
                acc[c] = Complex64::ZERO;
            }
            touched.clear();
        }
        Self::from_triplets(dim, triplets)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let triplets = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// Largest |entry|.
    pub fn max_abs_entry(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max row sum of |entries| (induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation `|A[r,c] - conj(A[c,r])|` over the nonzero pattern.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (r, c, v) in self.entries() {
            dev = dev.max((v - self.get(c, r).conj()).norm());
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Diagonal as a dense vector.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }
}
