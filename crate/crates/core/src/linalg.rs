//! Dense complex-matrix toolkit: arithmetic, Hermitian eigendecomposition,
//! matrix functions through the eigenbasis, Kronecker product and partial
//! trace over spin subsets.
//!
//! Matrices are stored row-major in double precision. Everything here is a
//! pure function of its inputs; nothing mutates after construction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Single record holding every numeric tolerance used for validation.
///
/// All checks are absolute. The defaults follow the crate-wide contract:
/// 1e-10 for algebraic identities, 1e-12 for structural zeros, 1e-8 for
/// positivity slop and classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Elementwise Hermiticity deviation allowed on inputs.
    pub hermitian_tol: f64,
    /// Tolerance on algebraic identities (oracle equalities, sum rules).
    pub identity_tol: f64,
    /// Most negative eigenvalue accepted from a nominally PSD matrix.
    pub psd_tol: f64,
    /// Trace-normalization deviation allowed on density matrices.
    pub trace_tol: f64,
    /// Largest magnitude accepted where an exact structural zero is required.
    pub structure_tol: f64,
    /// Threshold on squared measures for state classification.
    pub classify_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            identity_tol: 1e-10,
            psd_tol: 1e-8,
            trace_tol: 1e-10,
            structure_tol: 1e-12,
            classify_tol: 1e-8,
        }
    }
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, C64::new(d, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Largest elementwise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from `M[i][j] == conj(M[j][i])`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::Symmetry(format!(
                "Hermiticity deviation {dev:.3e} exceeds {tol:.0e}"
            )));
        }
        Ok(())
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs)
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs)
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a.get(i / br, j / bc) * b.get(i % br, j % bc)
    })
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues ascending and the matching orthonormal eigenvectors
/// as columns, so `m == V · diag(λ) · V†`. The input must be square and
/// Hermitian within `policy.hermitian_tol`.
pub fn hermitian_eigendecompose(
    m: &ComplexMatrix,
    policy: &NumericPolicy,
) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.check_hermitian(policy.hermitian_tol)?;
    let n = m.rows();
    let na = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let eig = na.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((eigenvalues, eigenvectors))
}

/// `V · diag(f(λ)) · V†` for a Hermitian matrix `m = V diag(λ) V†`.
pub fn hermitian_matrix_function(
    m: &ComplexMatrix,
    policy: &NumericPolicy,
    f: impl Fn(f64) -> C64,
) -> Result<ComplexMatrix> {
    let (evals, evecs) = hermitian_eigendecompose(m, policy)?;
    Ok(eigen_matrix_function(&evals, &evecs, f))
}

/// Same as [`hermitian_matrix_function`] but reusing a decomposition.
pub fn eigen_matrix_function(
    evals: &[f64],
    evecs: &ComplexMatrix,
    f: impl Fn(f64) -> C64,
) -> ComplexMatrix {
    let n = evals.len();
    // V · diag(f(λ)) first, then multiply by V†.
    let scaled = ComplexMatrix::from_fn(n, n, |i, k| evecs.get(i, k) * f(evals[k]));
    scaled.matmul(&evecs.adjoint())
}

/// Partial trace of a multi-spin operator, keeping the spins in `keep`.
///
/// `m` must be `2^n_spins` square. Spin 0 is the most significant bit of the
/// basis index; kept spins retain their relative order in the result. An
/// empty `keep` yields the 1x1 matrix holding the full trace.
pub fn partial_trace(m: &ComplexMatrix, n_spins: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    let dim = 1usize << n_spins;
    if !m.is_square() || m.rows() != dim {
        return Err(Error::Dimension(format!(
            "expected {dim}x{dim} matrix for {n_spins} spins, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&s| s >= n_spins) {
        return Err(Error::Index(format!(
            "keep set {keep:?} out of range for {n_spins} spins"
        )));
    }
    let traced: Vec<usize> = (0..n_spins).filter(|s| !keep.contains(s)).collect();
    let kdim = 1usize << keep.len();
    let tdim = 1usize << traced.len();

    // Bit position of spin s inside a full index (spin 0 = MSB).
    let bitpos = |s: usize| n_spins - 1 - s;

    let assemble = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0usize;
        for (rank, &s) in keep.iter().enumerate() {
            let bit = (kept_idx >> (keep.len() - 1 - rank)) & 1;
            full |= bit << bitpos(s);
        }
        for (rank, &s) in traced.iter().enumerate() {
            let bit = (traced_idx >> (traced.len() - 1 - rank)) & 1;
            full |= bit << bitpos(s);
        }
        full
    };

    let mut out = ComplexMatrix::zeros(kdim, kdim);
    for p in 0..kdim {
        for q in 0..kdim {
            let mut sum = C64::new(0.0, 0.0);
            for r in 0..tdim {
                sum += m.get(assemble(p, r), assemble(q, r));
            }
            out.set(p, q, sum);
        }
    }
    Ok(out)
}
