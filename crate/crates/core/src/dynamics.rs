//! Time evolution of the thermal initial state and decomposition of the
//! evolved density matrix into coherence orders with normalized intensities.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    eigen_matrix_function, hermitian_eigendecompose, ComplexMatrix, NumericPolicy, C64,
};
use crate::spin::{coherence_order, magnetization};

/// Density matrix (or high-temperature deviation matrix) of an N-spin system.
///
/// Hermitian by contract; no positivity is imposed because the thermal
/// initial state `sum_j I_zj` is traceless and indefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    n_spins: usize,
}

impl DensityMatrix {
    pub fn from_matrix(mat: ComplexMatrix, n_spins: usize, policy: &NumericPolicy) -> Result<Self> {
        let dim = 1usize << n_spins;
        if !mat.is_square() || mat.rows() != dim {
            return Err(Error::Dimension(format!(
                "expected {dim}x{dim} matrix for {n_spins} spins, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        mat.check_hermitian(policy.hermitian_tol)?;
        Ok(Self { mat, n_spins })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }
}

/// Thermal deviation density matrix `rho(0) = sum_j I_zj`: diagonal with the
/// basis-state magnetization at each index.
pub fn initial_density(n_spins: usize) -> DensityMatrix {
    let dim = 1usize << n_spins;
    let diag: Vec<f64> = (0..dim).map(|i| magnetization(i, n_spins)).collect();
    DensityMatrix {
        mat: ComplexMatrix::diagonal(&diag),
        n_spins,
    }
}

/// `Tr[rho(0)^2]` for the thermal initial state, `N * 2^(N-2)`.
///
/// This is the normalization that makes the intensity sum rule read exactly 1.
pub fn initial_trace_squared(n_spins: usize) -> f64 {
    n_spins as f64 * 2f64.powi(n_spins as i32 - 2)
}

/// Cached eigendecomposition of a Hamiltonian, for evaluating the exact
/// propagator at many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    evals: Vec<f64>,
    evecs: ComplexMatrix,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix, policy: &NumericPolicy) -> Result<Self> {
        let (evals, evecs) = hermitian_eigendecompose(h, policy)?;
        Ok(Self { evals, evecs })
    }

    /// `exp(-i H tau)`.
    pub fn unitary(&self, tau: f64) -> ComplexMatrix {
        eigen_matrix_function(&self.evals, &self.evecs, |e| (-C64::i() * e * tau).exp())
    }

    /// `exp(-i H tau) rho exp(+i H tau)`. `tau = 0` returns the input as is.
    pub fn evolve(&self, rho0: &DensityMatrix, tau: f64) -> DensityMatrix {
        if tau == 0.0 {
            return rho0.clone();
        }
        let u = self.unitary(tau);
        let mat = u.matmul(rho0.matrix()).matmul(&u.adjoint());
        DensityMatrix {
            mat,
            n_spins: rho0.n_spins,
        }
    }
}

/// One-shot evolution `rho(tau) = exp(-iH tau) rho(0) exp(+iH tau)`.
pub fn evolve(
    h: &ComplexMatrix,
    rho0: &DensityMatrix,
    tau: f64,
    policy: &NumericPolicy,
) -> Result<DensityMatrix> {
    if h.rows() != rho0.dim() || h.cols() != rho0.dim() {
        return Err(Error::Dimension(format!(
            "Hamiltonian is {}x{} but the density matrix is {}x{}",
            h.rows(),
            h.cols(),
            rho0.dim(),
            rho0.dim()
        )));
    }
    Ok(Propagator::new(h, policy)?.evolve(rho0, tau))
}

/// Split a density matrix into coherence-order components.
///
/// Component `n` keeps exactly the elements `<p|rho|q>` with
/// `popcount(q) - popcount(p) == n`. Orders with no nonzero entry are
/// omitted (except order 0, always present), so the values sum back to the
/// input exactly.
pub fn coherence_decompose(rho: &DensityMatrix) -> BTreeMap<i32, ComplexMatrix> {
    let dim = rho.dim();
    let mut parts: BTreeMap<i32, ComplexMatrix> = BTreeMap::new();
    for p in 0..dim {
        for q in 0..dim {
            let z = rho.mat.get(p, q);
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let n = coherence_order(p, q);
            parts
                .entry(n)
                .or_insert_with(|| ComplexMatrix::zeros(dim, dim))
                .set(p, q, z);
        }
    }
    parts
        .entry(0)
        .or_insert_with(|| ComplexMatrix::zeros(dim, dim));
    parts
}

/// Normalized multiple-quantum intensities, folded over sign:
/// the entry at order `n > 0` is `J_{+n} + J_{-n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSpectrum {
    intensities: BTreeMap<u32, f64>,
}

impl CoherenceSpectrum {
    /// Intensity at folded order `n` (zero if absent).
    pub fn intensity(&self, n: u32) -> f64 {
        self.intensities.get(&n).copied().unwrap_or(0.0)
    }

    /// All (order, intensity) pairs, ascending in order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.intensities.iter().map(|(&n, &j)| (n, j))
    }

    /// `J_0 + sum_{n>=1} J_n`; equals 1 by the sum rule.
    pub fn total(&self) -> f64 {
        self.intensities.values().sum()
    }
}

fn intensities_from_parts(
    parts: &BTreeMap<i32, ComplexMatrix>,
    max_order: u32,
    divisor: f64,
) -> CoherenceSpectrum {
    // Tr[rho_n rho_{-n}] = sum of |entries of rho_n|^2 because rho_{-n} = rho_n^dagger.
    let power = |n: i32| -> f64 {
        parts
            .get(&n)
            .map(|m| m.entries().iter().map(|z| z.norm_sqr()).sum())
            .unwrap_or(0.0)
    };
    let mut intensities = BTreeMap::new();
    for n in 0..=max_order {
        let raw = if n == 0 {
            power(0)
        } else {
            power(n as i32) + power(-(n as i32))
        };
        intensities.insert(n, raw / divisor);
    }
    CoherenceSpectrum { intensities }
}

/// Normalized coherence-order intensities
/// `J_n = Tr[rho_n(tau) rho_{-n}(tau)] / Tr[rho(0)^2]`, folded over sign.
pub fn intensities(rho_tau: &DensityMatrix, rho0: &DensityMatrix) -> Result<CoherenceSpectrum> {
    if rho_tau.dim() != rho0.dim() {
        return Err(Error::Dimension(format!(
            "density matrices differ in size: {} vs {}",
            rho_tau.dim(),
            rho0.dim()
        )));
    }
    let divisor: f64 = rho0
        .matrix()
        .entries()
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    if divisor < 1e-300 {
        return Err(Error::Normalization(
            "Tr[rho(0)^2] vanishes; intensities are undefined".into(),
        ));
    }
    let parts = coherence_decompose(rho_tau);
    Ok(intensities_from_parts(
        &parts,
        rho_tau.n_spins() as u32,
        divisor,
    ))
}

/// Intensities computed from one parity block alone.
///
/// `basis` maps block rows to full-system basis indices. For an odd number
/// of spins the two blocks carry identical profiles, so the block result is
/// doubled against the full-system normalization `Tr[rho(0)^2]`.
pub fn intensities_from_block(
    block_rho_tau: &ComplexMatrix,
    basis: &[usize],
    n_spins: usize,
) -> Result<CoherenceSpectrum> {
    if !block_rho_tau.is_square() || block_rho_tau.rows() != basis.len() {
        return Err(Error::Dimension(format!(
            "block is {}x{} but the basis has {} states",
            block_rho_tau.rows(),
            block_rho_tau.cols(),
            basis.len()
        )));
    }
    let divisor = initial_trace_squared(n_spins);
    let mut parts: BTreeMap<i32, f64> = BTreeMap::new();
    for (bi, &p) in basis.iter().enumerate() {
        for (bj, &q) in basis.iter().enumerate() {
            let z = block_rho_tau.get(bi, bj);
            if z.norm_sqr() == 0.0 {
                continue;
            }
            *parts.entry(coherence_order(p, q)).or_insert(0.0) += z.norm_sqr();
        }
    }
    let mut intensities = BTreeMap::new();
    for n in 0..=n_spins as u32 {
        let raw = if n == 0 {
            parts.get(&0).copied().unwrap_or(0.0)
        } else {
            parts.get(&(n as i32)).copied().unwrap_or(0.0)
                + parts.get(&-(n as i32)).copied().unwrap_or(0.0)
        };
        intensities.insert(n, 2.0 * raw / divisor);
    }
    Ok(CoherenceSpectrum { intensities })
}

/// Per-order reality report for the evolved thermal state: components of
/// order `n = 0 (mod 4)` are purely real, those of order `n = 2 (mod 4)`
/// purely imaginary.
#[derive(Debug, Clone)]
pub struct OrderSplitReport {
    /// order -> largest out-of-phase magnitude found in that component
    pub deviations: BTreeMap<u32, f64>,
    pub tolerance: f64,
}

impl OrderSplitReport {
    pub fn all_pass(&self) -> bool {
        self.deviations.values().all(|&d| d <= self.tolerance)
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.values().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Check the real/imaginary split of coherence components by order.
pub fn order_reality_split(rho: &DensityMatrix, tolerance: f64) -> OrderSplitReport {
    let parts = coherence_decompose(rho);
    let mut deviations = BTreeMap::new();
    for (&n, part) in &parts {
        if n < 0 {
            continue; // rho_{-n} = rho_n^dagger carries the same deviation
        }
        let dev = part
            .entries()
            .iter()
            .map(|z| if n % 4 == 0 { z.im.abs() } else { z.re.abs() })
            .fold(0.0, f64::max);
        let entry = deviations.entry(n as u32).or_insert(0.0f64);
        *entry = entry.max(dev);
    }
    OrderSplitReport {
        deviations,
        tolerance,
    }
}
