//! Spin systems and the two-spin-flip average Hamiltonian.
//!
//! Basis convention, fixed here and imported everywhere else: spin 0 is the
//! most significant bit of the computational-basis index, `|0>` is spin-up
//! (I_z eigenvalue +1/2) and `|1>` spin-down (-1/2). The total magnetization
//! of basis state `idx` is therefore `(N - 2*popcount(idx)) / 2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Default cap on the spin count (dense 4096x4096 matrices).
pub const DEFAULT_SPIN_CAP: usize = 12;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Proton gyromagnetic ratio, rad/(s*T).
pub const GAMMA_PROTON: f64 = 2.675_221_874_4e8;

/// Bit of `index` holding spin `spin` (spin 0 = MSB).
#[inline]
pub fn spin_bit(index: usize, spin: usize, n_spins: usize) -> usize {
    (index >> (n_spins - 1 - spin)) & 1
}

/// Total magnetization of a basis state, in units of hbar.
#[inline]
pub fn magnetization(index: usize, n_spins: usize) -> f64 {
    (n_spins as f64 - 2.0 * index.count_ones() as f64) / 2.0
}

/// Coherence order of the matrix element `<p|rho|q>`.
///
/// `<00|rho|11>` has order +2 under this convention.
#[inline]
pub fn coherence_order(p: usize, q: usize) -> i32 {
    q.count_ones() as i32 - p.count_ones() as i32
}

/// Dipolar coupling constant for spins a distance `r` apart with the
/// internuclear vector at angle `theta` to the external field:
/// `gamma^2 * hbar * (1 - 3 cos^2 theta) / (2 r^3)`, in rad/s.
pub fn dipolar_constant(r: f64, theta: f64, gamma: f64, hbar: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {r}")));
    }
    Ok(gamma * gamma * hbar * (1.0 - 3.0 * theta.cos().powi(2)) / (2.0 * r * r * r))
}

/// A cluster of N spin-1/2 nuclei with pairwise couplings D_jk in rad/s.
///
/// Couplings are stored directly; use [`dipolar_constant`] to convert
/// geometry when needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    n_spins: usize,
    // Upper triangle j < k, row-major: (0,1), (0,2), ..., (N-2,N-1).
    couplings: Vec<f64>,
}

impl SpinSystem {
    pub fn new(n_spins: usize, couplings: Vec<f64>) -> Result<Self> {
        Self::with_spin_cap(n_spins, couplings, DEFAULT_SPIN_CAP)
    }

    /// Like [`SpinSystem::new`] but with an explicit cap on N. Dense
    /// eigendecomposition above 12 spins takes minutes and gigabytes;
    /// raising the cap is on the caller.
    pub fn with_spin_cap(n_spins: usize, couplings: Vec<f64>, cap: usize) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 spins, got {n_spins}"
            )));
        }
        if n_spins > cap {
            return Err(Error::Domain(format!(
                "{n_spins} spins exceeds the cap of {cap}; use with_spin_cap to override"
            )));
        }
        let expect = n_spins * (n_spins - 1) / 2;
        if couplings.len() != expect {
            return Err(Error::Dimension(format!(
                "{n_spins} spins need {expect} couplings, got {}",
                couplings.len()
            )));
        }
        if couplings.iter().any(|d| !d.is_finite()) {
            return Err(Error::Domain("couplings must be finite".into()));
        }
        Ok(Self { n_spins, couplings })
    }

    /// Two spins with coupling `d`.
    pub fn pair(d: f64) -> Self {
        Self::new(2, vec![d]).expect("pair system is always valid")
    }

    /// Three spins on a triangle with one common coupling `d`.
    pub fn ring3(d: f64) -> Self {
        Self::new(3, vec![d, d, d]).expect("ring system is always valid")
    }

    /// Three spins with explicit couplings.
    pub fn triangle(d12: f64, d13: f64, d23: f64) -> Self {
        Self::new(3, vec![d12, d13, d23]).expect("triangle system is always valid")
    }

    /// Linear chain of equally spaced spins with the field along the chain
    /// axis (theta = 0 geometry): D_jk falls off as 1/|j-k|^3 from the
    /// nearest-neighbor coupling `d_nn`.
    pub fn chain(n_spins: usize, d_nn: f64) -> Result<Self> {
        let mut couplings = Vec::with_capacity(n_spins.saturating_mul(n_spins) / 2);
        for j in 0..n_spins {
            for k in (j + 1)..n_spins {
                let sep = (k - j) as f64;
                couplings.push(d_nn / (sep * sep * sep));
            }
        }
        Self::new(n_spins, couplings)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn coupling(&self, j: usize, k: usize) -> f64 {
        assert!(j < k && k < self.n_spins, "coupling index ({j},{k})");
        // offset of row j in the packed upper triangle
        let row_start = j * self.n_spins - j * (j + 1) / 2;
        self.couplings[row_start + (k - j - 1)]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }
}

/// Two-spin-flip average Hamiltonian `H = -1/2 sum_{j<k} D_jk (I+I+ + I-I-)`.
///
/// The result is real, Hermitian, traceless, and connects only basis states
/// whose magnetization differs by one (coherence order +-2).
pub fn build_hamiltonian(sys: &SpinSystem) -> ComplexMatrix {
    let n = sys.n_spins();
    let dim = sys.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for j in 0..n {
        for k in (j + 1)..n {
            let amp = C64::new(-0.5 * sys.coupling(j, k), 0.0);
            if amp.re == 0.0 {
                continue;
            }
            let mask = (1 << (n - 1 - j)) | (1 << (n - 1 - k));
            for q in 0..dim {
                // I+_j I+_k lifts |..1..1..> to |..0..0..>; I-I- is the adjoint.
                if q & mask == mask {
                    let p = q & !mask;
                    h.set(p, q, h.get(p, q) + amp);
                    h.set(q, p, h.get(q, p) + amp);
                }
            }
        }
    }
    h
}

/// The even/odd-popcount invariant blocks of a two-spin-flip Hamiltonian.
#[derive(Debug, Clone)]
pub struct ParityBlocks {
    pub even: ComplexMatrix,
    pub odd: ComplexMatrix,
    /// Basis indices (ascending) spanned by the even block.
    pub even_basis: Vec<usize>,
    /// Basis indices (ascending) spanned by the odd block.
    pub odd_basis: Vec<usize>,
}

/// Basis indices with even popcount, ascending.
pub fn even_parity_basis(n_spins: usize) -> Vec<usize> {
    (0..1usize << n_spins)
        .filter(|i| i.count_ones() % 2 == 0)
        .collect()
}

/// Basis indices with odd popcount, ascending.
pub fn odd_parity_basis(n_spins: usize) -> Vec<usize> {
    (0..1usize << n_spins)
        .filter(|i| i.count_ones() % 2 == 1)
        .collect()
}

/// Split `h` into its even- and odd-parity blocks.
///
/// Fails with a structure error if `h` couples the two parity sectors
/// beyond `structure_tol` — the parity of the number of down spins is a
/// constant of motion for the two-spin-flip Hamiltonian.
pub fn parity_blocks(h: &ComplexMatrix, n_spins: usize, structure_tol: f64) -> Result<ParityBlocks> {
    let dim = 1usize << n_spins;
    if !h.is_square() || h.rows() != dim {
        return Err(Error::Dimension(format!(
            "expected {dim}x{dim} matrix for {n_spins} spins, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let even_basis = even_parity_basis(n_spins);
    let odd_basis = odd_parity_basis(n_spins);

    let mut leak: f64 = 0.0;
    for &p in &even_basis {
        for &q in &odd_basis {
            leak = leak.max(h.get(p, q).norm()).max(h.get(q, p).norm());
        }
    }
    if leak > structure_tol {
        return Err(Error::Structure(format!(
            "matrix couples parity sectors with magnitude {leak:.3e} (tol {structure_tol:.0e})"
        )));
    }

    let extract = |basis: &[usize]| {
        ComplexMatrix::from_fn(basis.len(), basis.len(), |i, j| h.get(basis[i], basis[j]))
    };
    Ok(ParityBlocks {
        even: extract(&even_basis),
        odd: extract(&odd_basis),
        even_basis,
        odd_basis,
    })
}

/// Preset coupling used by the bundled pair/ring/chain systems: 2*pi*2950 rad/s.
pub const PRESET_COUPLING: f64 = 2.0 * PI * 2950.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigendecompose, NumericPolicy};

    #[test]
    fn magnetization_convention() {
        // N=2: |00>,|01>,|10>,|11| -> 1, 0, 0, -1
        let m: Vec<f64> = (0..4).map(|i| magnetization(i, 2)).collect();
        assert_eq!(m, vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(coherence_order(0, 3), 2);
        assert_eq!(coherence_order(3, 0), -2);
    }

    #[test]
    fn dipolar_constant_values() {
        // magic angle zeroes the coupling
        let magic = (1.0f64 / 3.0).sqrt().acos();
        let d = dipolar_constant(2e-10, magic, GAMMA_PROTON, HBAR).unwrap();
        assert!(d.abs() < 1e-6, "{d}");

        // theta = pi/2: +gamma^2 hbar / (2 r^3)
        let g = 2.675e8;
        let d = dipolar_constant(3e-10, PI / 2.0, g, HBAR).unwrap();
        assert!((d - 139742971444.8264).abs() / d.abs() < 1e-12);

        // theta = 0 picks up the factor -2 (value frozen from a direct
        // evaluation of the formula)
        let d = dipolar_constant(3e-10, 0.0, g, HBAR).unwrap();
        assert!((d - -279485942889.6528).abs() / d.abs() < 1e-12);

        assert!(matches!(
            dipolar_constant(0.0, 0.0, g, HBAR),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pair_hamiltonian_by_hand() {
        // expanding I+I+ + I-I- on the 2-spin basis leaves -d/2 at the
        // |00><11| corners only
        let d = 123.456;
        let h = build_hamiltonian(&SpinSystem::pair(d));
        let mut expect = ComplexMatrix::zeros(4, 4);
        expect.set(0, 3, C64::new(-d / 2.0, 0.0));
        expect.set(3, 0, C64::new(-d / 2.0, 0.0));
        assert!(h.max_abs_diff(&expect) == 0.0);

        let zero = build_hamiltonian(&SpinSystem::pair(0.0));
        assert!(zero.max_abs() == 0.0);
    }

    #[test]
    fn hamiltonian_changes_magnetization_by_one() {
        let sys = SpinSystem::new(4, vec![1.0, -0.4, 0.3, 2.0, 0.9, -1.5]).unwrap();
        let h = build_hamiltonian(&sys);
        for p in 0..sys.dim() {
            for q in 0..sys.dim() {
                if h.get(p, q).norm() > 0.0 {
                    let dm = magnetization(p, 4) - magnetization(q, 4);
                    assert!((dm.abs() - 1.0).abs() < 1e-15, "p={p} q={q}");
                }
            }
        }
        // Hermitian and traceless
        assert!(h.hermiticity_deviation() == 0.0);
        assert!(h.trace().norm() == 0.0);
    }

    #[test]
    fn ring_hamiltonian_preserves_parity() {
        let h = build_hamiltonian(&SpinSystem::ring3(7.0));
        for p in 0..8 {
            for q in 0..8 {
                if (p as u32).count_ones() % 2 != (q as u32).count_ones() % 2 {
                    assert!(h.get(p, q).norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn parity_blocks_three_spins() {
        let h = build_hamiltonian(&SpinSystem::ring3(5.0));
        let blocks = parity_blocks(&h, 3, 1e-12).unwrap();
        assert_eq!(blocks.even_basis, vec![0b000, 0b011, 0b101, 0b110]);
        assert_eq!(blocks.odd_basis, vec![0b001, 0b010, 0b100, 0b111]);
        assert_eq!(blocks.even.rows(), 4);
        assert_eq!(blocks.odd.rows(), 4);

        // reassembly reproduces h exactly
        let mut rebuilt = ComplexMatrix::zeros(8, 8);
        for (bi, &p) in blocks.even_basis.iter().enumerate() {
            for (bj, &q) in blocks.even_basis.iter().enumerate() {
                rebuilt.set(p, q, blocks.even.get(bi, bj));
            }
        }
        for (bi, &p) in blocks.odd_basis.iter().enumerate() {
            for (bj, &q) in blocks.odd_basis.iter().enumerate() {
                rebuilt.set(p, q, blocks.odd.get(bi, bj));
            }
        }
        assert!(rebuilt.max_abs_diff(&h) == 0.0);
    }

    #[test]
    fn parity_blocks_pair_and_zero() {
        let h = build_hamiltonian(&SpinSystem::pair(3.0));
        let blocks = parity_blocks(&h, 2, 1e-12).unwrap();
        assert_eq!(blocks.even_basis, vec![0b00, 0b11]);
        assert_eq!(blocks.odd_basis, vec![0b01, 0b10]);
        assert!(blocks.odd.max_abs() == 0.0);
        assert!((blocks.even.get(0, 1) - C64::new(-1.5, 0.0)).norm() == 0.0);

        let zero = ComplexMatrix::zeros(8, 8);
        let blocks = parity_blocks(&zero, 3, 1e-12).unwrap();
        assert!(blocks.even.max_abs() == 0.0 && blocks.odd.max_abs() == 0.0);
    }

    #[test]
    fn parity_blocks_reject_mixed_parity() {
        let mut h = ComplexMatrix::zeros(4, 4);
        h.set(0, 1, C64::new(1e-6, 0.0));
        h.set(1, 0, C64::new(1e-6, 0.0));
        assert!(matches!(
            parity_blocks(&h, 2, 1e-12),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn block_split_preserves_spectrum() {
        let sys = SpinSystem::triangle(1.3, -0.7, 2.1);
        let h = build_hamiltonian(&sys);
        let policy = NumericPolicy::default();
        let (full, _) = hermitian_eigendecompose(&h, &policy).unwrap();
        let blocks = parity_blocks(&h, 3, policy.structure_tol).unwrap();
        let (mut split, _) = hermitian_eigendecompose(&blocks.even, &policy).unwrap();
        let (odd, _) = hermitian_eigendecompose(&blocks.odd, &policy).unwrap();
        split.extend(odd);
        split.sort_by(f64::total_cmp);
        for (a, b) in full.iter().zip(&split) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn chain_couplings_fall_off_cubically() {
        let sys = SpinSystem::chain(4, 8.0).unwrap();
        assert_eq!(sys.coupling(0, 1), 8.0);
        assert_eq!(sys.coupling(1, 2), 8.0);
        assert_eq!(sys.coupling(0, 2), 1.0);
        assert_eq!(sys.coupling(0, 3), 8.0 / 27.0);
    }

    #[test]
    fn spin_system_validation() {
        assert!(matches!(
            SpinSystem::new(1, vec![]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            SpinSystem::new(3, vec![1.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            SpinSystem::new(13, vec![0.0; 78]),
            Err(Error::Domain(_))
        ));
        assert!(SpinSystem::with_spin_cap(3, vec![1.0, 2.0, 3.0], 16).is_ok());
        assert!(matches!(
            SpinSystem::new(2, vec![f64::NAN]),
            Err(Error::Domain(_))
        ));
    }
}
