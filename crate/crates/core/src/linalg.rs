//! Small dense helpers for 8×8 operators and their real Hermitian coordinates.
//!
//! A Hermitian 8×8 matrix is described by 64 real numbers: the 8 diagonal
//! entries followed by `(Re ρ_ij, Im ρ_ij)` for every `i < j` in row-major
//! order. Lindblad generators map Hermitian matrices to Hermitian matrices,
//! so in these coordinates the generator is a real 64×64 matrix.

use nalgebra::{SMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Operators on the three-qubit Hilbert space.
pub type Matrix8 = SMatrix<C64, 8, 8>;

/// Hilbert-space dimension.
pub const DIM: usize = 8;

/// Number of real Hermitian coordinates, `DIM²`.
pub const COORDS: usize = DIM * DIM;

pub fn commutator(a: &Matrix8, b: &Matrix8) -> Matrix8 {
    a * b - b * a
}

pub fn anticommutator(a: &Matrix8, b: &Matrix8) -> Matrix8 {
    a * b + b * a
}

pub fn trace(m: &Matrix8) -> C64 {
    m.trace()
}

pub fn max_abs(m: &Matrix8) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |m_ij − conj(m_ji)|`.
pub fn hermiticity_defect(m: &Matrix8) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..DIM {
        for j in i..DIM {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &Matrix8) -> Matrix8 {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &Matrix8) -> [f64; DIM] {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut values = [0.0; DIM];
    for (slot, v) in values.iter_mut().zip(eig.eigenvalues.iter()) {
        *slot = *v;
    }
    values.sort_by(f64::total_cmp);
    values
}

/// `½ Σ |λ_k(a − b)|`.
pub fn trace_distance(a: &Matrix8, b: &Matrix8) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
}

/// Position of `(Re ρ_ij, Im ρ_ij)` for `i < j` in the coordinate vector.
fn off_diagonal_slot(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    // pairs preceding row i: Σ_{r<i} (DIM - 1 - r)
    let before = i * (2 * DIM - i - 1) / 2;
    DIM + 2 * (before + (j - i - 1))
}

/// Hermitian coordinates of `m`. Only the diagonal and upper triangle are
/// read, so the result describes the Hermitian matrix that shares them.
pub fn to_coordinates(m: &Matrix8) -> [f64; COORDS] {
    let mut x = [0.0; COORDS];
    for i in 0..DIM {
        x[i] = m[(i, i)].re;
        for j in i + 1..DIM {
            let k = off_diagonal_slot(i, j);
            x[k] = m[(i, j)].re;
            x[k + 1] = m[(i, j)].im;
        }
    }
    x
}

pub fn from_coordinates(x: &[f64]) -> Matrix8 {
    assert_eq!(x.len(), COORDS, "expected {COORDS} Hermitian coordinates");
    let mut m = Matrix8::zeros();
    for i in 0..DIM {
        m[(i, i)] = C64::new(x[i], 0.0);
        for j in i + 1..DIM {
            let k = off_diagonal_slot(i, j);
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Real-linear functional `x ↦ Tr(O ρ(x))` for a Hermitian observable `O`,
/// expressed as a coefficient vector over Hermitian coordinates.
pub fn expectation_functional(observable: &Matrix8) -> [f64; COORDS] {
    let mut w = [0.0; COORDS];
    for i in 0..DIM {
        w[i] = observable[(i, i)].re;
        for j in i + 1..DIM {
            let k = off_diagonal_slot(i, j);
            // Tr(Oρ) picks O_ji ρ_ij + O_ij ρ_ji = 2 Re(O_ji ρ_ij)
            let o = observable[(j, i)];
            w[k] = 2.0 * o.re;
            w[k + 1] = -2.0 * o.im;
        }
    }
    w
}
