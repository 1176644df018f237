//! Truncated two-mode Fock spaces and bosonic ladder operators.
//!
//! Basis states `|n_a, n_b>` are laid out row-major with mode A as the slow
//! index, so `index = n_a * (n_max_b + 1) + n_b`. Every embedding and tensor
//! product in the crate follows that convention.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon-number cutoffs of the two cavity modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    pub n_max_a: usize,
    pub n_max_b: usize,
}

impl HilbertSpec {
    pub fn new(n_max_a: usize, n_max_b: usize) -> Self {
        Self { n_max_a, n_max_b }
    }

    /// Same cutoff on both modes.
    pub fn symmetric(n_max: usize) -> Self {
        Self::new(n_max, n_max)
    }

    pub fn dim_a(&self) -> usize {
        self.n_max_a + 1
    }

    pub fn dim_b(&self) -> usize {
        self.n_max_b + 1
    }

    pub fn dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        debug_assert!(n_a <= self.n_max_a && n_b <= self.n_max_b);
        n_a * self.dim_b() + n_b
    }

    pub fn occupation(&self, index: usize) -> (usize, usize) {
        debug_assert!(index < self.dim());
        (index / self.dim_b(), index % self.dim_b())
    }

    /// Total photon number of each basis state, in index order.
    pub fn excitations(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).map(|i| {
            let (a, b) = self.occupation(i);
            a + b
        })
    }
}

impl Default for HilbertSpec {
    /// Three photons per mode: one level above the two-photon manifold.
    fn default() -> Self {
        Self::symmetric(3)
    }
}

/// Which cavity mode an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

/// Dense square complex matrix acting on a (possibly single-mode) Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

/// Single-mode annihilation operator on `{|0>, ..., |n_max>}`.
pub fn destroy(n_max: usize) -> OperatorMatrix {
    let dim = n_max + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix(m)
}

/// Kronecker product; `a` acts on the slow index.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix(a.0.kronecker(&b.0))
}

/// Embed a single-mode operator on `mode`, identity on the other mode.
pub fn mode_operator(spec: HilbertSpec, mode: Mode, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    let (expected, other) = match mode {
        Mode::A => (spec.dim_a(), spec.dim_b()),
        Mode::B => (spec.dim_b(), spec.dim_a()),
    };
    if op.dim() != expected {
        return Err(Error::DimensionMismatch { expected, actual: op.dim() });
    }
    let id = OperatorMatrix::identity(other);
    Ok(match mode {
        Mode::A => tensor(op, &id),
        Mode::B => tensor(&id, op),
    })
}

/// Annihilation operator of `mode` embedded in the two-mode space.
pub fn annihilation(spec: HilbertSpec, mode: Mode) -> OperatorMatrix {
    let n_max = match mode {
        Mode::A => spec.n_max_a,
        Mode::B => spec.n_max_b,
    };
    mode_operator(spec, mode, &destroy(n_max)).expect("cutoff matches spec")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis(spec: HilbertSpec, n_a: usize, n_b: usize) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(spec.dim());
        v[spec.index(n_a, n_b)] = c(1.0);
        v
    }

    #[test]
    fn destroy_vacuum_only() {
        assert_eq!(destroy(0), OperatorMatrix::zeros(1));
    }

    #[test]
    fn destroy_entries() {
        let a = destroy(2);
        for r in 0..3 {
            for col in 0..3 {
                let expected = match (r, col) {
                    (0, 1) => 1.0,
                    (1, 2) => 2f64.sqrt(),
                    _ => 0.0,
                };
                assert_eq!(a.get(r, col), c(expected));
            }
        }
    }

    #[test]
    fn number_operator_diagonal() {
        let a = destroy(2);
        let n = &a.adjoint() * &a;
        for r in 0..3 {
            for col in 0..3 {
                let expected = if r == col { r as f64 } else { 0.0 };
                assert!((n.get(r, col) - c(expected)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn truncated_commutator_pattern() {
        for n_max in 0..7 {
            let a = destroy(n_max);
            let comm = a.commutator(&a.adjoint());
            for r in 0..=n_max {
                for col in 0..=n_max {
                    let expected = if r != col {
                        0.0
                    } else if r == n_max {
                        -(n_max as f64)
                    } else {
                        1.0
                    };
                    assert!((comm.get(r, col) - c(expected)).norm() < 1e-14, "n_max={n_max} ({r},{col})");
                }
            }
        }
    }

    #[test]
    fn tensor_identities() {
        assert_eq!(
            tensor(&OperatorMatrix::identity(2), &OperatorMatrix::identity(3)),
            OperatorMatrix::identity(6)
        );
        let spec = HilbertSpec::new(1, 1);
        let op = tensor(&destroy(1), &OperatorMatrix::identity(2));
        assert_eq!(op.matrix() * basis(spec, 1, 0), basis(spec, 0, 0));
    }

    #[test]
    fn mode_operator_actions() {
        let s11 = HilbertSpec::new(1, 1);
        let a = mode_operator(s11, Mode::A, &destroy(1)).unwrap();
        assert_eq!(a.matrix() * basis(s11, 1, 1), basis(s11, 0, 1));

        let s22 = HilbertSpec::new(2, 2);
        let b = mode_operator(s22, Mode::B, &destroy(2)).unwrap();
        assert_eq!(b.matrix() * basis(s22, 2, 2), basis(s22, 2, 1) * c(2f64.sqrt()));
    }

    #[test]
    fn mode_operator_rejects_wrong_dim() {
        let spec = HilbertSpec::new(2, 3);
        assert!(matches!(
            mode_operator(spec, Mode::B, &destroy(2)),
            Err(Error::DimensionMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn number_operators_commute() {
        let spec = HilbertSpec::new(3, 2);
        let a = annihilation(spec, Mode::A);
        let b = annihilation(spec, Mode::B);
        let na = &a.adjoint() * &a;
        let nb = &b.adjoint() * &b;
        assert_eq!(na.commutator(&nb), OperatorMatrix::zeros(spec.dim()));
    }

    #[test]
    fn index_round_trip() {
        for (na, nb) in [(0, 0), (3, 1), (4, 4), (1, 0)] {
            let spec = HilbertSpec::new(na.max(2), nb.max(3));
            for i in 0..spec.dim() {
                let (x, y) = spec.occupation(i);
                assert_eq!(spec.index(x, y), i);
            }
        }
    }
}
