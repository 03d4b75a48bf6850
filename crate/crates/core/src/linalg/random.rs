//! Seeded random states, Hermitian matrices and unitaries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, CVector, HermitianOperator, QuantumState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian matrix (A + A†)/2 with standard complex Gaussian A.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let a = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::from_unchecked(h)
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuantumState {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    QuantumState::normalized(v).expect("Gaussian vector is non-zero")
}

/// Gram–Schmidt orthonormalization of `first` followed by Gaussian vectors;
/// the result is a unitary whose first column is `first`.
pub fn random_unitary_with_first<R: Rng + ?Sized>(first: &QuantumState, rng: &mut R) -> CMatrix {
    let dim = first.dim();
    let mut cols: Vec<CVector> = vec![first.amplitudes().clone()];
    while cols.len() < dim {
        let mut v = DVector::from_fn(dim, |_, _| gaussian(rng));
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    CMatrix::from_columns(&cols)
}

/// Haar-distributed unitary (Gram–Schmidt on Gaussian columns).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let first = random_state(dim, rng);
    random_unitary_with_first(&first, rng)
}
