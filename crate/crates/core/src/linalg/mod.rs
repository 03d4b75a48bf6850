//! Dense complex linear algebra: states, Hermitian operators, spectral
//! decomposition and exact time evolution.

mod householder;
pub mod random;
mod tridiag;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SpreadError};

pub use tridiag::SymmetricTridiagonal;
pub(crate) use tridiag::{ql_implicit, sort_pairs};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Normalized vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Wraps `amplitudes`, rejecting vectors whose squared norm is not 1.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm_sq = amplitudes.norm_squared();
        if amplitudes.is_empty() || !((norm_sq - 1.0).abs() <= Self::NORM_TOLERANCE) {
            return Err(SpreadError::NotNormalized(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(SpreadError::NotNormalized(norm * norm));
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(SpreadError::invalid(
                "index",
                format!("{index} out of range for dimension {dim}"),
            ));
        }
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub(crate) fn from_unchecked(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_inner(self) -> CVector {
        self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Dense Hermitian matrix. The spectral decomposition is computed on first
/// use and cached.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    entries: CMatrix,
    spectral: OnceLock<SpectralDecomposition>,
}

impl HermitianOperator {
    pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(SpreadError::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.is_empty() {
            return Err(SpreadError::invalid("entries", "operator must be non-empty"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SpreadError::invalid("entries", "entries must be finite"));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = Self::HERMITICITY_TOLERANCE * scale;
        let n = entries.nrows();
        for col in 0..n {
            for row in col..n {
                let deviation = (entries[(row, col)] - entries[(col, row)].conj()).norm();
                if deviation > tol {
                    return Err(SpreadError::NotHermitian { row, col, deviation });
                }
            }
        }
        Ok(Self::from_unchecked(entries))
    }

    pub(crate) fn from_unchecked(entries: CMatrix) -> Self {
        Self {
            entries,
            spectral: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    /// Dense form of a real symmetric tridiagonal matrix.
    pub fn from_tridiagonal(t: &SymmetricTridiagonal) -> Self {
        let n = t.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(t.diag[i], 0.0);
        }
        for (i, &b) in t.off.iter().enumerate() {
            m[(i, i + 1)] = Complex64::new(b, 0.0);
            m[(i + 1, i)] = Complex64::new(b, 0.0);
        }
        Self::from_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.entries * v
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn expectation(&self, psi: &QuantumState) -> Result<f64> {
        check_dim(self.dim(), psi.dim())?;
        Ok(psi.amplitudes.dotc(&self.apply(&psi.amplitudes)).re)
    }

    /// H + c·I.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.entries.clone();
        for i in 0..self.dim() {
            m[(i, i)] += Complex64::new(c, 0.0);
        }
        Self::from_unchecked(m)
    }

    /// U† H U for a unitary `u`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        Self::new(u.adjoint() * &self.entries * u)
    }

    /// Cached spectral decomposition.
    pub fn spectral(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let s = decompose(&self.entries)?;
        Ok(self.spectral.get_or_init(|| s))
    }

    /// Eigenvalues only, ascending; uses the cache when present.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if let Some(s) = self.spectral.get() {
            return Ok(s.eigenvalues.clone());
        }
        let tri = householder::tridiagonalize(&self.entries, false);
        let (mut d, mut e) = (tri.diag, tri.off);
        ql_implicit::<f64>(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Cheap upper bound on the operator norm (maximum absolute row sum).
    pub fn norm_upper_bound(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// U Λ U†.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(e);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Energy-basis coefficients c_a = ⟨E_a|ψ⟩.
    pub fn coefficients(&self, psi: &QuantumState) -> Result<CVector> {
        check_dim(self.dim(), psi.dim())?;
        Ok(self.eigenvectors.ad_mul(psi.amplitudes()))
    }

    /// U e^{-iΛt} U† ψ.
    pub fn evolve(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        let c = self.coefficients(psi)?;
        Ok(QuantumState::from_unchecked(self.evolve_coefficients(&c, t)))
    }

    /// Maps energy-basis coefficients at time 0 to the state at time `t`.
    pub fn evolve_coefficients(&self, c: &CVector, t: f64) -> CVector {
        let phased = CVector::from_iterator(
            c.len(),
            c.iter()
                .zip(&self.eigenvalues)
                .map(|(ca, &e)| ca * Complex64::from_polar(1.0, -e * t)),
        );
        &self.eigenvectors * phased
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }
}

fn decompose(a: &CMatrix) -> Result<SpectralDecomposition> {
    let tri = householder::tridiagonalize(a, true);
    let (mut d, mut e) = (tri.diag, tri.off);
    let mut z = tri.q.expect("requested transformation");
    ql_implicit(&mut d, &mut e, Some(&mut z))?;
    let (eigenvalues, eigenvectors) = sort_pairs(d, z);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SpreadError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn eigendecompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    h.spectral().cloned()
}

/// |Ψ(t)⟩ = e^{-iHt}|ψ0⟩.
pub fn evolve(h: &HermitianOperator, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    check_dim(h.dim(), psi0.dim())?;
    h.spectral()?.evolve(psi0, t)
}

/// Spectral norm, max_a |E_a|.
pub fn operator_norm(h: &HermitianOperator) -> Result<f64> {
    let ev = h.eigenvalues()?;
    Ok(ev.iter().fold(0.0, |acc, e| acc.max(e.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        let s = eigendecompose(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 1.0]);
        assert!((s.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((s.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let h = HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        ))
        .unwrap();
        let s = eigendecompose(&h).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2, 3, 6, 17, 40] {
            let h = random_hermitian(dim, &mut rng);
            let s = eigendecompose(&h).unwrap();
            let norm = s.norm();
            assert!((s.reconstruct() - h.entries()).camax() < 1e-10 * norm.max(1.0));
            let gram = s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!((gram - CMatrix::identity(dim, dim)).camax() < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let ev = h.eigenvalues();
            let fresh = HermitianOperator::new(h.entries().clone())
                .unwrap()
                .eigenvalues()
                .unwrap();
            for (a, b) in ev.unwrap().iter().zip(&fresh) {
                assert!((a - b).abs() < 1e-12 * norm.max(1.0));
            }
        }
    }

    #[test]
    fn complex_off_diagonal_phases() {
        // Already tridiagonal with complex couplings: Householder steps must
        // still produce a real off-diagonal.
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 0.),
                c(0., 2.),
                c(0., 0.),
                c(0., -2.),
                c(0., 0.),
                c(1., 1.),
                c(0., 0.),
                c(1., -1.),
                c(-1., 0.),
            ],
        );
        let h = HermitianOperator::new(m.clone()).unwrap();
        let s = eigendecompose(&h).unwrap();
        assert!((s.reconstruct() - m).camax() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0.5, 0.), c(0., 0.)]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(SpreadError::NotHermitian { .. })
        ));
        let m = CMatrix::from_row_slice(1, 1, &[c(0., 1.)]);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn evolve_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(4, &mut rng);
        let psi = random_state(4, &mut rng);
        let t = 0.7;
        let got = evolve(&h, &psi, t).unwrap();
        // Scale so the 12th-order series is accurate: apply exp(-iHt/8) eight times.
        let steps = 8;
        let dt = t / steps as f64;
        let mut v = psi.amplitudes().clone();
        for _ in 0..steps {
            let mut term = v.clone();
            let mut acc = v.clone();
            for k in 1..=12 {
                term = h.apply(&term) * c(0.0, -dt / k as f64);
                acc += &term;
            }
            v = acc;
        }
        assert!((got.amplitudes() - v).camax() < 1e-9);
    }

    #[test]
    fn evolve_eigenstate_picks_up_phase() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, -2.0, 3.0]).unwrap();
        let psi = QuantumState::basis(3, 1).unwrap();
        let out = evolve(&h, &psi, 1.3).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * 1.3);
        assert!((out.amplitudes()[1] - expected).norm() < 1e-15);
        assert!(evolve(&h, &psi, 0.0).unwrap().amplitudes() == psi.amplitudes());
    }

    #[test]
    fn evolve_dimension_mismatch() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, -2.0]).unwrap();
        let psi = QuantumState::basis(3, 1).unwrap();
        assert!(matches!(
            evolve(&h, &psi, 1.0),
            Err(SpreadError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn operator_norm_examples() {
        let h = HermitianOperator::from_real_diagonal(&[3.0, -5.0]).unwrap();
        assert_eq!(operator_norm(&h).unwrap(), 5.0);
        let z = HermitianOperator::new(CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(operator_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let h2 = h.entries() * h.entries();
        let mut v = random_state(5, &mut rng).into_inner();
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = &h2 * &v;
            lambda = w.norm();
            v = w / c(lambda, 0.0);
        }
        assert!((operator_norm(&h).unwrap() - lambda.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn state_validation() {
        assert!(QuantumState::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(QuantumState::normalized(CVector::zeros(2)).is_err());
        let s = QuantumState::normalized(CVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)])).unwrap();
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-15);
    }
}
