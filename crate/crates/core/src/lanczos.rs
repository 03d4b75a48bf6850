//! Lanczos tridiagonalization with full reorthogonalization.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpreadError};
use crate::linalg::{
    check_dim, operator_norm, CMatrix, CVector, HermitianOperator, QuantumState, SymmetricTridiagonal,
};
use num_complex::Complex64;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Lanczos coefficients and (optionally) the Krylov basis.
///
/// `a[n]` is aₙ for n = 0..L−1 and `b[n - 1]` is bₙ for n = 1..L−1. The
/// basis may be absent when the decomposition was read back from a
/// coefficient-only file.
#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub basis: Option<Vec<QuantumState>>,
}

impl KrylovDecomposition {
    /// Coefficient-only decomposition; validates lengths and bₙ > 0.
    pub fn from_coefficients(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(SpreadError::invalid("a", "at least one coefficient required"));
        }
        if b.len() + 1 != a.len() {
            return Err(SpreadError::DimensionMismatch {
                expected: a.len() - 1,
                found: b.len(),
            });
        }
        if a.iter().any(|x| !x.is_finite()) || b.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(SpreadError::invalid(
                "b",
                "coefficients must be finite with every b_n > 0",
            ));
        }
        Ok(Self { a, b, basis: None })
    }

    /// Krylov dimension L.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn tridiagonal(&self) -> SymmetricTridiagonal {
        SymmetricTridiagonal {
            diag: self.a.clone(),
            off: self.b.clone(),
        }
    }

    pub fn basis(&self) -> Result<&[QuantumState]> {
        self.basis
            .as_deref()
            .ok_or_else(|| SpreadError::invalid("basis", "Krylov basis vectors were not stored"))
    }

    /// Krylov vectors as the columns of a dim × L matrix.
    pub fn basis_matrix(&self) -> Result<CMatrix> {
        let basis = self.basis()?;
        let cols: Vec<CVector> = basis.iter().map(|k| k.amplitudes().clone()).collect();
        Ok(CMatrix::from_columns(&cols))
    }

    /// Same coefficients rescaled by `1/scale`.
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(SpreadError::invalid("scale", "must be positive and finite"));
        }
        Ok(Self {
            a: self.a.iter().map(|x| x / scale).collect(),
            b: self.b.iter().map(|x| x / scale).collect(),
            basis: None,
        })
    }

    pub fn to_record(&self, include_basis: bool) -> KrylovRecord {
        let basis = if include_basis {
            self.basis.as_ref().map(|b| {
                b.iter()
                    .map(|k| k.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            })
        } else {
            None
        };
        KrylovRecord {
            a: self.a.clone(),
            b: self.b.clone(),
            dimension: self.len(),
            basis,
        }
    }

    pub fn from_record(record: KrylovRecord) -> Result<Self> {
        if record.dimension != record.a.len() {
            return Err(SpreadError::Malformed(format!(
                "L = {} but {} diagonal coefficients",
                record.dimension,
                record.a.len()
            )));
        }
        let mut k = Self::from_coefficients(record.a, record.b)?;
        if let Some(rows) = record.basis {
            if rows.len() != k.len() {
                return Err(SpreadError::Malformed(format!(
                    "{} basis vectors for L = {}",
                    rows.len(),
                    k.len()
                )));
            }
            let basis = rows
                .into_iter()
                .map(|v| QuantumState::from_slice(&v.iter().map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            k.basis = Some(basis);
        }
        Ok(k)
    }
}

/// JSON form `{a, b, L, basis?}`, complex entries as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovRecord {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "L")]
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<[f64; 2]>>>,
}

/// Lanczos with the termination threshold `tol · ‖H‖`.
pub fn lanczos(h: &HermitianOperator, psi0: &QuantumState, tol: f64) -> Result<KrylovDecomposition> {
    check_dim(h.dim(), psi0.dim())?;
    let scale = operator_norm(h)?;
    lanczos_scaled(h, psi0, tol, scale)
}

/// Lanczos with an explicit norm scale: stops once a candidate bₙ falls
/// below `tol · scale` or the basis spans the whole space.
pub fn lanczos_scaled(h: &HermitianOperator, psi0: &QuantumState, tol: f64, scale: f64) -> Result<KrylovDecomposition> {
    check_dim(h.dim(), psi0.dim())?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpreadError::invalid("tol", "must be positive"));
    }
    let norm_sq = psi0.amplitudes().norm_squared();
    if (norm_sq - 1.0).abs() > QuantumState::NORM_TOLERANCE {
        return Err(SpreadError::NotNormalized(norm_sq));
    }
    let dim = h.dim();
    let threshold = tol * scale;
    let mut basis: Vec<CVector> = vec![psi0.amplitudes().clone()];
    let mut a: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    loop {
        let n = basis.len() - 1;
        let mut w = h.apply(&basis[n]);
        let an = basis[n].dotc(&w).re;
        a.push(an);
        w.axpy(Complex64::new(-an, 0.0), &basis[n], Complex64::new(1.0, 0.0));
        if n > 0 {
            w.axpy(Complex64::new(-b[n - 1], 0.0), &basis[n - 1], Complex64::new(1.0, 0.0));
        }
        if basis.len() == dim {
            break;
        }
        for _ in 0..2 {
            for k in &basis {
                let proj = k.dotc(&w);
                w.axpy(-proj, k, Complex64::new(1.0, 0.0));
            }
        }
        let bn = w.norm();
        if !(bn >= threshold) || bn == 0.0 {
            break;
        }
        b.push(bn);
        basis.push(w / Complex64::new(bn, 0.0));
    }
    let basis = basis.into_iter().map(QuantumState::from_unchecked).collect();
    Ok(KrylovDecomposition {
        a,
        b,
        basis: Some(basis),
    })
}

/// 𝒦_m = Σₙ nᵐ |Kₙ⟩⟨Kₙ| in the original basis.
pub fn spreading_operator(k: &KrylovDecomposition, m: u32) -> Result<HermitianOperator> {
    if m < 1 {
        return Err(SpreadError::invalid("m", "must be at least 1"));
    }
    let basis = k.basis()?;
    let dim = basis[0].dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (n, kn) in basis.iter().enumerate().skip(1) {
        let w = (n as f64).powi(m as i32);
        let v = kn.amplitudes();
        out.ger(Complex64::new(w, 0.0), v, &v.conjugate(), Complex64::new(1.0, 0.0));
    }
    Ok(HermitianOperator::from_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, random_state, random_unitary};
    use crate::linalg::{eigendecompose, HermitianOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tridiagonal_residual(h: &HermitianOperator, k: &KrylovDecomposition) -> f64 {
        let q = k.basis_matrix().unwrap();
        let projected = q.adjoint() * h.entries() * &q;
        let t = HermitianOperator::from_tridiagonal(&k.tridiagonal());
        (projected - t.entries()).camax()
    }

    #[test]
    fn eigenstate_gives_one_dimensional_space() {
        let h = HermitianOperator::from_real_diagonal(&[0.3, 1.5, -2.0]).unwrap();
        let psi = QuantumState::basis(3, 1).unwrap();
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.a, vec![1.5]);
        assert!(k.b.is_empty());
    }

    #[test]
    fn two_level_hand_computation() {
        let (e0, e1) = (0.4, -1.1);
        let h = HermitianOperator::from_real_diagonal(&[e0, e1]).unwrap();
        let s = 0.5f64.sqrt();
        let psi = QuantumState::from_slice(&[c(s), c(s)]).unwrap();
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(k.len(), 2);
        assert!((k.a[0] - (e0 + e1) / 2.0).abs() < 1e-15);
        assert!((k.b[0] - (e0 - e1).abs() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_systems_orthonormal_and_tridiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for dim in 2..=16 {
            let h = random_hermitian(dim, &mut rng);
            let psi = random_state(dim, &mut rng);
            let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
            assert_eq!(k.len(), dim);
            let q = k.basis_matrix().unwrap();
            let gram = q.adjoint() * &q;
            assert!((gram - CMatrix::identity(dim, dim)).camax() < 1e-10);
            let norm = operator_norm(&h).unwrap();
            assert!(tridiagonal_residual(&h, &k) < 1e-9 * norm);
            assert!((k.basis().unwrap()[0].inner(&psi).norm() - 1.0).abs() < 1e-12);
            assert!(k.b.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn unitary_and_shift_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(6, &mut rng);
        let psi = random_state(6, &mut rng);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();

        let u = random_unitary(6, &mut rng);
        let hu = h.conjugated(&u).unwrap();
        let psiu = QuantumState::from_unchecked(u.adjoint() * psi.amplitudes());
        let ku = lanczos(&hu, &psiu, DEFAULT_TOLERANCE).unwrap();
        for (x, y) in k.a.iter().zip(&ku.a).chain(k.b.iter().zip(&ku.b)) {
            assert!((x - y).abs() < 1e-9);
        }
        for (kn, kun) in k.basis().unwrap().iter().zip(ku.basis().unwrap()) {
            let rotated = QuantumState::from_unchecked(u.adjoint() * kn.amplitudes());
            assert!((rotated.inner(kun).norm() - 1.0).abs() < 1e-9);
        }

        let ks = lanczos(&h.shifted(2.5), &psi, DEFAULT_TOLERANCE).unwrap();
        for (x, y) in k.a.iter().zip(&ks.a) {
            assert!((x + 2.5 - y).abs() < 1e-10);
        }
        for (x, y) in k.b.iter().zip(&ks.b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn krylov_vectors_lie_in_power_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_hermitian(7, &mut rng);
        let psi = random_state(7, &mut rng);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        let mut powers = vec![psi.amplitudes().clone()];
        for n in 1..7 {
            let next = h.apply(&powers[n - 1]);
            powers.push(next);
            // Orthonormalize the power vectors and project K_n.
            let span = CMatrix::from_columns(&powers);
            let qr = span.qr();
            let q = qr.q();
            let kn = k.basis().unwrap()[n].amplitudes();
            let residual = kn - &q * q.ad_mul(kn);
            assert!(residual.norm() < 1e-9, "n = {n}: {}", residual.norm());
        }
    }

    #[test]
    fn spreading_operator_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(4, &mut rng);
        let psi = random_state(4, &mut rng);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        let k2 = spreading_operator(&k, 2).unwrap();
        let ev = eigendecompose(&k2).unwrap().eigenvalues;
        for (got, want) in ev.iter().zip([0.0, 1.0, 4.0, 9.0]) {
            assert!((got - want).abs() < 1e-10);
        }

        let single = HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let e0 = QuantumState::basis(2, 0).unwrap();
        let k1 = lanczos(&single, &e0, DEFAULT_TOLERANCE).unwrap();
        assert!(spreading_operator(&k1, 1)
            .unwrap()
            .entries()
            .iter()
            .all(|z| z.norm() == 0.0));
        assert!(spreading_operator(&k1, 0).is_err());
    }

    #[test]
    fn projector_for_two_dimensional_space() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0, 3.0]).unwrap();
        let s = 0.5f64.sqrt();
        let psi = QuantumState::from_slice(&[c(s), c(s), c(0.0)]).unwrap();
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(k.len(), 2);
        let p = spreading_operator(&k, 1).unwrap();
        let k1 = k.basis().unwrap()[1].amplitudes();
        let expected = k1 * k1.adjoint();
        assert!((p.entries() - expected).camax() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        let bad = QuantumState::from_unchecked(CVector::from_vec(vec![c(1.0), c(1.0)]));
        assert!(matches!(lanczos(&h, &bad, 1e-12), Err(SpreadError::NotNormalized(_))));
        let psi = QuantumState::basis(2, 0).unwrap();
        assert!(lanczos(&h, &psi, 0.0).is_err());
        assert!(lanczos(&h, &psi, -1.0).is_err());
    }

    #[test]
    fn record_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(5, &mut rng);
        let psi = random_state(5, &mut rng);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        let json = serde_json::to_string(&k.to_record(true)).unwrap();
        let back = KrylovDecomposition::from_record(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.a, k.a);
        assert_eq!(back.b, k.b);
        assert_eq!(back.basis_matrix().unwrap(), k.basis_matrix().unwrap());
        let bare: KrylovRecord = serde_json::from_str(&serde_json::to_string(&k.to_record(false)).unwrap()).unwrap();
        assert!(bare.basis.is_none());
        assert_eq!(bare.dimension, 5);
    }
}
