//! Energy-basis forms of the GSC and their long-time averages.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_order, check_times};
use crate::error::{Result, SpreadError};
use crate::lanczos::{spreading_operator, KrylovDecomposition};
use crate::linalg::{check_dim, CMatrix, CVector, HermitianOperator, QuantumState, SpectralDecomposition};

/// A_m(E_a, E_b) = ⟨E_a|𝒦_m|E_b⟩.
fn energy_matrix(s: &SpectralDecomposition, k: &KrylovDecomposition, m: u32) -> Result<CMatrix> {
    let km = spreading_operator(k, m)?;
    check_dim(s.dim(), km.dim())?;
    Ok(s.eigenvectors.adjoint() * km.entries() * &s.eigenvectors)
}

/// C_m(t) = Σ_{a,b} A_m(E_a,E_b) c̄_a c_b e^{i(E_a−E_b)t}.
pub fn gsc_energy_basis(
    h: &HermitianOperator,
    psi0: &QuantumState,
    k: &KrylovDecomposition,
    m: u32,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_order(m)?;
    check_times(times)?;
    let s = h.spectral()?;
    let a = energy_matrix(s, k, m)?;
    let c = s.coefficients(psi0)?;
    Ok(times
        .par_iter()
        .map(|&t| {
            let x = CVector::from_iterator(
                c.len(),
                c.iter()
                    .zip(&s.eigenvalues)
                    .map(|(cb, &e)| cb * Complex64::from_polar(1.0, -e * t)),
            );
            x.dotc(&(&a * &x)).re
        })
        .collect())
}

fn nondegenerate(h: &HermitianOperator) -> Result<&SpectralDecomposition> {
    let s = h.spectral()?;
    if s.dim() > 1 {
        let gap = s.min_gap();
        let tolerance = 1e-10 * s.norm();
        if gap < tolerance || gap == 0.0 {
            return Err(SpreadError::DegenerateSpectrum { gap, tolerance });
        }
    }
    Ok(s)
}

/// C̄_m = Σ_a A_m(E_a,E_a) |c_a|².
pub fn long_time_average(h: &HermitianOperator, psi0: &QuantumState, k: &KrylovDecomposition, m: u32) -> Result<f64> {
    check_order(m)?;
    let s = nondegenerate(h)?;
    let a = energy_matrix(s, k, m)?;
    let c = s.coefficients(psi0)?;
    Ok(c.iter().enumerate().map(|(i, ci)| a[(i, i)].re * ci.norm_sqr()).sum())
}

/// Long-time average of the variance:
/// Σ_a A₂(a,a)|c_a|² − (Σ_a A₁(a,a)|c_a|²)² − Σ_{a≠b} |A₁(a,b)|² |c_a|² |c_b|².
pub fn long_time_variance(h: &HermitianOperator, psi0: &QuantumState, k: &KrylovDecomposition) -> Result<f64> {
    let s = nondegenerate(h)?;
    let a1 = energy_matrix(s, k, 1)?;
    let a2 = energy_matrix(s, k, 2)?;
    let w: Vec<f64> = s.coefficients(psi0)?.iter().map(|z| z.norm_sqr()).collect();
    let n = w.len();
    let second: f64 = (0..n).map(|i| a2[(i, i)].re * w[i]).sum();
    let first: f64 = (0..n).map(|i| a1[(i, i)].re * w[i]).sum();
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                cross += a1[(i, j)].norm_sqr() * w[i] * w[j];
            }
        }
    }
    Ok(second - first * first - cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::{lanczos, DEFAULT_TOLERANCE};
    use crate::linalg::random::{random_hermitian, random_state};
    use crate::spread::SpreadSystem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(dim: usize, seed: u64) -> (HermitianOperator, QuantumState, KrylovDecomposition) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let psi = random_state(dim, &mut rng);
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        (h, psi, k)
    }

    #[test]
    fn matches_krylov_path() {
        let (h, psi, k) = setup(4, 31);
        let sys = SpreadSystem::from_hamiltonian(h.clone(), psi.clone(), DEFAULT_TOLERANCE).unwrap();
        let times: Vec<f64> = (0..25).map(|i| 0.37 * i as f64).collect();
        let prof = sys.profile(&times).unwrap();
        for m in 1..=2 {
            let e = gsc_energy_basis(&h, &psi, &k, m, &times).unwrap();
            for (x, y) in e.iter().zip(prof.gsc(m).unwrap()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_dimensional_space_is_zero() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let psi = QuantumState::basis(2, 0).unwrap();
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        assert!(gsc_energy_basis(&h, &psi, &k, 1, &[0.0, 3.0])
            .unwrap()
            .iter()
            .all(|&c| c == 0.0));
        assert_eq!(long_time_average(&h, &psi, &k, 1).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 2.0]).unwrap();
        let psi = QuantumState::normalized(CVector::from_element(3, Complex64::new(1.0, 0.0))).unwrap();
        let k = lanczos(&h, &psi, DEFAULT_TOLERANCE).unwrap();
        assert!(matches!(
            long_time_average(&h, &psi, &k, 1),
            Err(SpreadError::DegenerateSpectrum { .. })
        ));
        assert!(long_time_variance(&h, &psi, &k).is_err());
    }

    #[test]
    fn window_average_converges() {
        let (h, psi, k) = setup(4, 12);
        let sys = SpreadSystem::from_hamiltonian(h.clone(), psi.clone(), DEFAULT_TOLERANCE).unwrap();
        let norm = sys.norm().unwrap();
        let big_t = 1e4 / norm;
        let steps = 200_000;
        let times: Vec<f64> = (0..=steps).map(|i| big_t * i as f64 / steps as f64).collect();
        let prof = sys.profile(&times).unwrap();
        let trapezoid = |f: &[f64]| {
            let inner: f64 = f[1..f.len() - 1].iter().sum();
            (inner + 0.5 * (f[0] + f[f.len() - 1])) / steps as f64
        };
        let c1 = prof.gsc(1).unwrap();
        let c2 = prof.gsc(2).unwrap();
        let var: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| b - a * a).collect();
        let avg1 = long_time_average(&h, &psi, &k, 1).unwrap();
        let lt_var = long_time_variance(&h, &psi, &k).unwrap();
        assert!((trapezoid(&c1) - avg1).abs() < 0.01 * avg1);
        assert!((trapezoid(&var) - lt_var).abs() < 0.01 * lt_var);
    }
}
