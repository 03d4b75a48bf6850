//! Fubini–Study speed of the u-evolution, basis cost functions and the
//! Krylov minimization horizon.

use num_complex::Complex64;

use super::{check_times, SpreadSystem};
use crate::error::{Result, SpreadError};
use crate::lanczos::KrylovDecomposition;
use crate::linalg::{check_dim, evolve, CMatrix, HermitianOperator, QuantumState};

const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

/// Compares 1 − |⟨Ψ(t)|e^{−i du 𝒦}|Ψ(t)⟩|² with (Δn)²·du² (normalization
/// constant 1). Returns `(lhs, rhs)`.
pub fn fubini_speed_check(
    k: &KrylovDecomposition,
    h: &HermitianOperator,
    psi0: &QuantumState,
    t: f64,
    du: f64,
) -> Result<(f64, f64)> {
    if !(du > 0.0 && du.is_finite()) {
        return Err(SpreadError::invalid("du", "must be positive"));
    }
    let psi_t = evolve(h, psi0, t)?;
    let basis = k.basis()?;
    let mut rotated = psi_t.amplitudes().clone();
    let (mut mean, mut second) = (0.0, 0.0);
    for (n, kn) in basis.iter().enumerate() {
        let phi = kn.inner(&psi_t);
        let p = phi.norm_sqr();
        let nf = n as f64;
        mean += nf * p;
        second += nf * nf * p;
        let shift = Complex64::from_polar(1.0, -du * nf) - 1.0;
        rotated.axpy(phi * shift, kn.amplitudes(), Complex64::new(1.0, 0.0));
    }
    let overlap = psi_t.amplitudes().dotc(&rotated);
    let lhs = 1.0 - overlap.norm_sqr();
    let rhs = (second - mean * mean).max(0.0) * du * du;
    Ok((lhs, rhs))
}

fn check_orthonormal(vectors: &[&crate::linalg::CVector]) -> Result<()> {
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (a.dotc(b) - target).norm();
            if dev > ORTHONORMALITY_TOLERANCE {
                return Err(SpreadError::invalid(
                    "basis",
                    format!("not orthonormal: ⟨B{i}|B{j}⟩ deviates by {dev:.3e}"),
                ));
            }
        }
    }
    Ok(())
}

/// 𝒞_B(t) = Σₙ cₙ |⟨Bₙ|Ψ(t)⟩|² for an orthonormal basis whose first vector
/// is the initial state.
pub fn cost_in_basis(basis: &[QuantumState], psi_t: &QuantumState, c: &[f64]) -> Result<f64> {
    if basis.is_empty() {
        return Err(SpreadError::invalid("basis", "must be non-empty"));
    }
    check_dim(basis.len(), c.len())?;
    if c.iter().any(|x| !(*x >= 0.0)) {
        return Err(SpreadError::invalid("c", "weights must be nonnegative"));
    }
    for b in basis {
        check_dim(psi_t.dim(), b.dim())?;
    }
    let vectors: Vec<_> = basis.iter().map(QuantumState::amplitudes).collect();
    check_orthonormal(&vectors)?;
    Ok(basis.iter().zip(c).map(|(b, w)| w * b.inner(psi_t).norm_sqr()).sum())
}

/// Outcome of comparing the Krylov cost against competing bases.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimizationReport {
    /// Largest grid time up to which the Krylov cost never exceeded any
    /// competitor.
    pub t_star: f64,
    /// First grid time and competitor index where the Krylov cost lost.
    pub first_violation: Option<(f64, usize)>,
}

/// Scans increasing `times` and reports how long the Krylov basis keeps the
/// smallest cost Σₙ wₙ|⟨Bₙ|Ψ(t)⟩|² among `competitors` (unitaries whose
/// first column is ψ₀).
pub fn krylov_minimization_horizon(
    system: &SpreadSystem,
    competitors: &[CMatrix],
    weights: &[f64],
    times: &[f64],
) -> Result<MinimizationReport> {
    check_times(times)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpreadError::invalid("times", "must be strictly increasing"));
    }
    let h = system
        .hamiltonian()
        .ok_or_else(|| SpreadError::invalid("system", "needs the Hamiltonian"))?;
    let psi0 = system
        .initial()
        .ok_or_else(|| SpreadError::invalid("system", "needs the initial state"))?;
    let dim = h.dim();
    check_dim(dim, weights.len())?;
    for b in competitors {
        check_dim(dim, b.nrows())?;
        check_dim(dim, b.ncols())?;
        let cols: Vec<_> = b.column_iter().map(|c| c.clone_owned()).collect();
        check_orthonormal(&cols.iter().collect::<Vec<_>>())?;
        let lead = (b.column(0).dotc(psi0.amplitudes()).norm() - 1.0).abs();
        if lead > ORTHONORMALITY_TOLERANCE {
            return Err(SpreadError::invalid(
                "competitors",
                "first basis vector must equal the initial state",
            ));
        }
    }
    let profile = system.profile(times)?;
    let spectral = h.spectral()?;
    let coeffs = spectral.coefficients(psi0)?;
    let mut t_star = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let krylov_cost: f64 = profile.p[i].iter().zip(weights).map(|(p, w)| p * w).sum();
        let psi_t = spectral.evolve_coefficients(&coeffs, t);
        for (j, b) in competitors.iter().enumerate() {
            let overlaps = b.ad_mul(&psi_t);
            let cost: f64 = overlaps.iter().zip(weights).map(|(z, w)| w * z.norm_sqr()).sum();
            if krylov_cost > cost * (1.0 + 1e-12) + 1e-15 {
                return Ok(MinimizationReport {
                    t_star,
                    first_violation: Some((t, j)),
                });
            }
        }
        t_star = t;
    }
    Ok(MinimizationReport {
        t_star,
        first_violation: None,
    })
}
