//! Finite-time bounds on changes of the GSC, spread entropy and modified cost.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpreadError};
use crate::linalg::{HermitianOperator, QuantumState};
use crate::spread::{check_order, SpreadProfile, SpreadSystem};
use num_complex::Complex64;

/// Slack allowed between the actual change and its bound.
pub const BOUND_SLACK: f64 = 1e-10;
/// Default relative tolerance of the time integral.
pub const DEFAULT_REL_TOL: f64 = 1e-6;
const INITIAL_INTERVALS: usize = 16;
const MAX_REFINEMENTS: usize = 16;
const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tau: f64,
    pub delta_actual: f64,
    pub bound: f64,
    pub ratio: f64,
    pub satisfied: bool,
}

impl BoundReport {
    fn new(tau: f64, delta_actual: f64, bound: f64) -> Self {
        let ratio = if bound > 0.0 { delta_actual / bound } else { 0.0 };
        Self {
            tau,
            delta_actual,
            bound,
            ratio,
            satisfied: delta_actual <= bound + BOUND_SLACK,
        }
    }
}

/// F_m(t) = Σₙ nᵐ √pₙ(t).
pub fn f_function(profile: &SpreadProfile, t_index: usize, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(SpreadError::invalid("m", "must be at least 1"));
    }
    let row = row(profile, t_index)?;
    Ok(f_row(row, m))
}

fn f_row(p: &[f64], m: u32) -> f64 {
    p.iter()
        .enumerate()
        .map(|(n, &pn)| (n as f64).powi(m as i32) * pn.max(0.0).sqrt())
        .sum()
}

fn entropy_rate_row(p: &[f64]) -> f64 {
    p.iter().filter(|&&pn| pn > 0.0).map(|&pn| -pn.ln() * pn.sqrt()).sum()
}

fn entropy_row(p: &[f64]) -> f64 {
    p.iter().filter(|&&pn| pn > 0.0).map(|&pn| -pn * pn.ln()).sum()
}

fn row(profile: &SpreadProfile, t_index: usize) -> Result<&[f64]> {
    profile
        .p
        .get(t_index)
        .map(Vec::as_slice)
        .ok_or_else(|| SpreadError::invalid("t_index", format!("{t_index} out of range for {} times", profile.len())))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SpreadError::invalid(
            "tau",
            format!("must be finite and non-negative, got {tau}"),
        ));
    }
    Ok(())
}

/// ∫₀^τ g(p(t)) dt by trapezoid sums on halving grids with Richardson
/// extrapolation, stopping once successive estimates agree to `rel_tol`.
fn time_integral(system: &SpreadSystem, tau: f64, rel_tol: f64, g: impl Fn(&[f64]) -> f64) -> Result<f64> {
    if tau == 0.0 {
        return Ok(0.0);
    }
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut intervals = INITIAL_INTERVALS;
    for level in 0..=MAX_REFINEMENTS {
        let times: Vec<f64> = (0..=intervals).map(|i| tau * i as f64 / intervals as f64).collect();
        let profile = system.profile(&times)?;
        let values: Vec<f64> = profile.p.iter().map(|r| g(r)).collect();
        let h = tau / intervals as f64;
        let trapezoid = h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[intervals]));
        let mut current = vec![trapezoid];
        for j in 1..=level {
            let prev = &table[level - 1];
            let factor = 4f64.powi(j as i32) - 1.0;
            current.push(current[j - 1] + (current[j - 1] - prev[j - 1]) / factor);
        }
        if level > 0 {
            let prev = table[level - 1][level - 1];
            let now = current[level];
            if (now - prev).abs() <= rel_tol * now.abs() + 1e-15 * tau {
                return Ok(now);
            }
        }
        table.push(current);
        intervals *= 2;
    }
    let last = table.last().map_or(0.0, |r| r[r.len() - 1]);
    Err(SpreadError::Quadrature { estimate: last })
}

fn endpoints(system: &SpreadSystem, tau: f64) -> Result<SpreadProfile> {
    check_tau(tau)?;
    system.profile(&[0.0, tau])
}

/// |C_m(τ) − C_m(0)| against 2‖H‖∫₀^τ F_m dt.
pub fn gsc_change_bound(system: &SpreadSystem, tau: f64, m: u32) -> Result<BoundReport> {
    gsc_change_bound_with(system, tau, m, DEFAULT_REL_TOL)
}

pub fn gsc_change_bound_with(system: &SpreadSystem, tau: f64, m: u32, rel_tol: f64) -> Result<BoundReport> {
    check_order(m)?;
    let ends = endpoints(system, tau)?;
    let c = ends.gsc(m)?;
    let integral = time_integral(system, tau, rel_tol, |p| f_row(p, m))?;
    Ok(BoundReport::new(
        tau,
        (c[1] - c[0]).abs(),
        2.0 * system.norm()? * integral,
    ))
}

/// |S(τ) − S(0)| against 2‖H‖∫₀^τ (−Σₙ ln pₙ √pₙ) dt.
pub fn entropy_change_bound(system: &SpreadSystem, tau: f64) -> Result<BoundReport> {
    let ends = endpoints(system, tau)?;
    let delta = (entropy_row(&ends.p[1]) - entropy_row(&ends.p[0])).abs();
    let integral = time_integral(system, tau, DEFAULT_REL_TOL, entropy_rate_row)?;
    Ok(BoundReport::new(tau, delta, 2.0 * system.norm()? * integral))
}

/// |F₁(τ) − F₁(0)| against ‖H‖ τ Σ_{n<L} n.
pub fn modified_cost_bound(system: &SpreadSystem, tau: f64) -> Result<BoundReport> {
    let ends = endpoints(system, tau)?;
    let dim = ends.krylov_dim();
    let delta = (f_row(&ends.p[1], 1) - f_row(&ends.p[0], 1)).abs();
    let index_sum = (dim * dim.saturating_sub(1) / 2) as f64;
    Ok(BoundReport::new(tau, delta, system.norm()? * tau * index_sum))
}

/// Closed-form ratio |ΔC|/bound for H = diag(E₀, E₁) and
/// ψ₀ = cos(θ₀/2)|E₀⟩ + sin(θ₀/2)|E₁⟩, valid while ΔEτ ≤ 2π.
pub fn two_level_ratio(theta0: f64, e0: f64, e1: f64, tau: f64) -> Result<f64> {
    check_two_level(e0, e1)?;
    check_tau(tau)?;
    let de = e0 - e1;
    if de * tau > 2.0 * std::f64::consts::PI * (1.0 + 1e-12) {
        return Err(SpreadError::invalid("tau", format!("ΔE·τ = {} exceeds 2π", de * tau)));
    }
    Ok(de / (2.0 * e0) * (de * tau / 4.0).cos().powi(2) * theta0.sin().abs())
}

fn check_two_level(e0: f64, e1: f64) -> Result<()> {
    if !(e1 >= 0.0 && e0 > e1 && e0.is_finite()) {
        return Err(SpreadError::invalid(
            "E0",
            format!("need E0 > E1 ≥ 0, got E0 = {e0}, E1 = {e1}"),
        ));
    }
    Ok(())
}

/// The two-level system behind [`two_level_ratio`].
pub fn two_level_system(theta0: f64, e0: f64, e1: f64) -> Result<SpreadSystem> {
    check_two_level(e0, e1)?;
    let h = HermitianOperator::from_real_diagonal(&[e0, e1])?;
    let (s, c) = (0.5 * theta0).sin_cos();
    let psi0 = QuantumState::from_slice(&[Complex64::new(c, 0.0), Complex64::new(s, 0.0)])?;
    SpreadSystem::from_hamiltonian(h, psi0, crate::lanczos::DEFAULT_TOLERANCE)
}

/// Outcome of checking ṗₙ ≤ 2√pₙ ‖H‖ by central differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdotReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest ṗₙ − 2√pₙ‖H‖ seen.
    pub max_excess: f64,
}

pub fn pdot_inequality_check(system: &SpreadSystem, times: &[f64], step: f64, tol: f64) -> Result<PdotReport> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SpreadError::invalid("step", format!("must be positive, got {step}")));
    }
    let norm = system.norm()?;
    let mut grid = Vec::with_capacity(3 * times.len());
    for &t in times {
        grid.extend([t - step, t, t + step]);
    }
    let profile = system.profile(&grid)?;
    let mut report = PdotReport {
        checked: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
    };
    for k in 0..times.len() {
        let (before, now, after) = (&profile.p[3 * k], &profile.p[3 * k + 1], &profile.p[3 * k + 2]);
        for n in 0..now.len() {
            if now[n] < PROBABILITY_FLOOR {
                continue;
            }
            let pdot = (after[n] - before[n]) / (2.0 * step);
            let excess = pdot - 2.0 * now[n].sqrt() * norm;
            report.checked += 1;
            report.max_excess = report.max_excess.max(excess);
            if excess > tol {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::DEFAULT_TOLERANCE;
    use crate::lie::Su2Params;
    use crate::linalg::random::{random_hermitian, random_state, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_system(seed: u64, dim: usize) -> SpreadSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let psi = random_state(dim, &mut rng);
        SpreadSystem::from_hamiltonian(h, psi, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn f_vanishes_at_start_and_dominates_gsc() {
        let sys = random_system(3, 4);
        let times: Vec<f64> = (0..20).map(|i| 0.2 * i as f64).collect();
        let profile = sys.profile(&times).unwrap();
        assert!(f_function(&profile, 0, 2).unwrap() < 1e-12);
        let c = profile.gsc(1).unwrap();
        for (i, ci) in c.iter().enumerate() {
            assert!(f_function(&profile, i, 1).unwrap() >= *ci - 1e-15);
        }
        assert!(f_function(&profile, 0, 0).is_err());
        assert!(f_function(&profile, 99, 1).is_err());
    }

    #[test]
    fn f_equals_root_sc_for_two_levels() {
        let sys = two_level_system(1.1, 2.0, 0.5).unwrap();
        let profile = sys.profile(&[0.3, 1.7]).unwrap();
        for i in 0..2 {
            let c = profile.gsc(1).unwrap()[i];
            for m in 1..=3 {
                assert!((f_function(&profile, i, m).unwrap() - c.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_level_ratio_values() {
        assert!((two_level_ratio(PI / 2.0, 1.0, 0.0, PI).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(two_level_ratio(0.0, 1.0, 0.3, 1.0).unwrap(), 0.0);
        assert!(two_level_ratio(1.0, 2.0, 1.0, 2.0 * PI).unwrap().abs() < 1e-15);
        assert!(two_level_ratio(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(two_level_ratio(1.0, 1.0, 0.0, 7.0).is_err());
    }

    #[test]
    fn two_level_ratio_matches_bound_machinery() {
        for (theta, e0, e1, tau) in [(PI / 2.0, 1.0, 0.0, PI), (0.7, 2.0, 0.5, 1.3), (2.5, 1.5, 1.0, 4.0)] {
            let sys = two_level_system(theta, e0, e1).unwrap();
            let report = gsc_change_bound_with(&sys, tau, 1, 1e-13).unwrap();
            let r = two_level_ratio(theta, e0, e1, tau).unwrap();
            assert!((report.ratio - r).abs() < 1e-11, "{} vs {r}", report.ratio);
        }
    }

    #[test]
    fn zero_time_is_trivially_satisfied() {
        let sys = random_system(5, 5);
        for report in [
            gsc_change_bound(&sys, 0.0, 2).unwrap(),
            entropy_change_bound(&sys, 0.0).unwrap(),
            modified_cost_bound(&sys, 0.0).unwrap(),
        ] {
            assert_eq!(report.delta_actual, 0.0);
            assert_eq!(report.bound, 0.0);
            assert!(report.satisfied);
        }
        assert!(gsc_change_bound(&sys, -1.0, 1).is_err());
    }

    #[test]
    fn random_systems_satisfy_all_bounds() {
        for seed in 0..50u64 {
            let dim = 2 + (seed as usize % 7);
            let sys = random_system(100 + seed, dim);
            for tau in [0.5, 1.0, 2.0] {
                for m in 1..=3 {
                    let r = gsc_change_bound(&sys, tau, m).unwrap();
                    assert!(r.satisfied && r.bound > 0.0, "seed {seed} τ {tau} m {m}: {r:?}");
                }
                assert!(entropy_change_bound(&sys, tau).unwrap().satisfied);
                assert!(modified_cost_bound(&sys, tau).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn modified_cost_bound_prefactor() {
        let sys = random_system(9, 6);
        let l = sys.krylov().len();
        let r = modified_cost_bound(&sys, 1.0).unwrap();
        let expected = sys.norm().unwrap() * (l * (l - 1) / 2) as f64;
        assert!((r.bound - expected).abs() < 1e-12 * expected);
        if l == 6 {
            assert!((r.bound - 15.0 * sys.norm().unwrap()).abs() < 1e-12 * r.bound);
        }
        let two = two_level_system(0.9, 1.3, 0.2).unwrap();
        assert!((modified_cost_bound(&two, 0.7).unwrap().bound - 1.3 * 0.7).abs() < 1e-14);
    }

    #[test]
    fn entropy_bound_for_half_spin() {
        let params = Su2Params::new(0.8, 0.3, 0.1, 0.5).unwrap();
        let sys =
            SpreadSystem::from_hamiltonian(params.hamiltonian(), params.initial_state(), DEFAULT_TOLERANCE).unwrap();
        let r = entropy_change_bound(&sys, 1.0).unwrap();
        assert!(r.satisfied && r.ratio > 0.0 && r.ratio < 1.0);
    }

    #[test]
    fn bound_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let h = random_hermitian(5, &mut rng);
        let psi = random_state(5, &mut rng);
        let u = random_unitary(5, &mut rng);
        let rotated_h = h.conjugated(&u).unwrap();
        let rotated_psi = QuantumState::normalized(u.adjoint() * psi.amplitudes()).unwrap();
        let a = SpreadSystem::from_hamiltonian(h, psi, DEFAULT_TOLERANCE).unwrap();
        let b = SpreadSystem::from_hamiltonian(rotated_h, rotated_psi, DEFAULT_TOLERANCE).unwrap();
        for m in 1..=3 {
            let (ra, rb) = (
                gsc_change_bound(&a, 1.5, m).unwrap(),
                gsc_change_bound(&b, 1.5, m).unwrap(),
            );
            assert!((ra.bound - rb.bound).abs() < 1e-9 && (ra.delta_actual - rb.delta_actual).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_grows_with_tau() {
        let sys = random_system(21, 6);
        let mut last = 0.0;
        for tau in [0.25, 0.5, 1.0, 2.0, 3.0] {
            let b = gsc_change_bound(&sys, tau, 2).unwrap().bound;
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn pdot_inequality_holds() {
        for seed in 0..10 {
            let sys = random_system(300 + seed, 6);
            let times: Vec<f64> = (1..40).map(|i| 0.1 * i as f64).collect();
            let report = pdot_inequality_check(&sys, &times, 1e-4, 1e-6).unwrap();
            assert_eq!(report.violations, 0, "{report:?}");
            assert!(report.checked > 0);
        }
    }
}
