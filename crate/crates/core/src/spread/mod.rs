//! Measurement statistics of the spreading operator in the Krylov basis.

mod energy;
mod geometry;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SpreadError};
use crate::lanczos::{lanczos, KrylovDecomposition};
use crate::linalg::{check_dim, operator_norm, HermitianOperator, QuantumState};
use crate::propagate::{PropagationInput, Propagator, SpectralPropagator, TridiagonalPropagator};

pub use energy::{gsc_energy_basis, long_time_average, long_time_variance};
pub use geometry::{cost_in_basis, fubini_speed_check, krylov_minimization_horizon, MinimizationReport};

pub const MAX_GSC_ORDER: u32 = 6;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;
/// Order at which the moment series for χ is truncated.
pub const CHARFUN_SERIES_ORDER: u32 = 12;

/// Hamiltonian, initial state and their Krylov decomposition. The first two
/// are absent when only the Lanczos coefficients are known.
#[derive(Clone, Debug)]
pub struct SpreadSystem {
    hamiltonian: Option<HermitianOperator>,
    initial: Option<QuantumState>,
    krylov: KrylovDecomposition,
}

impl SpreadSystem {
    pub fn from_hamiltonian(h: HermitianOperator, psi0: QuantumState, tol: f64) -> Result<Self> {
        let krylov = lanczos(&h, &psi0, tol)?;
        Ok(Self {
            hamiltonian: Some(h),
            initial: Some(psi0),
            krylov,
        })
    }

    pub fn from_krylov(krylov: KrylovDecomposition) -> Self {
        Self {
            hamiltonian: None,
            initial: None,
            krylov,
        }
    }

    pub fn krylov(&self) -> &KrylovDecomposition {
        &self.krylov
    }

    pub fn hamiltonian(&self) -> Option<&HermitianOperator> {
        self.hamiltonian.as_ref()
    }

    pub fn initial(&self) -> Option<&QuantumState> {
        self.initial.as_ref()
    }

    pub fn input(&self) -> PropagationInput<'_> {
        PropagationInput {
            krylov: &self.krylov,
            hamiltonian: self.hamiltonian.as_ref(),
            initial: self.initial.as_ref(),
        }
    }

    /// ‖H‖, or the norm of the tridiagonal matrix for coefficient-only systems.
    pub fn norm(&self) -> Result<f64> {
        match &self.hamiltonian {
            Some(h) => operator_norm(h),
            None => Ok(self
                .krylov
                .tridiagonal()
                .eigenvalues()?
                .iter()
                .fold(0.0, |acc, e| acc.max(e.abs()))),
        }
    }

    /// Profile through the Krylov-space propagator.
    pub fn profile(&self, times: &[f64]) -> Result<SpreadProfile> {
        self.profile_with(&TridiagonalPropagator, times)
    }

    pub fn profile_with(&self, propagator: &dyn Propagator, times: &[f64]) -> Result<SpreadProfile> {
        check_times(times)?;
        let phi = propagator.amplitudes(self.input(), times)?;
        SpreadProfile::from_amplitudes(times.to_vec(), phi)
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(SpreadError::invalid("times", "must be finite"));
    }
    Ok(())
}

/// Amplitudes φₙ(t) and probabilities pₙ(t) on a time grid.
#[derive(Clone, Debug)]
pub struct SpreadProfile {
    pub times: Vec<f64>,
    pub phi: Vec<Vec<Complex64>>,
    pub p: Vec<Vec<f64>>,
}

impl SpreadProfile {
    /// Builds a profile, rejecting rows whose probabilities do not sum to 1.
    pub fn from_amplitudes(times: Vec<f64>, phi: Vec<Vec<Complex64>>) -> Result<Self> {
        check_dim(times.len(), phi.len())?;
        let width = phi.first().map_or(0, Vec::len);
        let mut p = Vec::with_capacity(phi.len());
        for row in &phi {
            check_dim(width, row.len())?;
            let probs: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(SpreadError::NotNormalized(total));
            }
            p.push(probs);
        }
        Ok(Self { times, phi, p })
    }

    /// Krylov dimension L.
    pub fn krylov_dim(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn distribution(&self, t_index: usize) -> Result<SpreadDistribution> {
        let weights = self.p.get(t_index).ok_or_else(|| {
            SpreadError::invalid(
                "t_index",
                format!("{t_index} out of range for {} times", self.times.len()),
            )
        })?;
        Ok(SpreadDistribution {
            t: self.times[t_index],
            weights: weights.clone(),
        })
    }

    /// C_m(t) = Σₙ nᵐ pₙ(t) on the whole grid.
    pub fn gsc(&self, m: u32) -> Result<Vec<f64>> {
        check_order(m)?;
        Ok(self.p.iter().map(|row| moment(row, m)).collect())
    }
}

pub(crate) fn check_order(m: u32) -> Result<()> {
    if !(1..=MAX_GSC_ORDER).contains(&m) {
        return Err(SpreadError::invalid(
            "m",
            format!("order must lie in 1..={MAX_GSC_ORDER}, got {m}"),
        ));
    }
    Ok(())
}

pub(crate) fn moment(p: &[f64], m: u32) -> f64 {
    p.iter()
        .enumerate()
        .map(|(n, &pn)| (n as f64).powi(m as i32) * pn)
        .sum()
}

/// Discrete distribution of the spreading number at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpreadDistribution {
    pub t: f64,
    pub weights: Vec<f64>,
}

impl SpreadDistribution {
    pub fn new(t: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(SpreadError::invalid("weights", "must be non-empty"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SpreadError::invalid("weights", "must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(SpreadError::NotNormalized(total));
        }
        Ok(Self { t, weights })
    }

    /// Σₙ nᵐ pₙ for any order m.
    pub fn moment(&self, m: u32) -> f64 {
        moment(&self.weights, m)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// ⟨n²⟩ − ⟨n⟩², with rounding-level negatives reported as zero.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let v = self.moment(2) - mean * mean;
        if v < 0.0 && v > -1e-12 {
            0.0
        } else {
            v
        }
    }

    /// χ(u) = Σₙ pₙ e^{−iun}.
    pub fn charfun(&self, u: f64) -> Complex64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &p)| Complex64::from_polar(p, -u * n as f64))
            .sum()
    }

    /// χ(u) from the moment series Σ_{m ≤ 12} (−iu)ᵐ C_m / m!, with the
    /// truncation bound |u|¹³ (L−1)¹³ / 13!.
    pub fn charfun_series(&self, u: f64) -> (Complex64, f64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(1.0, 0.0);
        for m in 0..=CHARFUN_SERIES_ORDER {
            if m > 0 {
                factor *= Complex64::new(0.0, -u) / m as f64;
            }
            value += factor * self.moment(m);
        }
        let order = CHARFUN_SERIES_ORDER + 1;
        let span = (self.weights.len() - 1) as f64;
        let bound = (u.abs() * span).powi(order as i32) / factorial(order);
        (value, bound)
    }

    /// G(η) = Σₙ e^{ηn} pₙ.
    pub fn generating(&self, eta: f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &p)| p * (eta * n as f64).exp())
            .sum()
    }

    /// G at complex argument; G(−iu) = χ(u).
    pub fn generating_complex(&self, eta: Complex64) -> Complex64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &p)| (eta * n as f64).exp() * p)
            .sum()
    }

    /// dᵐG/dηᵐ at η = 0 by central differences with Richardson extrapolation
    /// over successively halved steps.
    pub fn generating_derivative(&self, m: u32) -> f64 {
        if m == 0 {
            return self.generating(0.0);
        }
        let span = (self.weights.len().max(2) - 1) as f64;
        central_derivative(|eta| self.generating(eta), m, 0.5 / span)
    }

    /// 𝒯(u) = |χ(u)|².
    pub fn echo(&self, u: f64) -> f64 {
        self.charfun(u).norm_sqr().min(1.0)
    }

    /// −Σ pₙ ln pₙ, zero-mass terms omitted.
    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>()
            .max(0.0)
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// m-th derivative at 0 from the symmetric stencil
/// h⁻ᵐ Σₖ (−1)ᵏ C(m,k) f((m/2 − k)h), extrapolated in h² (Ridders).
pub(crate) fn central_derivative(f: impl Fn(f64) -> f64, m: u32, h0: f64) -> f64 {
    const LEVELS: usize = 12;
    let stencil = |h: f64| {
        let sum: f64 = (0..=m)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(m, k) * f((m as f64 / 2.0 - k as f64) * h)
            })
            .sum();
        sum / h.powi(m as i32)
    };
    let mut table = vec![vec![0.0; LEVELS]; LEVELS];
    let mut h = h0;
    table[0][0] = stencil(h);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..LEVELS {
        h /= 2.0;
        table[0][i] = stencil(h);
        let mut fac = 4.0;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= 4.0;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

/// Inverts χ sampled at u_k = 2πk/L back to the weights pₙ.
pub fn weights_from_charfun(chi: &[Complex64]) -> Vec<f64> {
    let l = chi.len();
    (0..l)
        .map(|n| {
            let s: Complex64 = chi
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * n % l) as f64 / l as f64)
                })
                .sum();
            s.re / l as f64
        })
        .collect()
}

/// φₙ(t) = ⟨Kₙ|Ψ(t)⟩ through full-space evolution.
pub fn spread_profile(
    k: &KrylovDecomposition,
    h: &HermitianOperator,
    psi0: &QuantumState,
    times: &[f64],
) -> Result<SpreadProfile> {
    check_times(times)?;
    let input = PropagationInput {
        krylov: k,
        hamiltonian: Some(h),
        initial: Some(psi0),
    };
    let phi = SpectralPropagator.amplitudes(input, times)?;
    SpreadProfile::from_amplitudes(times.to_vec(), phi)
}

pub fn gsc(profile: &SpreadProfile, m: u32) -> Result<Vec<f64>> {
    profile.gsc(m)
}

pub fn pdf(profile: &SpreadProfile, t_index: usize) -> Result<SpreadDistribution> {
    profile.distribution(t_index)
}

pub fn charfun(profile: &SpreadProfile, t_index: usize, us: &[f64]) -> Result<Vec<Complex64>> {
    let d = profile.distribution(t_index)?;
    Ok(us.par_iter().map(|&u| d.charfun(u)).collect())
}

pub fn generating(profile: &SpreadProfile, t_index: usize, eta: f64) -> Result<f64> {
    Ok(profile.distribution(t_index)?.generating(eta))
}

pub fn variance(profile: &SpreadProfile, t_index: usize) -> Result<f64> {
    Ok(profile.distribution(t_index)?.variance())
}

pub fn u_loschmidt(profile: &SpreadProfile, t_index: usize, u: f64) -> Result<f64> {
    Ok(profile.distribution(t_index)?.echo(u))
}

pub fn spread_entropy(profile: &SpreadProfile, t_index: usize) -> Result<f64> {
    Ok(profile.distribution(t_index)?.entropy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::{spreading_operator, DEFAULT_TOLERANCE};
    use crate::linalg::evolve;
    use crate::linalg::random::{random_hermitian, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_system(dim: usize, seed: u64) -> SpreadSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let psi = random_state(dim, &mut rng);
        SpreadSystem::from_hamiltonian(h, psi, DEFAULT_TOLERANCE).unwrap()
    }

    fn two_level(p1: f64) -> SpreadDistribution {
        SpreadDistribution::new(0.0, vec![1.0 - p1, p1]).unwrap()
    }

    #[test]
    fn initial_condition() {
        let sys = random_system(5, 1);
        let prof = sys.profile(&[0.0, 0.5]).unwrap();
        assert!((prof.p[0][0] - 1.0).abs() < 1e-14);
        assert_eq!(
            prof.gsc(1).unwrap()[0],
            prof.p[0].iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>()
        );
        assert!(prof.gsc(3).unwrap()[0].abs() < 1e-14);
        assert!(prof.distribution(0).unwrap().entropy() < 1e-12);
    }

    #[test]
    fn one_dimensional_krylov_space() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let sys = SpreadSystem::from_hamiltonian(h, QuantumState::basis(2, 1).unwrap(), DEFAULT_TOLERANCE).unwrap();
        let prof = sys.profile(&[0.0, 1.0, 10.0]).unwrap();
        assert!(prof.p.iter().all(|row| row == &vec![1.0]));
    }

    #[test]
    fn gsc_matches_operator_expectation() {
        let sys = random_system(5, 3);
        let times = [0.0, 0.4, 1.1, 3.0];
        let prof = sys.profile(&times).unwrap();
        let h = sys.hamiltonian().unwrap();
        let psi = sys.initial().unwrap();
        for m in 1..=4 {
            let km = spreading_operator(sys.krylov(), m).unwrap();
            let c = prof.gsc(m).unwrap();
            for (i, &t) in times.iter().enumerate() {
                let psi_t = evolve(h, psi, t).unwrap();
                let expect = km.expectation(&psi_t).unwrap();
                assert!((c[i] - expect).abs() < 1e-10, "m={m} t={t}: {} vs {expect}", c[i]);
                let bound = 4f64.powi(m as i32);
                assert!(c[i] >= -1e-14 && c[i] <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn spectral_and_krylov_profiles_agree() {
        let sys = random_system(6, 4);
        let times: Vec<f64> = (0..20).map(|i| 0.3 * i as f64).collect();
        let a = sys.profile(&times).unwrap();
        let b = spread_profile(sys.krylov(), sys.hamiltonian().unwrap(), sys.initial().unwrap(), &times).unwrap();
        for (ra, rb) in a.p.iter().zip(&b.p) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gsc_order_limits() {
        let sys = random_system(3, 5);
        let prof = sys.profile(&[0.2]).unwrap();
        assert!(prof.gsc(0).is_err());
        assert!(prof.gsc(7).is_err());
        assert!(prof.gsc(6).is_ok());
        assert!(prof.distribution(1).is_err());
    }

    #[test]
    fn pdf_first_moment() {
        let sys = random_system(4, 6);
        let prof = sys.profile(&[1.0]).unwrap();
        let d = pdf(&prof, 0).unwrap();
        let mean: f64 = d.weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        assert!((mean - gsc(&prof, 1).unwrap()[0]).abs() < 1e-12);
        assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn charfun_properties() {
        let sys = random_system(6, 7);
        let prof = sys.profile(&[0.9]).unwrap();
        let d = prof.distribution(0).unwrap();
        assert!((d.charfun(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((d.charfun(2.0 * PI) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for u in [-3.0, -0.4, 0.05, 1.2, 7.0] {
            let chi = d.charfun(u);
            assert!(chi.norm() <= 1.0 + 1e-14);
            assert!((d.generating_complex(Complex64::new(0.0, -u)) - chi).norm() < 1e-12);
        }
        for u in [0.01, 0.05, 0.1] {
            let (series, bound) = d.charfun_series(u);
            assert!((series - d.charfun(u)).norm() <= bound + 1e-14);
        }
        let l = d.weights.len();
        let chi: Vec<Complex64> = (0..l).map(|k| d.charfun(2.0 * PI * k as f64 / l as f64)).collect();
        for (x, y) in weights_from_charfun(&chi).iter().zip(&d.weights) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn two_outcome_charfun() {
        let q = 0.8 * (5f64.sqrt() / 2.0).sin().powi(2);
        let d = two_level(q);
        let chi = d.charfun(PI);
        assert!((chi.re - (1.0 - 2.0 * q)).abs() < 1e-14);
        assert!(chi.im.abs() < 1e-14);
    }

    #[test]
    fn generating_derivatives() {
        let sys = random_system(4, 8);
        let prof = sys.profile(&[0.0, 0.8, 2.5]).unwrap();
        for i in 0..3 {
            let d = prof.distribution(i).unwrap();
            assert_eq!(d.generating(0.0), d.weights.iter().sum::<f64>());
            for m in 1..=4 {
                let fd = d.generating_derivative(m);
                assert!((fd - d.moment(m)).abs() < 1e-6, "m={m}: {fd} vs {}", d.moment(m));
            }
        }
    }

    #[test]
    fn variance_and_entropy() {
        let sys = random_system(5, 9);
        let prof = sys.profile(&[0.0, 0.7]).unwrap();
        assert!(variance(&prof, 0).unwrap().abs() < 1e-14);
        let c1 = prof.gsc(1).unwrap()[1];
        let c2 = prof.gsc(2).unwrap()[1];
        assert!((variance(&prof, 1).unwrap() - (c2 - c1 * c1)).abs() < 1e-12);
        let s = spread_entropy(&prof, 1).unwrap();
        assert!(s >= 0.0 && s <= (5f64).ln());
        let uniform = SpreadDistribution::new(0.0, vec![0.25; 4]).unwrap();
        assert!((uniform.entropy() - 4f64.ln()).abs() < 1e-15);
        assert!((two_level(0.5).entropy() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(two_level(0.0).entropy(), 0.0);
    }

    #[test]
    fn echo_bounds() {
        let sys = random_system(5, 10);
        let prof = sys.profile(&[1.3]).unwrap();
        assert!((u_loschmidt(&prof, 0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        for u in [0.3, 1.0, 2.0, 3.1] {
            let e = u_loschmidt(&prof, 0, u).unwrap();
            assert!((0.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn distribution_validation() {
        assert!(SpreadDistribution::new(0.0, vec![0.5, 0.6]).is_err());
        assert!(SpreadDistribution::new(0.0, vec![1.1, -0.1]).is_err());
        assert!(SpreadDistribution::new(0.0, vec![]).is_err());
    }

    #[test]
    fn profile_rejects_unnormalized_rows() {
        let phi = vec![vec![Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0)]];
        assert!(SpreadProfile::from_amplitudes(vec![0.0], phi).is_err());
    }
}
