use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::check_positive;
use crate::error::{Result, SpreadError};
use crate::lanczos::{lanczos, KrylovDecomposition, DEFAULT_TOLERANCE};
use crate::linalg::{CMatrix, HermitianOperator, QuantumState};
use crate::spread::{SpreadProfile, SpreadSystem};

/// Which Hamiltonian of the su(1,1) pair to use.
///
/// Case I is H = 2λ(e^{iβ}K₊ + e^{−iβ}K₋) + 2ωK₀ itself; case II is the
/// displaced Hamiltonian Δ(e^{−iβ}K₊ + e^{iβ}K₋). Both start from |h, 0⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Su11Case {
    I,
    II,
}

impl FromStr for Su11Case {
    type Err = SpreadError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Su11Case::I),
            "II" | "ii" | "2" => Ok(Su11Case::II),
            other => Err(SpreadError::invalid("case", format!("expected I or II, got `{other}`"))),
        }
    }
}

impl fmt::Display for Su11Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Su11Case::I => "I",
            Su11Case::II => "II",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su11Params {
    pub lambda: f64,
    pub omega: f64,
    pub beta: f64,
    /// Bargmann index.
    pub h: f64,
}

/// Coefficients of D†HD = A₀K₀ + A₊K₊ + A₋K₋ with A₋ = conj(A₊).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformedCoeffs {
    pub a0: Complex64,
    pub a_plus: Complex64,
}

impl TransformedCoeffs {
    pub fn a_minus(&self) -> Complex64 {
        self.a_plus.conj()
    }
}

/// Numerics in a truncated discrete-series representation.
#[derive(Clone, Debug)]
pub struct TruncatedRun {
    pub cutoff: usize,
    /// max over the requested times of Σ_{n > 0.8·cutoff} pₙ(t).
    pub tail_mass: f64,
    pub converged: bool,
    pub krylov: KrylovDecomposition,
    pub profile: SpreadProfile,
}

impl Su11Params {
    pub const TAIL_TOLERANCE: f64 = 1e-10;
    pub const INITIAL_CUTOFF: usize = 64;

    pub fn new(lambda: f64, omega: f64, beta: f64, h: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("omega", omega)?;
        check_positive("h", h)?;
        if !beta.is_finite() {
            return Err(SpreadError::invalid("beta", "must be finite"));
        }
        if !(2.0 * lambda > omega) {
            return Err(SpreadError::invalid("lambda", "requires 2λ > ω for a real Δ"));
        }
        Ok(Self { lambda, omega, beta, h })
    }

    /// Δ = √(4λ² − ω²).
    pub fn gap(&self) -> f64 {
        (4.0 * self.lambda * self.lambda - self.omega * self.omega).sqrt()
    }

    /// Coefficients after the displacement with z = −tanh(θ/2) e^{−iφ}.
    pub fn transformed_coeffs(&self, theta: f64, phi: f64) -> TransformedCoeffs {
        let z = Complex64::from_polar(-(0.5 * theta).tanh(), -phi);
        let eb = Complex64::from_polar(1.0, self.beta);
        let norm = 1.0 - z.norm_sqr();
        let a0 = 2.0 * self.omega * theta.cosh() + (4.0 * self.lambda / norm) * (z * eb + z.conj() * eb.conj());
        let a_plus = -self.omega * Complex64::from_polar(1.0, -phi) * theta.sinh()
            + (2.0 * self.lambda / norm) * (z * z * eb + eb.conj());
        TransformedCoeffs { a0, a_plus }
    }

    /// The displacement (θ, φ) = (atanh(ω/2λ), β) that removes K₀.
    pub fn removing_displacement(&self) -> (f64, f64) {
        ((self.omega / (2.0 * self.lambda)).atanh(), self.beta)
    }

    /// (aₙ for n < cutoff, bₙ for 1 ≤ n < cutoff).
    pub fn lanczos_coefficients(&self, case: Su11Case, cutoff: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if cutoff < 1 {
            return Err(SpreadError::invalid("cutoff", "must be at least 1"));
        }
        let two_h = 2.0 * self.h;
        let (diag, hop) = match case {
            Su11Case::I => (2.0 * self.omega, 2.0 * self.lambda),
            Su11Case::II => (0.0, self.gap()),
        };
        let a = (0..cutoff).map(|n| diag * (self.h + n as f64)).collect();
        let b = (1..cutoff)
            .map(|n| {
                let n = n as f64;
                hop * (n * (two_h + n - 1.0)).sqrt()
            })
            .collect();
        Ok((a, b))
    }

    /// SC: C′ = 2h sinh²(Δt) for case II and C = (4λ²/Δ²) C′ for case I.
    pub fn sc(&self, case: Su11Case, t: f64) -> f64 {
        let s = (self.gap() * t).sinh();
        let c_ii = 2.0 * self.h * s * s;
        match case {
            Su11Case::II => c_ii,
            Su11Case::I => self.proportionality() * c_ii,
        }
    }

    /// 4λ²/Δ².
    pub fn proportionality(&self) -> f64 {
        let d = self.gap();
        4.0 * self.lambda * self.lambda / (d * d)
    }

    /// C₂ = (1 + 1/(2h)) C² + C.
    pub fn c2(&self, case: Su11Case, t: f64) -> f64 {
        let c = self.sc(case, t);
        (1.0 + 1.0 / (2.0 * self.h)) * c * c + c
    }

    /// (Δn)² = C²/(2h) + C.
    pub fn variance(&self, case: Su11Case, t: f64) -> f64 {
        let c = self.sc(case, t);
        c * c / (2.0 * self.h) + c
    }

    /// G(η,t) = (1 − (e^η − 1) C/(2h))^{−2h}, defined while the base is
    /// positive.
    pub fn generating(&self, case: Su11Case, eta: f64, t: f64) -> Result<f64> {
        let c = self.sc(case, t);
        let base = 1.0 - eta.exp_m1() * c / (2.0 * self.h);
        if !(base > 0.0) {
            let bound = (1.0 + 2.0 * self.h / c).ln();
            return Err(SpreadError::Domain(format!(
                "generating function diverges for η ≥ ln(1 + 2h/C) = {bound:.6e} (η = {eta})"
            )));
        }
        Ok(base.powf(-2.0 * self.h))
    }

    /// Negative-binomial weight pₙ(t) = Γ(2h+n)/(n! Γ(2h)) (1−x)^{2h} xⁿ with
    /// x = C/(2h + C).
    pub fn probability(&self, case: Su11Case, n: usize, t: f64) -> f64 {
        let c = self.sc(case, t);
        let two_h = 2.0 * self.h;
        let x = c / (two_h + c);
        let mut p = (two_h / (two_h + c)).powf(two_h);
        for k in 1..=n {
            p *= x * (two_h + k as f64 - 1.0) / k as f64;
        }
        p
    }

    /// Case-II amplitude in the Krylov basis,
    /// φ′ₙ = √(Γ(2h+n)/(n!Γ(2h))) (1 − tanh²(Δt))^h (−i tanh(Δt))ⁿ.
    pub fn amplitude_case_ii(&self, n: usize, t: f64) -> Complex64 {
        let th = (self.gap() * t).tanh();
        let two_h = 2.0 * self.h;
        let mut amp = Complex64::new((1.0 - th * th).powf(self.h), 0.0);
        for k in 1..=n {
            amp *= Complex64::new(0.0, -th) * ((two_h + k as f64 - 1.0) / k as f64).sqrt();
        }
        amp
    }

    /// Matrix of the chosen Hamiltonian on |h, n⟩, n < cutoff.
    pub fn truncated_hamiltonian(&self, case: Su11Case, cutoff: usize) -> Result<HermitianOperator> {
        if cutoff < 2 {
            return Err(SpreadError::invalid("cutoff", "must be at least 2"));
        }
        let (diag, raise) = match case {
            Su11Case::I => (2.0 * self.omega, Complex64::from_polar(2.0 * self.lambda, self.beta)),
            Su11Case::II => (0.0, Complex64::from_polar(self.gap(), -self.beta)),
        };
        let mut m = CMatrix::zeros(cutoff, cutoff);
        for n in 0..cutoff {
            let nf = n as f64;
            m[(n, n)] = Complex64::new(diag * (self.h + nf), 0.0);
            if n + 1 < cutoff {
                let w = raise * ((nf + 1.0) * (2.0 * self.h + nf)).sqrt();
                m[(n + 1, n)] = w;
                m[(n, n + 1)] = w.conj();
            }
        }
        HermitianOperator::new(m)
    }

    /// Lanczos and propagation in a truncated representation whose cutoff
    /// doubles from 64 until the tail mass at every requested time is below
    /// 1e-10 or `max_cutoff` is reached.
    pub fn truncated_run(&self, case: Su11Case, times: &[f64], max_cutoff: usize) -> Result<TruncatedRun> {
        let mut cutoff = Self::INITIAL_CUTOFF.min(max_cutoff.max(2));
        loop {
            let h = self.truncated_hamiltonian(case, cutoff)?;
            let psi0 = QuantumState::basis(cutoff, 0)?;
            let krylov = lanczos(&h, &psi0, DEFAULT_TOLERANCE)?;
            let profile = SpreadSystem::from_krylov(krylov.clone()).profile(times)?;
            let start = (0.8 * cutoff as f64).floor() as usize + 1;
            let tail_mass = profile
                .p
                .iter()
                .map(|row| row.iter().skip(start).sum::<f64>())
                .fold(0.0, f64::max);
            let converged = tail_mass < Self::TAIL_TOLERANCE;
            if converged || cutoff >= max_cutoff {
                return Ok(TruncatedRun {
                    cutoff,
                    tail_mass,
                    converged,
                    krylov,
                    profile,
                });
            }
            cutoff = (2 * cutoff).min(max_cutoff);
        }
    }
}
