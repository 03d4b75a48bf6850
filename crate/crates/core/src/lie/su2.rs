use num_complex::Complex64;

use super::{check_nonnegative, check_positive};
use crate::error::{Result, SpreadError};
use crate::linalg::{CMatrix, HermitianOperator, QuantumState};

/// H = α(J₊ + J₋) + γJ₀ + δ in the spin-j representation, started from
/// |j, −j⟩. The spin is stored as the integer 2j.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Params {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    two_j: u32,
}

impl Su2Params {
    pub fn new(alpha: f64, gamma: f64, delta: f64, j: f64) -> Result<Self> {
        check_nonnegative("alpha", alpha)?;
        check_nonnegative("gamma", gamma)?;
        check_nonnegative("delta", delta)?;
        check_positive("j", j)?;
        let two_j = 2.0 * j;
        if (two_j - two_j.round()).abs() > 1e-12 {
            return Err(SpreadError::invalid(
                "j",
                format!("must be a positive half-integer, got {j}"),
            ));
        }
        let p = Self {
            alpha,
            gamma,
            delta,
            two_j: two_j.round() as u32,
        };
        check_positive("Δ = sqrt(4α² + γ²)", p.gap())?;
        Ok(p)
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// Δ = √(4α² + γ²).
    pub fn gap(&self) -> f64 {
        (4.0 * self.alpha * self.alpha + self.gamma * self.gamma).sqrt()
    }

    /// Single-step transition weight q(t) = (4α²/Δ²) sin²(Δt/2); pₙ is
    /// binomial(2j, q).
    pub fn transition(&self, t: f64) -> f64 {
        let d = self.gap();
        let s = (0.5 * d * t).sin();
        4.0 * self.alpha * self.alpha * s * s / (d * d)
    }

    /// φₙ(t) = √C(2j,n) e^{−iδt} (−2iα sin(Δt/2)/Δ)ⁿ (cos(Δt/2) + iγ sin(Δt/2)/Δ)^{2j−n}.
    pub fn amplitude(&self, n: u32, t: f64) -> Result<Complex64> {
        if n > self.two_j {
            return Err(SpreadError::invalid(
                "n",
                format!("must not exceed 2j = {}", self.two_j),
            ));
        }
        let d = self.gap();
        let (s, c) = (0.5 * d * t).sin_cos();
        let hop = Complex64::new(0.0, -2.0 * self.alpha * s / d);
        let stay = Complex64::new(c, self.gamma * s / d);
        let norm = binomial(self.two_j, n).sqrt();
        Ok(Complex64::from_polar(norm, -self.delta * t) * hop.powu(n) * stay.powu(self.two_j - n))
    }

    /// C(t) = (8α²j/Δ²) sin²(Δt/2).
    pub fn sc(&self, t: f64) -> f64 {
        self.two_j as f64 * self.transition(t)
    }

    /// C₂ = C + (1 − 1/(2j)) C².
    pub fn c2(&self, t: f64) -> f64 {
        let c = self.sc(t);
        c + (1.0 - 1.0 / self.two_j as f64) * c * c
    }

    /// (Δn)² = C − C²/(2j).
    pub fn variance(&self, t: f64) -> f64 {
        let c = self.sc(t);
        (c - c * c / self.two_j as f64).max(0.0)
    }

    /// G(η,t) = (1 + (e^η − 1) C/(2j))^{2j}.
    pub fn generating(&self, eta: f64, t: f64) -> f64 {
        (1.0 + eta.exp_m1() * self.transition(t)).powi(self.two_j as i32)
    }

    /// 𝒯(u,t) = (1 + (2/j) sin²(u/2) C (C/(2j) − 1))^{2j}.
    pub fn echo(&self, u: f64, t: f64) -> f64 {
        let c = self.sc(t);
        let s = (0.5 * u).sin();
        (1.0 + (2.0 / self.j()) * s * s * c * (c / self.two_j as f64 - 1.0)).powi(self.two_j as i32)
    }

    /// Weights (p₀, p₁) of the two-dimensional case j = 1/2.
    pub fn pdf_halfspin(&self, t: f64) -> Result<(f64, f64)> {
        if self.two_j != 1 {
            return Err(SpreadError::invalid("j", "the two-point PDF requires j = 1/2"));
        }
        let q = self.transition(t);
        Ok((1.0 - q, q))
    }

    /// aₙ = γ(n − j) + δ and bₙ = α√(n(2j − n + 1)).
    pub fn lanczos_coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let j = self.j();
        let a = (0..=self.two_j)
            .map(|n| self.gamma * (n as f64 - j) + self.delta)
            .collect();
        let b = (1..=self.two_j)
            .map(|n| {
                let n = n as f64;
                self.alpha * (n * (2.0 * j - n + 1.0)).sqrt()
            })
            .collect();
        (a, b)
    }

    /// Spin-j matrix in the basis |j, −j + n⟩, n = 0..2j.
    pub fn hamiltonian(&self) -> HermitianOperator {
        let dim = self.two_j as usize + 1;
        let j = self.j();
        let mut m = CMatrix::zeros(dim, dim);
        for n in 0..dim {
            m[(n, n)] = Complex64::new(self.gamma * (n as f64 - j) + self.delta, 0.0);
            if n + 1 < dim {
                let nf = n as f64;
                let raise = self.alpha * ((nf + 1.0) * (2.0 * j - nf)).sqrt();
                m[(n + 1, n)] = Complex64::new(raise, 0.0);
                m[(n, n + 1)] = Complex64::new(raise, 0.0);
            }
        }
        HermitianOperator::from_unchecked(m)
    }

    /// |j, −j⟩.
    pub fn initial_state(&self) -> QuantumState {
        QuantumState::basis(self.two_j as usize + 1, 0).expect("dimension at least 2")
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
