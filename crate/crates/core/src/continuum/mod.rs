//! Continuum-limit ensemble averages of the normalized GSCs.
//!
//! With ε = 1/L the mean Lanczos profile b(x) = √(1 − x/(εL)) turns the
//! Krylov sums into cosine transforms on s ∈ [0, 1] of
//! h_m(s) = s^m (2−s)^m (1−s) (for K_m) and p(s) = 1 − s (for the norm):
//! J_m(ω) = 2 L^m ĥ_m(Lω), P(ω) = 2 p̂(Lω), ĝ(l) = ∫₀¹ g(s) cos(ls) ds.

pub mod quad;

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpreadError};
use quad::{integrate, integrate_panels, multiply, tail_integral, TrigTerm};

pub const MAX_CONTINUUM_ORDER: u32 = 4;
/// Largest v accepted by [`averaged_gsc_numeric`].
pub const MAX_V: f64 = 5.0;
/// |l| below which cosine transforms use the Taylor series.
const SERIES_RADIUS: f64 = 4.0;
const SERIES_TERMS: usize = 30;
/// Split point between numerical quadrature and the exact tail.
const QUAD_CUTOFF: f64 = 32.0 * PI;
const QUAD_TOLERANCE: f64 = 1e-10;

/// Krylov dimension L (ε = 1/L) and GSC order m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuumModel {
    #[serde(rename = "L")]
    dim: usize,
    m: u32,
}

impl ContinuumModel {
    pub fn new(dim: usize, m: u32) -> Result<Self> {
        if dim < 2 {
            return Err(SpreadError::invalid("L", format!("must be at least 2, got {dim}")));
        }
        if !(1..=MAX_CONTINUUM_ORDER).contains(&m) {
            return Err(SpreadError::invalid(
                "m",
                format!("must be in 1..={MAX_CONTINUUM_ORDER}, got {m}"),
            ));
        }
        Ok(Self { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.dim as f64
    }
}

/// Real polynomial on [0, 1] with its exact cosine transform.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub(crate) fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// s^m (2−s)^m (1−s).
    pub(crate) fn gsc_profile(m: u32) -> Self {
        let mut p = Self::new(vec![1.0]);
        for _ in 0..m {
            p = p.times(&[0.0, 2.0, -1.0]);
        }
        p.times(&[1.0, -1.0])
    }

    /// 1 − s.
    pub(crate) fn norm_profile() -> Self {
        Self::new(vec![1.0, -1.0])
    }

    fn times(&self, other: &[f64]) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(vec![0.0]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// ∫₀¹ g(s) s^j ds.
    fn moment(&self, j: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c / (i + j + 1) as f64)
            .sum()
    }

    /// ĝ(l) as a finite sum of sin/cos over powers of l, from repeated
    /// integration by parts.
    pub(crate) fn transform_terms(&self) -> Vec<TrigTerm> {
        let mut terms = Vec::new();
        let mut d = self.clone();
        for k in 0..self.coeffs.len() {
            let (at_one, at_zero) = (d.eval(1.0), d.eval(0.0));
            let sign = if k % 4 < 2 { 1.0 } else { -1.0 };
            let power = k as i32 + 1;
            if k % 2 == 0 {
                terms.push(TrigTerm::sin(sign * at_one, 1.0, power));
            } else {
                terms.push(TrigTerm::cos(sign * at_one, 1.0, power));
                terms.push(TrigTerm::cos(-sign * at_zero, 0.0, power));
            }
            d = d.derivative();
        }
        terms.retain(|t| t.coef != 0.0);
        terms
    }

    /// ĝ(l) = ∫₀¹ g(s) cos(ls) ds, exactly even in l.
    pub(crate) fn cosine_transform(&self, l: f64) -> f64 {
        let l = l.abs();
        if l <= SERIES_RADIUS {
            let l2 = l * l;
            let mut term = 1.0;
            let mut sum = 0.0;
            for k in 0..SERIES_TERMS {
                sum += term * self.moment(2 * k);
                term *= -l2 / ((2 * k + 1) * (2 * k + 2)) as f64;
            }
            sum
        } else {
            self.transform_terms().iter().map(|t| t.eval(l)).sum()
        }
    }

    /// Taylor coefficients of ĝ in l²: ĝ(l) = Σ c_k l^{2k}.
    pub(crate) fn series_coefficients(&self, count: usize) -> Vec<f64> {
        let mut factorial = 1.0;
        (0..count)
            .map(|k| {
                if k > 0 {
                    factorial *= ((2 * k - 1) * (2 * k)) as f64;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.moment(2 * k) / factorial
            })
            .collect()
    }
}

/// J_m(ω) = 2 L^m ĥ_m(Lω).
pub fn j_kernel(model: &ContinuumModel, omega: f64) -> f64 {
    let l = model.dim as f64 * omega;
    2.0 * (model.dim as f64).powi(model.m as i32) * Polynomial::gsc_profile(model.m).cosine_transform(l)
}

/// Taylor coefficients of J_m in l = Lω: J_m = Σₖ cₖ l^{2k}.
pub fn j_kernel_series(model: &ContinuumModel, count: usize) -> Vec<f64> {
    let scale = 2.0 * (model.dim as f64).powi(model.m as i32);
    Polynomial::gsc_profile(model.m)
        .series_coefficients(count)
        .into_iter()
        .map(|c| scale * c)
        .collect()
}

/// Closed form of J₂ in terms of l = Lω; valid for ω ≠ 0.
pub fn j2_closed_form(dim: usize, omega: f64) -> f64 {
    let eps = 1.0 / dim as f64;
    let l = dim as f64 * omega;
    let l2 = l * l;
    2.0 * eps / (l.powi(3) * omega.powi(3)) * (120.0 - 48.0 * l2 - (120.0 + 12.0 * l2 + l2 * l2) * l.cos())
}

/// P(ω) = 2(1 − cos l)/l², l = Lω, with P(0) = 1.
pub fn p_kernel(model: &ContinuumModel, omega: f64) -> f64 {
    2.0 * Polynomial::norm_profile().cosine_transform(model.dim as f64 * omega)
}

/// Connected factor 1 − sin²(πρω)/(πρω)² of the sine-kernel two-point function.
pub fn sine_kernel(omega: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(SpreadError::invalid("rho", format!("must be positive, got {rho}")));
    }
    Ok(1.0 - sinc(PI * rho * omega).powi(2))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Semicircle density of levels for an L-dimensional GUE normalized to [−2, 2].
pub fn semicircle_density(dim: usize, e: f64) -> f64 {
    if e.abs() >= 2.0 {
        0.0
    } else {
        dim as f64 / (2.0 * PI) * (4.0 - e * e).sqrt()
    }
}

/// Level-density weights over L²: (∫ρ², ρ(0)∫ρ), integrated with E = 2 sin θ.
fn density_weights() -> Result<(f64, f64)> {
    // ρ(2 sin θ) = (L/π) cos θ and dE = 2 cos θ dθ; the L² cancels.
    let squared = integrate(
        &|th: f64| 2.0 * (th.cos() / PI).powi(2) * th.cos(),
        -FRAC_PI_2,
        FRAC_PI_2,
        1e-14,
    )?;
    let linear = integrate(&|th: f64| 2.0 * th.cos() * th.cos() / PI, -FRAC_PI_2, FRAC_PI_2, 1e-14)?;
    let rho0 = 1.0 / PI;
    Ok((squared.value, rho0 * linear.value))
}

/// Normalized ensemble-averaged GSC on a v = t/L grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedCurve {
    pub m: u32,
    pub v: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest propagated quadrature error over the grid.
    pub error_estimate: f64,
}

/// ⟨C_m⟩/(L^m ⟨ℙ⟩) from the diagonal, smooth and sine-kernel parts of the
/// averaged two-point function, integrated numerically over ω.
pub fn averaged_gsc_numeric(model: &ContinuumModel, v: &[f64]) -> Result<AveragedCurve> {
    for &x in v {
        if !(0.0..=MAX_V).contains(&x) {
            return Err(SpreadError::invalid("v", format!("must lie in [0, {MAX_V}], got {x}")));
        }
    }
    let (wd, wc) = density_weights()?;
    let h = Polynomial::gsc_profile(model.m);
    let p = Polynomial::norm_profile();
    let results: Vec<Result<(f64, f64)>> = v
        .par_iter()
        .map(|&x| {
            let (qh, eh) = averaged_transform(&h, x, wd, wc)?;
            let (qp, ep) = averaged_transform(&p, x, wd, wc)?;
            let ratio = qh / qp;
            Ok((ratio, (eh + ratio.abs() * ep) / qp.abs()))
        })
        .collect();
    let mut values = Vec::with_capacity(v.len());
    let mut error_estimate: f64 = 0.0;
    for r in results {
        let (value, err) = r?;
        values.push(value);
        error_estimate = error_estimate.max(err);
    }
    Ok(AveragedCurve {
        m: model.m,
        v: v.to_vec(),
        values,
        error_estimate,
    })
}

/// ĝ(0) + 2W_d ∫₀^∞ ĝ cos(lv) dl − 2W_c ∫₀^∞ ĝ sinc²(l) cos(lv) dl, with the
/// weights already divided by L².
fn averaged_transform(g: &Polynomial, v: f64, wd: f64, wc: f64) -> Result<(f64, f64)> {
    let (a, b) = (2.0 * wd, 2.0 * wc);
    let integrand = |l: f64| g.cosine_transform(l) * (l * v).cos() * (a - b * sinc(l).powi(2));
    let panels = (QUAD_CUTOFF * (3.0 + v) / PI).ceil() as usize;
    let near = integrate_panels(&integrand, 0.0, QUAD_CUTOFF, panels, QUAD_TOLERANCE)?;

    let ghat = g.transform_terms();
    let with_phase = multiply(&ghat, &[TrigTerm::cos(1.0, v, 0)]);
    let sinc2 = [TrigTerm::cos(0.5, 0.0, 2), TrigTerm::cos(-0.5, 2.0, 2)];
    let mut tail_terms: Vec<TrigTerm> = with_phase.iter().map(|t| TrigTerm { coef: a * t.coef, ..*t }).collect();
    tail_terms.extend(
        multiply(&with_phase, &sinc2)
            .into_iter()
            .map(|t| TrigTerm { coef: -b * t.coef, ..t }),
    );
    let far = tail_integral(&tail_terms, QUAD_CUTOFF)?;

    Ok((g.moment(0) + near.value + far, near.error))
}

/// Closed-form ⟨C₂ᴺ(v)⟩ in four branches.
pub fn c2_piecewise(v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(SpreadError::invalid("v", format!("must be non-negative, got {v}")));
    }
    let v2 = v * v;
    let v3 = v2 * v;
    let v4 = v3 * v;
    let v5 = v4 * v;
    let v6 = v5 * v;
    let v7 = v6 * v;
    let value = if v < 1.0 {
        let num = 19.0 * PI / 7.0 + 640.0 * v2 - 1280.0 * v3 + (800.0 + 10.0 * PI) * v4 - (160.0 + 12.0 * PI) * v5
            + 5.0 * PI * v6
            - 5.0 * PI / 7.0 * v7;
        num / (160.0 + 5.0 * PI - 160.0 * v + 15.0 * PI * v2 - 5.0 * PI * v3)
    } else if v <= 2.0 {
        (-19.0 - 35.0 * v - 70.0 * v4 + 84.0 * v5 - 35.0 * v6 + 5.0 * v7) / (35.0 * (-1.0 - 3.0 * v - 3.0 * v2 + v3))
    } else if v <= 3.0 {
        (-6637.0 / 7.0 + 2565.0 * v - 2880.0 * v2 + 1760.0 * v3 - 630.0 * v4 + 132.0 * v5 - 15.0 * v6 + 5.0 / 7.0 * v7)
            / (-75.0 + 135.0 * v - 45.0 * v2 + 5.0 * v3)
    } else {
        1.0 / 3.0
    };
    Ok(value)
}

/// Location and height of the maximum of a sampled curve.
pub fn curve_peak(v: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &y)| (v[i], y))
}
