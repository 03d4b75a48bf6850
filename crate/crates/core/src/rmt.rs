//! GUE sampling and ensemble statistics of Lanczos coefficients and GSCs.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpreadError};
use crate::lanczos::{lanczos_scaled, KrylovDecomposition, DEFAULT_TOLERANCE};
use crate::linalg::{CVector, HermitianOperator, QuantumState};
use crate::spread::{check_order, SpreadSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Gue,
}

/// Initial state used for the GSC curves. Coefficient statistics always
/// start from the first basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GscInitialState {
    /// e₀ = (1, 0, …, 0)ᵀ.
    E0,
    /// Equal weight on every eigenstate, Σₐ |Eₐ⟩/√L.
    Uniform,
}

impl FromStr for GscInitialState {
    type Err = SpreadError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e0" => Ok(Self::E0),
            "uniform" => Ok(Self::Uniform),
            other => Err(SpreadError::invalid(
                "initial",
                format!("expected e0 or uniform, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for GscInitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::E0 => "e0",
            Self::Uniform => "uniform",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(rename = "L")]
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub gsc_initial: GscInitialState,
}

impl EnsembleSpec {
    pub fn gue(dim: usize, samples: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            dim,
            samples,
            seed,
            ensemble: Ensemble::Gue,
            gsc_initial: GscInitialState::Uniform,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(SpreadError::invalid("L", "must be at least 2"));
        }
        if self.samples < 1 {
            return Err(SpreadError::invalid("samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// Independent generator for realization `index`: the master seed keys a
/// ChaCha8 generator and the index selects its stream.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// GUE matrix with semicircle support [−2, 2]: diagonal N(0, 1/L), off-
/// diagonal real and imaginary parts N(0, 1/(2L)).
pub fn sample_gue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<HermitianOperator> {
    if dim < 2 {
        return Err(SpreadError::invalid("L", "must be at least 2"));
    }
    let diag_sd = (1.0 / dim as f64).sqrt();
    let off_sd = (0.5 / dim as f64).sqrt();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let x: f64 = rng.sample(StandardNormal);
        m[(col, col)] = Complex64::new(diag_sd * x, 0.0);
        for row in col + 1..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off_sd * re, off_sd * im);
            m[(row, col)] = z;
            m[(col, row)] = z.conj();
        }
    }
    HermitianOperator::new(m)
}

/// Semicircle distribution function on [−2, 2].
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (0.5 * x).asin() / std::f64::consts::PI
}

/// Kolmogorov–Smirnov distance between a sample and a distribution function.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Per-index means and variances of the rescaled Lanczos coefficients.
/// `mean_b[k]` belongs to b_{k+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStats {
    pub mean_a: Vec<f64>,
    pub var_a: Vec<f64>,
    pub mean_b: Vec<f64>,
    pub var_b: Vec<f64>,
}

/// Ensemble-mean GSC normalized by (L−1)ᵐ with its peak and saturation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GscCurve {
    pub m: u32,
    pub mean: Vec<f64>,
    pub peak_location: f64,
    pub peak_height: f64,
    /// Mean over the final 20% of the v window.
    pub saturation: f64,
}

impl GscCurve {
    /// (peak − saturation) / saturation.
    pub fn prominence(&self) -> f64 {
        (self.peak_height - self.saturation) / self.saturation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub spec: EnsembleSpec,
    pub v: Vec<f64>,
    pub coefficients: CoefficientStats,
    pub gsc: Vec<GscCurve>,
}

struct Realization {
    a: Vec<f64>,
    b: Vec<f64>,
    curves: Vec<Vec<f64>>,
}

fn realize(spec: &EnsembleSpec, index: usize, ms: &[u32], v: &[f64]) -> Result<Realization> {
    let mut rng = stream_rng(spec.seed, index as u64);
    let h = sample_gue(spec.dim, &mut rng)?;
    let e0 = QuantumState::basis(spec.dim, 0)?;
    let k = lanczos_scaled(&h, &e0, DEFAULT_TOLERANCE, h.norm_upper_bound())?;
    let b1 =
        *k.b.first()
            .ok_or_else(|| SpreadError::invalid("sample", "Krylov space is one-dimensional"))?;
    let a = k.a.iter().map(|x| x / b1).collect();
    let b = k.b.iter().map(|x| x / b1).collect();
    if ms.is_empty() {
        return Ok(Realization {
            a,
            b,
            curves: Vec::new(),
        });
    }

    let chain = match spec.gsc_initial {
        GscInitialState::E0 => k.rescaled(b1)?,
        GscInitialState::Uniform => uniform_weight_chain(&h, &k)?,
    };
    let times: Vec<f64> = v.iter().map(|x| x * spec.dim as f64).collect();
    let profile = SpreadSystem::from_krylov(chain).profile(&times)?;
    let span = (profile.krylov_dim() - 1) as f64;
    let curves = ms
        .iter()
        .map(|&m| Ok(profile.gsc(m)?.into_iter().map(|c| c / span.powi(m as i32)).collect()))
        .collect::<Result<_>>()?;
    Ok(Realization { a, b, curves })
}

/// Lanczos chain of diag(E) from the uniform vector, rescaled to b₁ = 1.
fn uniform_weight_chain(h: &HermitianOperator, k: &KrylovDecomposition) -> Result<KrylovDecomposition> {
    let energies = if k.len() == h.dim() {
        k.tridiagonal().eigenvalues()?
    } else {
        h.eigenvalues()?
    };
    let diag = HermitianOperator::from_real_diagonal(&energies)?;
    let uniform = QuantumState::normalized(CVector::from_element(energies.len(), Complex64::new(1.0, 0.0)))?;
    let scale = energies.iter().fold(0.0, |acc: f64, e| acc.max(e.abs()));
    let chain = lanczos_scaled(&diag, &uniform, DEFAULT_TOLERANCE, scale)?;
    let b1 = *chain
        .b
        .first()
        .ok_or_else(|| SpreadError::invalid("sample", "degenerate spectrum"))?;
    chain.rescaled(b1)
}

fn mean_and_variance(rows: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut mean = vec![0.0; width];
    let mut var = vec![0.0; width];
    for i in 0..width {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.get(i).copied()).collect();
        let n = vals.len() as f64;
        let mu = vals.iter().sum::<f64>() / n;
        mean[i] = mu;
        var[i] = if vals.len() > 1 {
            vals.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
    }
    (mean, var)
}

fn check_grid(v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(SpreadError::invalid("v", "need at least two grid points"));
    }
    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpreadError::invalid(
            "v",
            "grid must be nonnegative and strictly increasing",
        ));
    }
    Ok(())
}

fn summarize(m: u32, v: &[f64], mean: Vec<f64>) -> GscCurve {
    let (v0, v1) = (v[0], v[v.len() - 1]);
    let window_start = v0 + 0.8 * (v1 - v0);
    let (mut sat_sum, mut sat_count) = (0.0, 0usize);
    let (mut peak_location, mut peak_height) = (v0, f64::NEG_INFINITY);
    for (&x, &c) in v.iter().zip(&mean) {
        if x >= window_start {
            sat_sum += c;
            sat_count += 1;
        } else if c > peak_height {
            peak_height = c;
            peak_location = x;
        }
    }
    GscCurve {
        m,
        mean,
        peak_location,
        peak_height,
        saturation: sat_sum / sat_count as f64,
    }
}

/// Samples the ensemble once and aggregates coefficient statistics and,
/// for each order in `ms`, the mean normalized GSC on the grid `v = t/L`.
/// Realizations run in parallel; the reduction follows sample order, so
/// the report depends only on the spec.
pub fn run_ensemble(spec: &EnsembleSpec, ms: &[u32], v: &[f64]) -> Result<EnsembleReport> {
    spec.validate()?;
    for &m in ms {
        check_order(m)?;
    }
    if !ms.is_empty() {
        check_grid(v)?;
    }
    let runs = (0..spec.samples)
        .into_par_iter()
        .map(|i| realize(spec, i, ms, v))
        .collect::<Result<Vec<_>>>()?;

    let a_rows: Vec<&[f64]> = runs.iter().map(|r| r.a.as_slice()).collect();
    let b_rows: Vec<&[f64]> = runs.iter().map(|r| r.b.as_slice()).collect();
    let (mean_a, var_a) = mean_and_variance(&a_rows);
    let (mean_b, var_b) = mean_and_variance(&b_rows);

    let gsc = ms
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let mut mean = vec![0.0; v.len()];
            for r in &runs {
                for (acc, c) in mean.iter_mut().zip(&r.curves[j]) {
                    *acc += c;
                }
            }
            mean.iter_mut().for_each(|x| *x /= spec.samples as f64);
            summarize(m, v, mean)
        })
        .collect();

    Ok(EnsembleReport {
        spec: spec.clone(),
        v: if ms.is_empty() { Vec::new() } else { v.to_vec() },
        coefficients: CoefficientStats {
            mean_a,
            var_a,
            mean_b,
            var_b,
        },
        gsc,
    })
}

/// Coefficient statistics from e₀ only.
pub fn ensemble_lanczos_stats(spec: &EnsembleSpec) -> Result<CoefficientStats> {
    Ok(run_ensemble(spec, &[], &[])?.coefficients)
}

/// Mean normalized GSC curves with peaks and saturations.
pub fn ensemble_gsc(spec: &EnsembleSpec, ms: &[u32], v: &[f64]) -> Result<Vec<GscCurve>> {
    if ms.is_empty() {
        return Err(SpreadError::invalid("m", "at least one order required"));
    }
    Ok(run_ensemble(spec, ms, v)?.gsc)
}

/// Equally spaced grid of `points` values on [0, vmax].
pub fn v_grid(vmax: f64, points: usize) -> Result<Vec<f64>> {
    if !(vmax > 0.0 && vmax.is_finite()) || points < 2 {
        return Err(SpreadError::invalid("v", "need vmax > 0 and at least two points"));
    }
    Ok((0..points).map(|i| vmax * i as f64 / (points - 1) as f64).collect())
}
