//! JSON system specifications and the registry of system sources.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, SpreadError};
use crate::lanczos::DEFAULT_TOLERANCE;
use crate::lie::{Su11Case, Su11Params, Su2Params};
use crate::linalg::{CMatrix, CVector, HermitianOperator, QuantumState};
use crate::rmt::{sample_gue, stream_rng};
use crate::spread::SpreadSystem;

/// Time grid as an inclusive uniform range or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Range { t_min: f64, t_max: f64, points: usize },
    List { list: Vec<f64> },
}

impl TimeGrid {
    pub fn range(t_min: f64, t_max: f64, points: usize) -> Self {
        Self::Range { t_min, t_max, points }
    }

    /// Materializes the grid, requiring finite, strictly increasing times.
    pub fn values(&self) -> Result<Vec<f64>> {
        let times = match *self {
            Self::Range { t_min, t_max, points } => {
                if points == 0 {
                    return Err(SpreadError::invalid("points", "must be at least 1"));
                }
                if points == 1 {
                    vec![t_min]
                } else {
                    let step = (t_max - t_min) / (points - 1) as f64;
                    (0..points)
                        .map(|i| {
                            if i + 1 == points {
                                t_max
                            } else {
                                t_min + step * i as f64
                            }
                        })
                        .collect()
                }
            }
            Self::List { ref list } => list.clone(),
        };
        if times.is_empty() {
            return Err(SpreadError::invalid("times", "grid is empty"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(SpreadError::invalid("times", "all times must be finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpreadError::invalid("times", "grid must be strictly increasing"));
        }
        Ok(times)
    }
}

/// A system to analyse: which source builds it, the source's parameters,
/// an optional time grid and an optional seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub source: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Directory that relative paths inside `params` resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_json(&std::fs::read_to_string(path)?)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    pub fn build(&self, registry: &SourceRegistry) -> Result<SpreadSystem> {
        let ctx = BuildContext {
            seed: self.seed,
            base_dir: self.base_dir.as_deref(),
        };
        registry.get(&self.source)?.build(&self.params, &ctx)
    }
}

pub struct BuildContext<'a> {
    pub seed: Option<u64>,
    pub base_dir: Option<&'a Path>,
}

pub trait SystemSource: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, params: &Value, ctx: &BuildContext<'_>) -> Result<SpreadSystem>;
}

fn parse<T: for<'de> Deserialize<'de>>(params: &Value) -> Result<T> {
    Ok(T::deserialize(params)?)
}

fn to_complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

/// Row-major Hamiltonian with [re, im] entries and an optional initial
/// state (defaults to the first basis vector).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
}

impl MatrixPayload {
    pub fn from_system(h: &HermitianOperator, psi0: &QuantumState) -> Self {
        let m = h.entries();
        let hamiltonian = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        let initial = Some(psi0.amplitudes().iter().map(|z| [z.re, z.im]).collect());
        Self { hamiltonian, initial }
    }

    pub fn into_system(self) -> Result<SpreadSystem> {
        let dim = self.hamiltonian.len();
        if dim == 0 {
            return Err(SpreadError::invalid("hamiltonian", "matrix is empty"));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (i, row) in self.hamiltonian.iter().enumerate() {
            if row.len() != dim {
                return Err(SpreadError::invalid(
                    "hamiltonian",
                    format!("row {i} has {} entries, expected {dim}", row.len()),
                ));
            }
            for (j, z) in to_complex(row).into_iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        let h = HermitianOperator::new(m)?;
        let psi0 = match self.initial {
            Some(v) => {
                if v.len() != dim {
                    return Err(SpreadError::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    });
                }
                QuantumState::normalized(CVector::from_vec(to_complex(&v)))?
            }
            None => QuantumState::basis(dim, 0)?,
        };
        SpreadSystem::from_hamiltonian(h, psi0, DEFAULT_TOLERANCE)
    }
}

pub struct MatrixFileSource;

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixParams {
    Inline(MatrixPayload),
    File { path: PathBuf },
}

impl SystemSource for MatrixFileSource {
    fn name(&self) -> &'static str {
        "matrix-file"
    }

    fn build(&self, params: &Value, ctx: &BuildContext<'_>) -> Result<SpreadSystem> {
        let payload = match parse::<MatrixParams>(params)? {
            MatrixParams::Inline(p) => p,
            MatrixParams::File { path } => {
                let full = match ctx.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path,
                };
                serde_json::from_str(&std::fs::read_to_string(full)?)?
            }
        };
        payload.into_system()
    }
}

pub struct Su2Source;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Su2Fields {
    alpha: f64,
    gamma: f64,
    delta: f64,
    j: f64,
}

impl SystemSource for Su2Source {
    fn name(&self) -> &'static str {
        "su2-params"
    }

    fn build(&self, params: &Value, _: &BuildContext<'_>) -> Result<SpreadSystem> {
        let f: Su2Fields = parse(params)?;
        let p = Su2Params::new(f.alpha, f.gamma, f.delta, f.j)?;
        SpreadSystem::from_hamiltonian(p.hamiltonian(), p.initial_state(), DEFAULT_TOLERANCE)
    }
}

pub struct Su11Source;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Su11Fields {
    lambda: f64,
    omega: f64,
    #[serde(default)]
    beta: f64,
    h: f64,
    #[serde(default = "default_case")]
    case: Su11Case,
    #[serde(default = "default_cutoff")]
    cutoff: usize,
}

fn default_case() -> Su11Case {
    Su11Case::I
}

fn default_cutoff() -> usize {
    128
}

impl SystemSource for Su11Source {
    fn name(&self) -> &'static str {
        "su11-params"
    }

    fn build(&self, params: &Value, _: &BuildContext<'_>) -> Result<SpreadSystem> {
        let f: Su11Fields = parse(params)?;
        let p = Su11Params::new(f.lambda, f.omega, f.beta, f.h)?;
        let h = p.truncated_hamiltonian(f.case, f.cutoff)?;
        let psi0 = QuantumState::basis(f.cutoff, 0)?;
        SpreadSystem::from_hamiltonian(h, psi0, DEFAULT_TOLERANCE)
    }
}

/// One GUE draw from stream 0 of the spec's seed, started from e₀.
pub struct GueSource;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GueFields {
    #[serde(rename = "L")]
    dim: usize,
}

impl SystemSource for GueSource {
    fn name(&self) -> &'static str {
        "gue-sample"
    }

    fn build(&self, params: &Value, ctx: &BuildContext<'_>) -> Result<SpreadSystem> {
        let f: GueFields = parse(params)?;
        let seed = ctx
            .seed
            .ok_or_else(|| SpreadError::invalid("seed", "required for gue-sample"))?;
        if f.dim < 1 {
            return Err(SpreadError::invalid("L", "must be at least 1"));
        }
        let h = sample_gue(f.dim, &mut stream_rng(seed, 0))?;
        SpreadSystem::from_hamiltonian(h, QuantumState::basis(f.dim, 0)?, DEFAULT_TOLERANCE)
    }
}

pub struct SourceRegistry {
    entries: BTreeMap<&'static str, Box<dyn SystemSource>>,
}

impl SourceRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(MatrixFileSource));
        r.register(Box::new(Su2Source));
        r.register(Box::new(Su11Source));
        r.register(Box::new(GueSource));
        r
    }

    pub fn register(&mut self, source: Box<dyn SystemSource>) {
        self.entries.insert(source.name(), source);
    }

    pub fn get(&self, name: &str) -> Result<&dyn SystemSource> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| SpreadError::UnknownStrategy {
                kind: "source",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SourceRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
