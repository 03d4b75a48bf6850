//! Interchangeable routes from a Krylov decomposition to the amplitudes
//! φₙ(t) = ⟨Kₙ|Ψ(t)⟩.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SpreadError};
use crate::lanczos::KrylovDecomposition;
use crate::linalg::{HermitianOperator, QuantumState};

/// Inputs available to a propagator. `hamiltonian` and `initial` are absent
/// for coefficient-only decompositions.
#[derive(Clone, Copy)]
pub struct PropagationInput<'a> {
    pub krylov: &'a KrylovDecomposition,
    pub hamiltonian: Option<&'a HermitianOperator>,
    pub initial: Option<&'a QuantumState>,
}

pub trait Propagator: Send + Sync {
    fn name(&self) -> &'static str;

    /// One row of L amplitudes per entry of `times`.
    fn amplitudes(&self, input: PropagationInput<'_>, times: &[f64]) -> Result<Vec<Vec<Complex64>>>;
}

/// Evolves in the full Hilbert space with the spectral decomposition of H
/// and projects onto the stored Krylov vectors.
pub struct SpectralPropagator;

impl Propagator for SpectralPropagator {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn amplitudes(&self, input: PropagationInput<'_>, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let h = input
            .hamiltonian
            .ok_or_else(|| SpreadError::invalid("propagator", "spectral propagation needs the Hamiltonian"))?;
        let psi0 = input
            .initial
            .ok_or_else(|| SpreadError::invalid("propagator", "spectral propagation needs the initial state"))?;
        let q = input.krylov.basis_matrix()?;
        let spectral = h.spectral()?;
        let c = spectral.coefficients(psi0)?;
        Ok(times
            .par_iter()
            .map(|&t| {
                let psi_t = spectral.evolve_coefficients(&c, t);
                q.ad_mul(&psi_t).iter().copied().collect()
            })
            .collect())
    }
}

/// Evolves inside the Krylov space with the tridiagonal matrix alone:
/// φₙ(t) = Σₖ Zₙₖ Z₀ₖ e^{−iθₖt}.
pub struct TridiagonalPropagator;

impl Propagator for TridiagonalPropagator {
    fn name(&self) -> &'static str {
        "krylov"
    }

    fn amplitudes(&self, input: PropagationInput<'_>, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let (theta, z) = input.krylov.tridiagonal().eigen()?;
        let l = theta.len();
        let weights: Vec<f64> = (0..l).map(|k| z[(0, k)]).collect();
        Ok(times
            .par_iter()
            .map(|&t| {
                let phases: Vec<Complex64> = theta
                    .iter()
                    .zip(&weights)
                    .map(|(&th, &w)| Complex64::from_polar(w, -th * t))
                    .collect();
                (0..l)
                    .map(|n| phases.iter().enumerate().map(|(k, ph)| ph * z[(n, k)]).sum())
                    .collect()
            })
            .collect())
    }
}

/// Propagators registered by name.
pub struct PropagatorRegistry {
    entries: BTreeMap<&'static str, Box<dyn Propagator>>,
}

impl PropagatorRegistry {
    pub const DEFAULT: &'static str = "krylov";

    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(SpectralPropagator));
        r.register(Box::new(TridiagonalPropagator));
        r
    }

    pub fn register(&mut self, propagator: Box<dyn Propagator>) {
        self.entries.insert(propagator.name(), propagator);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Propagator> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| SpreadError::UnknownStrategy {
                kind: "propagator",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
