use std::f64::consts::PI;

use krylov_spread::bounds::{entropy_change_bound, gsc_change_bound, modified_cost_bound, BoundReport};
use krylov_spread::continuum::{averaged_gsc_numeric, c2_piecewise, ContinuumModel};
use krylov_spread::lanczos::{KrylovDecomposition, KrylovRecord, DEFAULT_TOLERANCE};
use krylov_spread::lie::{Su11Case, Su11Params, Su2Params};
use krylov_spread::linalg::{HermitianOperator, QuantumState};
use krylov_spread::propagate::PropagatorRegistry;
use krylov_spread::rmt::{run_ensemble, v_grid, EnsembleSpec, GscInitialState};
use krylov_spread::spread::{long_time_average, long_time_variance, SpreadProfile, SpreadSystem};
use krylov_spread::system::{SourceRegistry, SystemSpec, TimeGrid};
use krylov_spread::{Result, SpreadError};
use serde::Serialize;

use crate::output::{emit, emit_json, Csv};
use crate::{InputArgs, OutArgs, TimeArgs, UGrid};

const SU11_MAX_CUTOFF: usize = 4096;

fn invalid(name: &'static str, reason: impl Into<String>) -> SpreadError {
    SpreadError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

struct Loaded {
    system: SpreadSystem,
    spec_times: Option<TimeGrid>,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    if let Some(path) = &input.system {
        let mut spec = SystemSpec::load(path)?;
        if input.seed.is_some() {
            spec.seed = input.seed;
        }
        let system = spec.build(&SourceRegistry::with_defaults())?;
        return Ok(Loaded {
            system,
            spec_times: spec.times,
        });
    }
    if let Some(path) = &input.krylov {
        let record: KrylovRecord = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let krylov = KrylovDecomposition::from_record(record)?;
        return Ok(Loaded {
            system: SpreadSystem::from_krylov(krylov),
            spec_times: None,
        });
    }
    Err(invalid("system", "one of --system or --krylov is required"))
}

fn times(input: &InputArgs, loaded: &Loaded) -> Result<Vec<f64>> {
    if let Some(t_max) = input.t_max {
        return TimeGrid::range(input.t_min.unwrap_or(0.0), t_max, input.points.unwrap_or(201)).values();
    }
    match &loaded.spec_times {
        Some(grid) => grid.values(),
        None => Err(invalid(
            "times",
            "no time grid: pass --t-max or give `times` in the system spec",
        )),
    }
}

fn profile(input: &InputArgs, loaded: &Loaded, times: &[f64]) -> Result<SpreadProfile> {
    let registry = PropagatorRegistry::with_defaults();
    loaded.system.profile_with(registry.get(&input.propagator)?, times)
}

fn parse_orders(m: &[u32]) -> Result<()> {
    if m.is_empty() {
        return Err(invalid("m", "at least one order required"));
    }
    Ok(())
}

pub fn lanczos(input: &InputArgs, include_basis: bool, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    emit_json(out, &loaded.system.krylov().to_record(include_basis))
}

pub fn spread(input: &InputArgs, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let times = times(input, &loaded)?;
    let prof = profile(input, &loaded, &times)?;
    let mut csv = Csv::new(&["t", "n", "re", "im", "p"].map(String::from));
    for (k, t) in prof.times.iter().enumerate() {
        for (n, z) in prof.phi[k].iter().enumerate() {
            csv.row(&[*t, n as f64, z.re, z.im, prof.p[k][n]]);
        }
    }
    emit(out, &csv.into_string())
}

pub fn gsc(input: &InputArgs, m: &[u32], stats: bool, out: &OutArgs) -> Result<()> {
    parse_orders(m)?;
    let loaded = load(input)?;
    let times = times(input, &loaded)?;
    let prof = profile(input, &loaded, &times)?;
    let curves = m.iter().map(|&k| prof.gsc(k)).collect::<Result<Vec<_>>>()?;
    let mut header = vec!["t".to_string()];
    header.extend(m.iter().map(|k| format!("C_{k}")));
    if stats {
        header.extend(["variance".to_string(), "entropy".to_string()]);
    }
    let mut csv = Csv::new(&header);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(curves.iter().map(|c| c[i]));
        if stats {
            let d = prof.distribution(i)?;
            row.extend([d.variance(), d.entropy()]);
        }
        csv.row(&row);
    }
    emit(out, &csv.into_string())
}

#[derive(Serialize)]
struct PdfOutput {
    t: f64,
    weights: Vec<f64>,
}

pub fn pdf(input: &InputArgs, time: f64, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let prof = profile(input, &loaded, &[time])?;
    let d = prof.distribution(0)?;
    emit_json(
        out,
        &PdfOutput {
            t: time,
            weights: d.weights,
        },
    )
}

fn u_values(u: &UGrid, dim: usize) -> Result<Vec<f64>> {
    let points = u.u_points.unwrap_or(dim);
    let u_max = u.u_max.unwrap_or(2.0 * PI);
    if points == 0 || !u_max.is_finite() {
        return Err(invalid("u_points", "need at least one sample and a finite --u-max"));
    }
    Ok((0..points).map(|k| u_max * k as f64 / points as f64).collect())
}

pub fn charfun(input: &InputArgs, u: &UGrid, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let d = profile(input, &loaded, &[u.time])?.distribution(0)?;
    let mut csv = Csv::new(&["u", "re", "im"].map(String::from));
    for x in u_values(u, loaded.system.krylov().len())? {
        let chi = d.charfun(x);
        csv.row(&[x, chi.re, chi.im]);
    }
    emit(out, &csv.into_string())
}

pub fn echo(input: &InputArgs, u: &UGrid, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let d = profile(input, &loaded, &[u.time])?.distribution(0)?;
    let mut csv = Csv::new(&["u", "echo"].map(String::from));
    for x in u_values(u, loaded.system.krylov().len())? {
        csv.row(&[x, d.echo(x)]);
    }
    emit(out, &csv.into_string())
}

pub fn entropy(input: &InputArgs, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let times = times(input, &loaded)?;
    let prof = profile(input, &loaded, &times)?;
    let mut csv = Csv::new(&["t", "entropy"].map(String::from));
    for (i, &t) in times.iter().enumerate() {
        csv.row(&[t, prof.distribution(i)?.entropy()]);
    }
    emit(out, &csv.into_string())
}

fn closed_form_csv(times: &[f64], numeric: Option<Vec<f64>>, f: impl Fn(f64) -> [f64; 3]) -> String {
    let mut header = ["t", "C_1", "C_2", "variance"].map(String::from).to_vec();
    if numeric.is_some() {
        header.push("C_1_numeric".into());
    }
    let mut csv = Csv::new(&header);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(f(t));
        if let Some(n) = &numeric {
            row.push(n[i]);
        }
        csv.row(&row);
    }
    csv.into_string()
}

pub fn su2(alpha: f64, gamma: f64, delta: f64, j: f64, t: &TimeArgs, numeric: bool, out: &OutArgs) -> Result<()> {
    let params = Su2Params::new(alpha, gamma, delta, j)?;
    let times = TimeGrid::range(t.t_min, t.t_max, t.points).values()?;
    let numeric = if numeric {
        let sys = SpreadSystem::from_hamiltonian(params.hamiltonian(), params.initial_state(), DEFAULT_TOLERANCE)?;
        Some(sys.profile(&times)?.gsc(1)?)
    } else {
        None
    };
    let text = closed_form_csv(&times, numeric, |t| [params.sc(t), params.c2(t), params.variance(t)]);
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
pub fn su11(
    lambda: f64,
    omega: f64,
    beta: f64,
    h: f64,
    case: &str,
    t: &TimeArgs,
    numeric: bool,
    out: &OutArgs,
) -> Result<()> {
    let params = Su11Params::new(lambda, omega, beta, h)?;
    let case: Su11Case = case.parse()?;
    let times = TimeGrid::range(t.t_min, t.t_max, t.points).values()?;
    let numeric = if numeric {
        let run = params.truncated_run(case, &times, SU11_MAX_CUTOFF)?;
        if !run.converged {
            eprintln!(
                "warning: truncation tail mass {:.3e} at cutoff {}",
                run.tail_mass, run.cutoff
            );
        }
        Some(run.profile.gsc(1)?)
    } else {
        None
    };
    let text = closed_form_csv(&times, numeric, |t| {
        [params.sc(case, t), params.c2(case, t), params.variance(case, t)]
    });
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
pub fn rmt(
    dim: usize,
    samples: usize,
    seed: u64,
    m: &[u32],
    vmax: f64,
    points: usize,
    initial: &str,
    out: &OutArgs,
) -> Result<()> {
    parse_orders(m)?;
    let mut spec = EnsembleSpec::gue(dim, samples, seed)?;
    spec.gsc_initial = initial.parse::<GscInitialState>()?;
    let report = run_ensemble(&spec, m, &v_grid(vmax, points)?)?;
    emit_json(out, &report)
}

pub fn continuum(dim: usize, m: u32, vmax: f64, points: usize, out: &OutArgs) -> Result<()> {
    let model = ContinuumModel::new(dim, m)?;
    let v = v_grid(vmax, points)?;
    let curve = averaged_gsc_numeric(&model, &v)?;
    let mut header = vec!["v".to_string(), format!("C_{m}_numeric")];
    if m == 2 {
        header.push("C_2_exact".into());
    }
    let mut csv = Csv::new(&header);
    for (x, y) in v.iter().zip(&curve.values) {
        let mut row = vec![*x, *y];
        if m == 2 {
            row.push(c2_piecewise(*x)?);
        }
        csv.row(&row);
    }
    emit(out, &csv.into_string())
}

#[derive(Serialize)]
struct BoundsOutput {
    tau: f64,
    m: u32,
    norm: f64,
    gsc: BoundReport,
    entropy: BoundReport,
    modified_cost: BoundReport,
}

pub fn bounds(input: &InputArgs, tau: f64, m: u32, out: &OutArgs) -> Result<()> {
    let loaded = load(input)?;
    let sys = &loaded.system;
    let report = BoundsOutput {
        tau,
        m,
        norm: sys.norm()?,
        gsc: gsc_change_bound(sys, tau, m)?,
        entropy: entropy_change_bound(sys, tau)?,
        modified_cost: modified_cost_bound(sys, tau)?,
    };
    emit_json(out, &report)
}

#[derive(Serialize)]
struct LongTimeEntry {
    m: u32,
    value: f64,
}

#[derive(Serialize)]
struct LongTimeOutput {
    gsc: Vec<LongTimeEntry>,
    variance: f64,
}

pub fn longtime(input: &InputArgs, m: &[u32], out: &OutArgs) -> Result<()> {
    parse_orders(m)?;
    let loaded = load(input)?;
    let k = loaded.system.krylov();
    // Without the original operator the tridiagonal form started from e₀ is equivalent.
    let (h, psi0) = match (loaded.system.hamiltonian(), loaded.system.initial()) {
        (Some(h), Some(psi)) => (h.clone(), psi.clone()),
        _ => (
            HermitianOperator::from_tridiagonal(&k.tridiagonal()),
            QuantumState::basis(k.len(), 0)?,
        ),
    };
    let gsc = m
        .iter()
        .map(|&order| {
            Ok(LongTimeEntry {
                m: order,
                value: long_time_average(&h, &psi0, k, order)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let variance = long_time_variance(&h, &psi0, k)?;
    emit_json(out, &LongTimeOutput { gsc, variance })
}
