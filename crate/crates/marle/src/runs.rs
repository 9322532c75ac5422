//! The four subcommands, each turning a configuration into a [`Table`].

use std::f64::consts::PI;

use log::info;
use marle_core::closure::{fit_equilibrium, ClosureTolerances};
use marle_core::dynamics::{diagnostics, Diagnostics, EquilibriumSolver, Relaxer, SlabState, Transport};
use marle_core::juttner::{
    equilibrium_from_f, juttner_eval, moment_match_residuals, radial_integrals, ratio_lower_bound, ratio_upper_bound,
    EquilibriumParams, DEFAULT_RADIAL_TOL,
};
use marle_core::quadrature::build_phase_grid;
use marle_core::FourVector;

use crate::config::{Preset, RunConfig};
use crate::error::Result;
use crate::presets::{initial_distribution, primary_params};
use crate::table::{Table, Value};

/// `M`, `M̃` and the ratio over a geometric γ scan.
pub fn run_mcurves(cfg: &RunConfig) -> Result<Table> {
    let consts = cfg.constants()?;
    let s = &cfg.scenario;
    let mut table =
        Table::new(vec!["gamma", "M", "Mtilde", "ratio", "upper_bound", "lower_bound", "monotone_ok"]);
    let step = (s.gamma_end / s.gamma_start).ln() / (s.points - 1) as f64;
    let mut previous = f64::NEG_INFINITY;
    for k in 0..s.points {
        let gamma = if k + 1 == s.points { s.gamma_end } else { s.gamma_start * (step * k as f64).exp() };
        let ri = radial_integrals(gamma, &consts, DEFAULT_RADIAL_TOL)?;
        let ratio = ri.ratio();
        table.push(vec![
            gamma.into(),
            ri.unscaled(ri.m).into(),
            ri.unscaled(ri.mtilde).into(),
            ratio.into(),
            ratio_upper_bound(gamma, &consts).into(),
            ratio_lower_bound(gamma, &consts).into(),
            Value::Bool(ratio > previous),
        ]);
        previous = ratio;
    }
    Ok(table)
}

/// `max(|Δn|/n, |Δu_i|/c, |Δγ|/γ)`.
fn params_distance(a: &EquilibriumParams, b: &EquilibriumParams, c: f64) -> f64 {
    let du = (0..3).map(|k| (a.u[k] - b.u[k]).abs() / c).fold(0.0, f64::max);
    ((a.n - b.n).abs() / b.n).max(du).max((a.gamma - b.gamma).abs() / b.gamma)
}

/// Equilibrium recovered from the preset on successively doubled grids.
///
/// `change` compares each level with the previous one; `error` compares with
/// the preset parameters and is only filled for the single preset.
pub fn run_equilibrate(cfg: &RunConfig) -> Result<Table> {
    let consts = cfg.constants()?;
    let s = &cfg.scenario;
    let target = primary_params(s)?;
    let mut table = Table::new(vec![
        "N_p",
        "N_I",
        "n",
        "u_x",
        "u_y",
        "u_z",
        "gamma",
        "residual_scalar",
        "residual_flux",
        "closure_residual",
        "change",
        "error",
    ]);
    let mut previous: Option<EquilibriumParams> = None;
    for level in 0..s.levels {
        let grid_cfg = cfg.grid_config().refined(1 << level);
        info!("equilibrate: grid {}^3 x {}", grid_cfg.n_p, grid_cfg.n_i);
        let grid = build_phase_grid(grid_cfg, consts)?;
        let f = initial_distribution(s, &grid)?;
        let params = equilibrium_from_f(&f)?;
        let fe = juttner_eval(&params, &grid)?;
        let (rs, rv) = moment_match_residuals(&f, &fe)?;
        let fit = fit_equilibrium(&f, None, &ClosureTolerances::default())?;
        let change = previous.as_ref().map(|p| params_distance(&params, p, consts.c()));
        let error = (s.preset == Preset::Single).then(|| params_distance(&params, &target, consts.c()));
        table.push(vec![
            Value::Int(grid_cfg.n_p),
            Value::Int(grid_cfg.n_i),
            params.n.into(),
            params.u[0].into(),
            params.u[1].into(),
            params.u[2].into(),
            params.gamma.into(),
            rs.into(),
            rv.max_abs().into(),
            fit.residual.into(),
            change.into(),
            error.into(),
        ]);
        previous = Some(params);
    }
    Ok(table)
}

const SERIES_HEADER: [&str; 16] = [
    "t",
    "N",
    "V0",
    "V1",
    "V2",
    "V3",
    "T00",
    "T01",
    "T02",
    "T03",
    "h0",
    "entropy_production",
    "residual_scalar",
    "residual_flux",
    "cancellation_number",
    "cancellation_energy",
];

/// Diagnostics summed over cells of width `dx`; residuals are the cell maxima.
fn combine(records: &[Diagnostics], dx: f64) -> Diagnostics {
    let mut total = Diagnostics { t: records[0].t, ..zero_diagnostics() };
    for d in records {
        total.n += dx * d.n;
        for mu in 0..4 {
            total.v.0[mu] += dx * d.v[mu];
            total.t0.0[mu] += dx * d.t0[mu];
            total.cancellation_energy.0[mu] += dx * d.cancellation_energy[mu];
        }
        total.h0 += dx * d.h0;
        total.entropy_production += dx * d.entropy_production;
        total.cancellation_number += dx * d.cancellation_number;
        total.residual_scalar = total.residual_scalar.max(d.residual_scalar.abs());
        let flux = total.residual_flux[0].max(d.residual_flux.max_abs());
        total.residual_flux = FourVector::new(flux, 0.0, 0.0, 0.0);
    }
    total
}

fn zero_diagnostics() -> Diagnostics {
    Diagnostics {
        t: 0.0,
        n: 0.0,
        v: FourVector::ZERO,
        t0: FourVector::ZERO,
        h0: 0.0,
        entropy_production: 0.0,
        residual_scalar: 0.0,
        residual_flux: FourVector::ZERO,
        cancellation_number: 0.0,
        cancellation_energy: FourVector::ZERO,
    }
}

fn series_row(d: &Diagnostics) -> Vec<Value> {
    let mut row = vec![d.t, d.n];
    row.extend(d.v.0);
    row.extend(d.t0.0);
    row.extend([
        d.h0,
        d.entropy_production,
        d.residual_scalar,
        d.residual_flux.max_abs(),
        d.cancellation_number,
        d.cancellation_energy.max_abs(),
    ]);
    row.into_iter().map(Value::Real).collect()
}

/// Diagnostics use a fresh solver for every row, so a row depends only on
/// the state and not on which earlier rows were written.
fn is_output_step(step: usize, nsteps: usize, every: usize) -> bool {
    step.is_multiple_of(every) || step == nsteps
}

/// Homogeneous relaxation of the preset.
pub fn run_relax(cfg: &RunConfig) -> Result<Table> {
    let consts = cfg.constants()?;
    let s = &cfg.scenario;
    let grid = build_phase_grid(cfg.grid_config(), consts)?;
    let mut relaxer = Relaxer::new(initial_distribution(s, &grid)?, s.dt, s.refreeze, s.closure)?;
    let mut table = Table::new(SERIES_HEADER.to_vec());
    for step in 0..=s.nsteps {
        if step > 0 {
            relaxer.step()?;
        }
        if is_output_step(step, s.nsteps, s.output_every) {
            let fe = EquilibriumSolver::new(s.closure).solve(relaxer.state())?;
            table.push(series_row(&diagnostics(relaxer.state(), &fe, relaxer.time())?));
        }
    }
    Ok(table)
}

/// Periodic slab with density `1 + amplitude·sin(2πx/L)` times the preset.
pub fn run_transport(cfg: &RunConfig) -> Result<Table> {
    let consts = cfg.constants()?;
    let s = &cfg.scenario;
    let grid = build_phase_grid(cfg.grid_config(), consts)?;
    let base = initial_distribution(s, &grid)?;
    let (length, amplitude) = (s.length, s.amplitude);
    let slab = SlabState::from_profile(&base, s.ncells, length, |x| 1.0 + amplitude * (2.0 * PI * x / length).sin())?;
    let dx = slab.dx;
    let mut transport = Transport::new(slab, s.dt, s.closure)?;
    let mut table = Table::new(SERIES_HEADER.to_vec());
    for step in 0..=s.nsteps {
        if step > 0 {
            transport.step()?;
        }
        if is_output_step(step, s.nsteps, s.output_every) {
            let state = transport.state();
            let records = state
                .cells
                .iter()
                .map(|f| diagnostics(f, &EquilibriumSolver::new(s.closure).solve(f)?, state.t))
                .collect::<marle_core::Result<Vec<_>>>()?;
            table.push(series_row(&combine(&records, dx)));
        }
    }
    Ok(table)
}
