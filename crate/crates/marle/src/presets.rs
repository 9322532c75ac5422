//! Initial distributions named in the `[scenario]` section.

use std::sync::Arc;

use marle_core::juttner::{juttner_eval, EquilibriumParams, Juttner};
use marle_core::quadrature::{Distribution, PhaseGrid};

use crate::config::{Preset, Scenario};
use crate::error::Result;

/// Primary Jüttner parameters `(n, u, gamma)` of the scenario.
pub fn primary_params(s: &Scenario) -> Result<EquilibriumParams> {
    Ok(EquilibriumParams::new(s.n, s.u, s.gamma)?)
}

pub fn initial_distribution(s: &Scenario, grid: &Arc<PhaseGrid>) -> Result<Distribution> {
    let primary = primary_params(s)?;
    Ok(match s.preset {
        Preset::Single => juttner_eval(&primary, grid)?,
        Preset::Mixture => {
            let second = EquilibriumParams::new(s.n2, s.u2, s.gamma2)?;
            juttner_eval(&primary, grid)?.sum(&juttner_eval(&second, grid)?)?
        }
        Preset::Bump => {
            let consts = *grid.consts();
            let fe = Juttner::new(primary, consts)?;
            let mc = consts.mc();
            let (amp, center, width) = (s.bump_amplitude, s.bump_center, s.bump_width);
            Distribution::from_fn(grid.clone(), |p, internal| {
                let d2: f64 = (0..3).map(|k| (p[k + 1] / mc - center[k]).powi(2)).sum();
                fe.value(p, internal) * (1.0 + amp * (-0.5 * d2 / (width * width)).exp())
            })?
        }
    })
}
