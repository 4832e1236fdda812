//! Parameter sweeps over one schedule field, evaluated in parallel and
//! collected in grid order.

use std::f64::consts::PI;

use circulant_core::dynamics::{adiabatic_phases, propagate, ScheduleVariant};
use circulant_core::gatecheck::{entangled_phases, gate_fidelity, target_gate};
use circulant_core::hamiltonian::fourier_state;
use circulant_core::linalg::eigh;
use circulant_core::units::to_khz;
use rayon::prelude::*;

use crate::config::{Observable, ScenarioConfig, SweepConfig};
use crate::csv::Table;
use crate::scenario::gate_branch;
use crate::{CliError, CliResult};

fn columns(sweep: &SweepConfig) -> Vec<String> {
    let mut c = vec![sweep.parameter.clone()];
    match sweep.observable {
        Observable::GateFidelity => c.push("gate_infidelity".into()),
        Observable::StateFidelity => c.push(format!("p_psi{}", sweep.target_fourier)),
        Observable::Phases => c.extend(["phase_a_over_pi".into(), "phase_b_over_pi".into()]),
        Observable::Spectrum => c.extend((0..4).map(|k| format!("eig{k}_khz"))),
    }
    c
}

/// One grid point.
pub fn evaluate(cfg: &ScenarioConfig, sweep: &SweepConfig, value: f64) -> CliResult<Vec<f64>> {
    let mut point = cfg.clone();
    *point.schedule.field_mut(&sweep.parameter)? = value;
    point.sweep = None;
    let r = point.resolve()?;
    let s = r.schedule;
    let mut row = vec![value];
    match sweep.observable {
        Observable::GateFidelity => {
            let b = gate_branch(&s).ok_or_else(|| {
                CliError::config("sweep.observable: gate_fidelity needs a case1/case2 schedule at phi_pi = +-0.25")
            })?;
            let u = propagate(&s, &r.control)?.propagator;
            row.push(1.0 - gate_fidelity(&u, &target_gate(b)));
        }
        Observable::StateFidelity => {
            let phases = if s.has_analytic_phases() { Some(adiabatic_phases(&s)?.alpha) } else { None };
            let init = point.initial.state(&s, phases)?;
            let u = propagate(&s, &r.control)?.propagator;
            row.push(fourier_state(sweep.target_fourier)?.overlap_sqr(&u.apply(&init)));
        }
        Observable::Phases => {
            let (a, b) = if s.variant == ScheduleVariant::RabiControlled {
                entangled_phases(&s)?
            } else if s.has_analytic_phases() {
                let p = adiabatic_phases(&s)?;
                (p.alpha, p.beta)
            } else {
                return Err(CliError::config("sweep.observable: phases need case2 at phi_pi = 0.25 or rabi_controlled"));
            };
            row.extend([a / PI, b / PI]);
        }
        Observable::Spectrum => {
            let e = eigh(&s.hamiltonian_at(s.t_max)?)?;
            row.extend(e.values.iter().map(|&v| to_khz(v)));
        }
    }
    Ok(row)
}

/// Evaluates every grid point; the first failing point (in grid order)
/// aborts the sweep.
pub fn run_sweep(cfg: &ScenarioConfig) -> CliResult<Table> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::config("sweep: missing [sweep] section"))?;
    cfg.resolve()?;
    let rows: Vec<CliResult<Vec<f64>>> = sweep.values.par_iter().map(|&v| evaluate(cfg, sweep, v)).collect();
    let names = columns(sweep);
    let mut t = Table::new(&names.iter().map(String::as_str).collect::<Vec<_>>());
    t.comment(&cfg.to_toml());
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}
