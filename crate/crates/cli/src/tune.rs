//! Detuning search followed by a verification propagation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use circulant_core::dynamics::propagate;
use circulant_core::gatecheck::{gate_fidelity, target_gate};
use circulant_core::hamiltonian::DetuningPair;
use circulant_core::tuner::{tune, TuneResult, TuneTarget};
use circulant_core::units::to_khz;

use crate::config::ScenarioConfig;
use crate::csv::Table;
use crate::scenario::gate_branch;
use crate::{CliError, CliResult};

/// Residual tolerance of the phase search, rad.
pub const TUNE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TuneReport {
    pub k: u32,
    pub p: u32,
    pub result: TuneResult,
    pub gate_infidelity: f64,
    pub steps: usize,
}

/// Tunes Δ₁, Δ₂ of the config's schedule so that α₂ = 2kπ and β₂ = 2pπ.
/// Nonzero detunings in the config seed the search.
pub fn run_tune(k: u32, p: u32, cfg: &ScenarioConfig) -> CliResult<TuneReport> {
    if k <= p {
        return Err(CliError::config(format!("tune: requires k > p, got k = {k}, p = {p}")));
    }
    if p == 0 {
        return Err(CliError::config("tune: requires p > 0"));
    }
    let r = cfg.resolve()?;
    let branch = gate_branch(&r.schedule)
        .filter(|_| r.schedule.has_analytic_phases())
        .ok_or_else(|| CliError::config("schedule: tuning needs variant = case2 and phi_pi = 0.25"))?;
    let target = TuneTarget::new(k, p, r.schedule, TUNE_TOLERANCE)?;
    let d = r.schedule.detuning;
    let seed = (d.delta1 > d.delta2 && d.delta2 > 0.0).then_some(DetuningPair { ..d });
    let result = tune(&target, seed)?;
    let run = propagate(&r.schedule.with_detuning(result.detuning), &r.control)?;
    let gate_infidelity = 1.0 - gate_fidelity(&run.propagator, &target_gate(branch));
    Ok(TuneReport { k, p, result, gate_infidelity, steps: run.steps })
}

impl TuneReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "k",
            "p",
            "delta1_khz",
            "delta2_khz",
            "alpha2_over_pi",
            "beta2_over_pi",
            "residual_alpha",
            "residual_beta",
            "gate_infidelity",
        ]);
        let r = &self.result;
        t.push(vec![
            self.k as f64,
            self.p as f64,
            to_khz(r.detuning.delta1),
            to_khz(r.detuning.delta2),
            r.phases.alpha / PI,
            r.phases.beta / PI,
            r.residual[0],
            r.residual[1],
            self.gate_infidelity,
        ]);
        t
    }

    pub fn summary(&self) -> String {
        let r = &self.result;
        let mut s = String::new();
        let _ = writeln!(s, "k = {}\np = {}", self.k, self.p);
        let _ = writeln!(s, "delta1_khz = {:.6}", to_khz(r.detuning.delta1));
        let _ = writeln!(s, "delta2_khz = {:.6}", to_khz(r.detuning.delta2));
        let _ = writeln!(s, "alpha2_over_pi = {:.9}", r.phases.alpha / PI);
        let _ = writeln!(s, "beta2_over_pi = {:.9}", r.phases.beta / PI);
        let _ = writeln!(s, "residual_rad = [{:.3e}, {:.3e}]", r.residual[0], r.residual[1]);
        let _ = writeln!(s, "iterations = {}", r.iterations);
        let _ = writeln!(s, "gate_infidelity = {:.6e}", self.gate_infidelity);
        let _ = writeln!(s, "steps = {}", self.steps);
        s
    }
}
