//! Single-schedule runs: sampled propagation, diagnostics and the
//! time-series CSV.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::path::PathBuf;

use circulant_core::dynamics::{
    adiabatic_phases, propagate_adaptive, propagate_observed, AdiabaticPhases, RampSchedule, ScheduleVariant,
    StepControl,
};
use circulant_core::gatecheck::{entangled_fidelity_with_propagator, entangled_phases, gate_fidelity, target_gate, GateBranch};
use circulant_core::hamiltonian::fourier_state;
use circulant_core::linalg::{HermitianOperator, Mat4, StateVector, UnitaryOperator};
use circulant_core::spectral::{adiabaticity_margin, track};
use circulant_core::sta::{hamiltonian_with_cd, transport_infidelities};

use crate::config::ScenarioConfig;
use crate::csv::Table;
use crate::CliResult;

/// U(t) at roughly evenly spaced times, always including 0 and t_max.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub times: Vec<f64>,
    pub unitaries: Vec<Mat4>,
    pub steps: usize,
    pub last_change: f64,
}

impl Sampled {
    pub fn last(&self) -> &Mat4 {
        self.unitaries.last().expect("at least the initial sample")
    }
}

/// Converges the step count by halving, then replays that grid recording
/// `samples` intermediate propagators.
pub fn sampled_propagation<F>(h: F, t_max: f64, control: &StepControl, samples: usize) -> CliResult<Sampled>
where
    F: Fn(f64) -> HermitianOperator,
{
    let (_, steps, last_change) = propagate_adaptive(&h, t_max, control)?;
    let samples = samples.clamp(1, steps);
    let marks: Vec<usize> = (0..=samples).map(|j| (j * steps + samples / 2) / samples).collect();
    let mut next = 0;
    let (mut times, mut unitaries) = (Vec::with_capacity(samples + 1), Vec::with_capacity(samples + 1));
    propagate_observed(&h, t_max, steps, |k, t, u| {
        if next < marks.len() && k == marks[next] {
            times.push(t);
            unitaries.push(*u);
            next += 1;
        }
    })?;
    Ok(Sampled { times, unitaries, steps, last_change })
}

/// Hamiltonian of the schedule, with the counterdiabatic field if asked.
pub fn hamiltonian_fn(schedule: &RampSchedule, counterdiabatic: bool) -> impl Fn(f64) -> HermitianOperator + '_ {
    move |t| {
        let t = t.clamp(0.0, schedule.t_max);
        let h = if counterdiabatic { hamiltonian_with_cd(schedule, t, 1.0) } else { schedule.hamiltonian_at(t) };
        h.expect("time clamped into the schedule window")
    }
}

/// Gate branch implied by φ = ±π/4, if any.
pub fn gate_branch(schedule: &RampSchedule) -> Option<GateBranch> {
    if schedule.variant == ScheduleVariant::RabiControlled {
        return None;
    }
    if (schedule.phi - FRAC_PI_4).abs() < 1e-15 {
        Some(GateBranch::PlusQuarterPi)
    } else if (schedule.phi + FRAC_PI_4).abs() < 1e-15 {
        Some(GateBranch::MinusQuarterPi)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub schedule: RampSchedule,
    pub initial: StateVector,
    pub sampled: Sampled,
    pub propagator: UnitaryOperator,
    pub final_state: StateVector,
    pub unitarity_defect: f64,
    /// max |U − I|
    pub identity_distance: f64,
    pub phases: Option<AdiabaticPhases>,
    pub gate_infidelity: Option<f64>,
    pub transport_infidelities: Option<[f64; 4]>,
    /// (F, α, β)
    pub entangled: Option<(f64, f64, f64)>,
    pub adiabaticity_margin: Option<f64>,
}

pub const BASIS_LABELS: [&str; 4] = ["dd", "du", "ud", "uu"];

pub fn run_scenario(cfg: &ScenarioConfig) -> CliResult<ScenarioReport> {
    let r = cfg.resolve()?;
    let s = r.schedule;
    let phases = if s.has_analytic_phases() { Some(adiabatic_phases(&s)?) } else { None };
    let initial = cfg.initial.state(&s, phases.map(|p| p.alpha))?;
    let sampled =
        sampled_propagation(hamiltonian_fn(&s, cfg.integrator.counterdiabatic), s.t_max, &r.control, cfg.integrator.samples)?;
    let propagator = UnitaryOperator::new(*sampled.last())?;
    let final_state = propagator.apply(&initial);
    let gate_infidelity = gate_branch(&s).map(|b| 1.0 - gate_fidelity(&propagator, &target_gate(b)));
    let (transport, entangled) = if s.variant == ScheduleVariant::RabiControlled {
        let ent = entangled_phases(&s)
            .and_then(|(a, b)| Ok((entangled_fidelity_with_propagator(&s, &propagator, a, b)?, a, b)))
            .ok();
        (transport_infidelities(&s, &propagator).ok(), ent)
    } else {
        (None, None)
    };
    let grid: Vec<f64> = (0..=1000).map(|k| s.t_max * k as f64 / 1000.0).collect();
    let margin = track(&s, &grid).and_then(|p| adiabaticity_margin(&p)).ok();
    Ok(ScenarioReport {
        schedule: s,
        initial,
        unitarity_defect: propagator.defect(),
        identity_distance: propagator.matrix().max_diff(&Mat4::identity()),
        propagator,
        final_state,
        sampled,
        phases,
        gate_infidelity,
        transport_infidelities: transport,
        entangled,
        adiabaticity_margin: margin,
    })
}

impl ScenarioReport {
    /// Populations, amplitude arguments and Fourier populations of U(t)ψ(0).
    pub fn table(&self) -> Table {
        let mut cols = vec!["t_ms".to_string()];
        for prefix in ["p_", "arg_"] {
            cols.extend(BASIS_LABELS.iter().map(|l| format!("{prefix}{l}")));
        }
        cols.extend((0..4).map(|p| format!("f_psi{p}")));
        let names: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut t = Table::new(&names);
        let fourier: Vec<StateVector> = (0..4).map(|p| fourier_state(p).expect("index < 4")).collect();
        for (time, u) in self.sampled.times.iter().zip(&self.sampled.unitaries) {
            let v = u.apply(&self.initial);
            let mut row = vec![*time];
            row.extend(v.0.iter().map(|a| a.norm_sqr()));
            row.extend(v.0.iter().map(|a| a.arg()));
            row.extend(fourier.iter().map(|f| f.overlap_sqr(&v)));
            t.push(row);
        }
        t
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let v = &self.final_state;
        let _ = writeln!(s, "t_max_ms = {}", self.schedule.t_max);
        let _ = writeln!(s, "steps = {}", self.sampled.steps);
        let _ = writeln!(s, "last_change = {:.3e}", self.sampled.last_change);
        let _ = writeln!(s, "unitarity_defect = {:.3e}", self.unitarity_defect);
        let _ = writeln!(s, "identity_distance = {:.3e}", self.identity_distance);
        let pops: Vec<String> = v.0.iter().map(|a| format!("{:.9}", a.norm_sqr())).collect();
        let _ = writeln!(s, "final_populations = [{}]  # dd, du, ud, uu", pops.join(", "));
        let args: Vec<String> = v.0.iter().map(|a| format!("{:.6}", a.arg())).collect();
        let _ = writeln!(s, "final_arguments_rad = [{}]", args.join(", "));
        let f: Vec<String> =
            (0..4).map(|p| format!("{:.9}", fourier_state(p).expect("index < 4").overlap_sqr(v))).collect();
        let _ = writeln!(s, "fourier_populations = [{}]  # psi0..psi3", f.join(", "));
        if let Some(p) = self.phases {
            let _ = writeln!(s, "alpha2_over_pi = {:.9}", p.alpha / std::f64::consts::PI);
            let _ = writeln!(s, "beta2_over_pi = {:.9}", p.beta / std::f64::consts::PI);
        }
        if let Some(g) = self.gate_infidelity {
            let _ = writeln!(s, "gate_infidelity = {g:.6e}");
        }
        if let Some(t) = self.transport_infidelities {
            let _ = writeln!(
                s,
                "transport_infidelities = [{:.3e}, {:.3e}, {:.3e}, {:.3e}]  # chi+, chi-, nu+, nu-",
                t[0], t[1], t[2], t[3]
            );
        }
        if let Some((f, a, b)) = self.entangled {
            let _ = writeln!(s, "entangled_infidelity = {:.6e}", 1.0 - f);
            let _ = writeln!(s, "entangled_alpha_rad = {a:.9}");
            let _ = writeln!(s, "entangled_beta_rad = {b:.9}");
        }
        match self.adiabaticity_margin {
            Some(m) => {
                let _ = writeln!(s, "adiabaticity_margin = {m:.4}");
            }
            None => {
                let _ = writeln!(s, "adiabaticity_margin = n/a  # spectrum degenerate or not tracked");
            }
        }
        s
    }
}

/// Runs the scenario and writes `<stem>.csv` carrying the config echo.
pub fn run_and_write(cfg: &ScenarioConfig) -> CliResult<(ScenarioReport, PathBuf)> {
    let report = run_scenario(cfg)?;
    let mut table = report.table();
    table.comment(&cfg.to_toml());
    let path = table.write(&cfg.output.dir, &format!("{}.csv", cfg.output.stem))?;
    Ok((report, path))
}
