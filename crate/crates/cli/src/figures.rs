//! Built-in figure reproductions. Each figure carries its parameters as
//! embedded scenario configs and emits one or more CSV tables.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use circulant_core::gatecheck::{entangled_report, gate_fidelity_matrix, target_gate, GateBranch};
use circulant_core::spectral::{track, Branch};
use circulant_core::sta::{cd_rate, eigenbasis_at, H3Branch};
use circulant_core::units::to_khz;
use rayon::prelude::*;

use crate::config::{InitialConfig, InitialKind, ScenarioConfig, ScheduleConfig, Variant};
use crate::csv::Table;
use crate::scenario::{hamiltonian_fn, run_scenario, sampled_propagation};
use crate::{CliError, CliResult, Overrides};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    F1a,
    F1b,
    F2a,
    F2b,
    F3,
    F4a,
    F4b,
    F5a,
    F5b,
    F6,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::F1a,
        FigureId::F1b,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F3,
        FigureId::F4a,
        FigureId::F4b,
        FigureId::F5a,
        FigureId::F5b,
        FigureId::F6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::F1a => "1a",
            FigureId::F1b => "1b",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3 => "3",
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
            FigureId::F6 => "6",
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::config(format!("figure: unknown id {s:?}; expected one of 1a 1b 2a 2b 3 4a 4b 5a 5b 6")))
    }
}

/// Rates ω/2π (kHz) of the fidelity-vs-ω figure.
pub const FIG5A_RATES_KHZ: [f64; 15] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6];
/// Couplings J₀/2π (kHz) of the fidelity-vs-ω figure.
pub const FIG5A_COUPLINGS_KHZ: [f64; 2] = [2.0, 1.8];
/// Couplings J₀/2π (kHz) of the fidelity-vs-J₀ figure at ω/2π = 0.8 kHz.
pub const FIG5B_COUPLINGS_KHZ: [f64; 9] = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0];
/// (ω/2π, J₀/2π) in kHz of the counterdriving-field curves.
pub const FIG6_CURVES_KHZ: [(f64, f64); 3] = [(2.5, 2.0), (1.8, 1.5), (1.2, 1.0)];

fn case2(j0: f64, omega1: f64, d1: f64, d2: f64, rate: f64) -> ScheduleConfig {
    ScheduleConfig {
        variant: Variant::Case2,
        j0_khz: j0,
        omega1_khz: omega1,
        delta1_khz: d1,
        delta2_khz: d2,
        rate_khz: rate,
        phi_pi: 0.25,
        ..ScheduleConfig::default()
    }
}

fn rabi(j0: f64, v0: f64, omega1: f64, rate: f64) -> ScheduleConfig {
    ScheduleConfig {
        variant: Variant::RabiControlled,
        j0_khz: j0,
        v0_khz: v0,
        omega1_khz: omega1,
        rate_khz: rate,
        phi_pi: 0.25,
        ..ScheduleConfig::default()
    }
}

fn rotating_minus() -> InitialConfig {
    InitialConfig {
        kind: InitialKind::Rotating,
        index: None,
        signs: Some(["-".into(), "-".into()]),
        ..InitialConfig::default()
    }
}

fn scenario(schedule: ScheduleConfig, initial: InitialConfig, stem: &str) -> ScenarioConfig {
    let mut c = ScenarioConfig { schedule, initial, ..ScenarioConfig::default() };
    c.output.stem = stem.into();
    c.integrator.samples = 400;
    c
}

/// Embedded configs of a figure; sweep figures list their base schedules.
pub fn figure_configs(id: FigureId) -> Vec<ScenarioConfig> {
    let stem = format!("fig{}", id.name());
    let one = |s: ScheduleConfig, i: InitialConfig| vec![scenario(s, i, &stem)];
    match id {
        FigureId::F1a => one(
            ScheduleConfig {
                variant: Variant::Case1,
                j0_khz: 2.1,
                delta1_khz: 120.0,
                delta2_khz: 30.0,
                rate_khz: 0.25,
                phi_pi: 0.125,
                ..ScheduleConfig::default()
            },
            InitialConfig::default(),
        ),
        FigureId::F1b => one(case2(2.1, 100.0, 120.0, 30.0, 0.25), InitialConfig::default()),
        FigureId::F2a => one(case2(2.0, 50.0, 30.0, 10.0, 0.2), InitialConfig::default()),
        FigureId::F2b => one(rabi(2.0, 3.8, 30.0, 0.6), rotating_minus()),
        FigureId::F3 => one(
            case2(2.0, 50.0, 30.0, 10.0, 0.2),
            InitialConfig { premultiply_alpha2: true, ..InitialConfig::default() },
        ),
        FigureId::F4a => one(case2(2.0, 40.0, 59.96, 27.76, 0.18), InitialConfig::default()),
        FigureId::F4b => one(rabi(2.0, 2.02, 146.3, 0.55), rotating_minus()),
        FigureId::F5a => FIG5A_COUPLINGS_KHZ
            .iter()
            .map(|&j| scenario(rabi(j, 2.0, 30.0, 0.8), rotating_minus(), &stem))
            .collect(),
        FigureId::F5b => one(rabi(2.0, 2.0, 30.0, 0.8), rotating_minus()),
        FigureId::F6 => FIG6_CURVES_KHZ
            .iter()
            .map(|&(w, j)| scenario(rabi(j, 0.5, 80.0, w), rotating_minus(), &stem))
            .collect(),
    }
}

fn echo(t: &mut Table, cfgs: &[ScenarioConfig]) {
    for (k, c) in cfgs.iter().enumerate() {
        if cfgs.len() > 1 {
            t.comment(&format!("config {k}"));
        }
        t.comment(&c.to_toml());
    }
}

fn spectrum_table(cfg: &ScenarioConfig) -> CliResult<Table> {
    let r = cfg.resolve()?;
    let n = cfg.integrator.samples;
    let grid: Vec<f64> = (0..=n).map(|k| r.schedule.t_max * k as f64 / n as f64).collect();
    let path = track(&r.schedule, &grid)?;
    let mut t = Table::new(&["t_ms", "lambda_plus_khz", "lambda_minus_khz", "mu_plus_khz", "mu_minus_khz"]);
    for (k, time) in path.times.iter().enumerate() {
        let v = &path.spectra[k].values;
        let mut row = vec![*time];
        row.extend(Branch::ALL.iter().map(|&b| to_khz(v.get(b))));
        t.push(row);
    }
    Ok(t)
}

fn gate_infidelity_table(cfg: &ScenarioConfig) -> CliResult<Table> {
    let r = cfg.resolve()?;
    let s = r.schedule;
    let sampled = sampled_propagation(hamiltonian_fn(&s, false), s.t_max, &r.control, cfg.integrator.samples)?;
    let g = target_gate(GateBranch::PlusQuarterPi);
    let mut t = Table::new(&["t_ms", "infidelity"]);
    for (time, u) in sampled.times.iter().zip(&sampled.unitaries) {
        t.push(vec![*time, 1.0 - gate_fidelity_matrix(u, &g)?]);
    }
    Ok(t)
}

/// Transfer fidelity |⟨v_b(t)|U(t)|v_b(0)⟩|² of each instantaneous branch.
fn transport_table(cfg: &ScenarioConfig) -> CliResult<Table> {
    let r = cfg.resolve()?;
    let s = r.schedule;
    let sampled = sampled_propagation(hamiltonian_fn(&s, false), s.t_max, &r.control, cfg.integrator.samples)?;
    let start = eigenbasis_at(&s, 0.0)?;
    let names: Vec<String> = H3Branch::ALL.iter().map(|b| format!("fid_{}", b.name())).collect();
    let mut cols = vec!["t_ms"];
    cols.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&cols);
    for (time, u) in sampled.times.iter().zip(&sampled.unitaries) {
        let now = eigenbasis_at(&s, time.min(s.t_max))?;
        let mut row = vec![*time];
        row.extend(H3Branch::ALL.iter().map(|&b| now.vector(b).overlap_sqr(&u.apply(start.vector(b)))));
        t.push(row);
    }
    Ok(t)
}

fn entangled_fidelity_at(base: &ScenarioConfig, j0: f64, rate: f64) -> CliResult<f64> {
    let mut c = base.clone();
    c.schedule.j0_khz = j0;
    c.schedule.rate_khz = rate;
    let r = c.resolve()?;
    Ok(entangled_report(&r.schedule, &r.control)?.fidelity)
}

fn fig5a_table(cfgs: &[ScenarioConfig]) -> CliResult<Table> {
    let points: Vec<(usize, f64)> =
        FIG5A_RATES_KHZ.iter().flat_map(|&w| (0..cfgs.len()).map(move |k| (k, w))).collect();
    let values: Vec<CliResult<f64>> = points
        .par_iter()
        .map(|&(k, w)| entangled_fidelity_at(&cfgs[k], cfgs[k].schedule.j0_khz, w))
        .collect();
    let names: Vec<String> = cfgs.iter().map(|c| format!("fidelity_j0_{:.1}", c.schedule.j0_khz)).collect();
    let mut cols = vec!["omega_khz"];
    cols.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&cols);
    let mut it = values.into_iter();
    for &w in &FIG5A_RATES_KHZ {
        let mut row = vec![w];
        for _ in cfgs {
            row.push(it.next().expect("one value per point")?);
        }
        t.push(row);
    }
    Ok(t)
}

fn fig5b_table(cfg: &ScenarioConfig) -> CliResult<Table> {
    let values: Vec<CliResult<f64>> = FIG5B_COUPLINGS_KHZ
        .par_iter()
        .map(|&j| entangled_fidelity_at(cfg, j, cfg.schedule.rate_khz))
        .collect();
    let mut t = Table::new(&["j0_khz", "fidelity"]);
    for (&j, f) in FIG5B_COUPLINGS_KHZ.iter().zip(values) {
        t.push(vec![j, f?]);
    }
    Ok(t)
}

fn fig6_table(cfgs: &[ScenarioConfig]) -> CliResult<Table> {
    let mut t = Table::new(&["curve", "omega_khz", "j0_khz", "t_ms", "dxi_dt_khz"]);
    for (k, c) in cfgs.iter().enumerate() {
        let s = c.resolve()?.schedule;
        let n = c.integrator.samples;
        for i in 0..=n {
            let time = s.t_max * i as f64 / n as f64;
            let rate = cd_rate(time, s.coupling, s.rabi2_excess, s.rate);
            t.push(vec![k as f64, c.schedule.rate_khz, c.schedule.j0_khz, time, to_khz(rate)]);
        }
    }
    Ok(t)
}

/// Tables of a figure, keyed by file name, with config echoes attached.
pub fn figure_tables(id: FigureId, o: &Overrides) -> CliResult<Vec<(String, Table)>> {
    let mut cfgs = figure_configs(id);
    for c in &mut cfgs {
        c.apply(o);
    }
    let first = &cfgs[0];
    let mut table = match id {
        FigureId::F1a | FigureId::F1b => spectrum_table(first)?,
        FigureId::F2a | FigureId::F2b | FigureId::F3 => run_scenario(first)?.table(),
        FigureId::F4a => gate_infidelity_table(first)?,
        FigureId::F4b => transport_table(first)?,
        FigureId::F5a => fig5a_table(&cfgs)?,
        FigureId::F5b => fig5b_table(first)?,
        FigureId::F6 => fig6_table(&cfgs)?,
    };
    match id {
        FigureId::F5a => {
            let rates: Vec<String> = FIG5A_RATES_KHZ.iter().map(|w| w.to_string()).collect();
            table.comment(&format!("rate_khz swept over [{}]", rates.join(", ")));
        }
        FigureId::F5b => {
            let js: Vec<String> = FIG5B_COUPLINGS_KHZ.iter().map(|j| j.to_string()).collect();
            table.comment(&format!("j0_khz swept over [{}]", js.join(", ")));
        }
        _ => {}
    }
    echo(&mut table, &cfgs);
    Ok(vec![(format!("fig{}.csv", id.name()), table)])
}

pub fn run_figure(id: FigureId, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let dir = o.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_tables(&dir, figure_tables(id, o)?)
}

fn write_tables(dir: &Path, tables: Vec<(String, Table)>) -> CliResult<Vec<PathBuf>> {
    tables.into_iter().map(|(name, t)| t.write(dir, &name)).collect()
}
