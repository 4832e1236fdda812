//! TOML scenario configuration. Frequencies are entered as frequency/2π in
//! kHz and converted on ingestion; φ is given in units of π.

use std::path::{Path, PathBuf};

use circulant_core::dynamics::{rotating_basis_state, RampSchedule, Sign, StepControl};
use circulant_core::hamiltonian::{fourier_state, DetuningPair};
use circulant_core::linalg::{StateVector, C64};
use circulant_core::units::{khz, pi_units};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, Overrides};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Case1,
    Case2,
    RabiControlled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub variant: Variant,
    pub j0_khz: f64,
    pub omega1_khz: f64,
    pub v0_khz: f64,
    pub delta1_khz: f64,
    pub delta2_khz: f64,
    pub rate_khz: f64,
    pub phi_pi: f64,
    /// Exponential detuning ramp rate in ms⁻¹; replaces the cos² ramp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_per_ms: Option<f64>,
}

impl Default for ScheduleConfig {
    /// All amplitudes zero: the propagator is the identity.
    fn default() -> Self {
        ScheduleConfig {
            variant: Variant::Case2,
            j0_khz: 0.0,
            omega1_khz: 0.0,
            v0_khz: 0.0,
            delta1_khz: 0.0,
            delta2_khz: 0.0,
            rate_khz: 1.0,
            phi_pi: 0.25,
            gamma_per_ms: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Computational,
    Rotating,
    Fourier,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// Basis index for `computational` (0 = ↓↓ … 3 = ↑↑, default 0) and
    /// `fourier` (required).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// "+" or "-" for each spin of a `rotating` state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signs: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes_re: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes_im: Option<[f64; 4]>,
    /// Multiply the state by e^{−iα₂}.
    pub premultiply_alpha2: bool,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            kind: InitialKind::Computational,
            index: None,
            signs: None,
            amplitudes_re: None,
            amplitudes_im: None,
            premultiply_alpha2: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_ms: Option<f64>,
    pub max_steps: usize,
    /// Rows in the time-series CSV, excluding t = 0.
    pub samples: usize,
    pub counterdiabatic: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let c = StepControl::default();
        IntegratorConfig {
            tolerance: c.tolerance,
            dt_ms: None,
            max_steps: c.max_steps,
            samples: 200,
            counterdiabatic: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("."), stem: "scenario".into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    GateFidelity,
    StateFidelity,
    Phases,
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Name of a numeric field of `[schedule]`, e.g. `rate_khz`.
    pub parameter: String,
    pub values: Vec<f64>,
    pub observable: Observable,
    /// Fourier index used by `state_fidelity`.
    #[serde(default = "default_target")]
    pub target_fourier: usize,
}

fn default_target() -> usize {
    3
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub schedule: ScheduleConfig,
    pub initial: InitialConfig,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn field_err(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{field}: {reason}"))
}

fn check_finite(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field_err(field, format!("must be finite, got {v}")))
    }
}

fn check_nonneg(field: &str, v: f64) -> CliResult<()> {
    check_finite(field, v)?;
    if v < 0.0 {
        return Err(field_err(field, format!("must be non-negative, got {v}")));
    }
    Ok(())
}

fn parse_sign(field: &str, s: &str) -> CliResult<Sign> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(field_err(field, format!("expected \"+\" or \"-\", got {s:?}"))),
    }
}

impl ScheduleConfig {
    pub fn schedule(&self) -> CliResult<RampSchedule> {
        let s = self;
        check_nonneg("schedule.j0_khz", s.j0_khz)?;
        check_nonneg("schedule.omega1_khz", s.omega1_khz)?;
        check_finite("schedule.v0_khz", s.v0_khz)?;
        check_finite("schedule.delta1_khz", s.delta1_khz)?;
        check_finite("schedule.delta2_khz", s.delta2_khz)?;
        check_finite("schedule.phi_pi", s.phi_pi)?;
        if !(s.rate_khz > 0.0 && s.rate_khz.is_finite()) {
            return Err(field_err("schedule.rate_khz", format!("must be positive, got {}", s.rate_khz)));
        }
        let phi = pi_units(s.phi_pi);
        let detuning = DetuningPair::new(khz(s.delta1_khz), khz(s.delta2_khz))?;
        let schedule = match s.variant {
            Variant::Case1 => {
                if s.omega1_khz != 0.0 {
                    return Err(field_err("schedule.omega1_khz", "case1 has no single-qubit drive; set 0"));
                }
                if s.v0_khz != 0.0 {
                    return Err(field_err("schedule.v0_khz", "only used by rabi_controlled; set 0"));
                }
                RampSchedule::case1(khz(s.j0_khz), detuning, khz(s.rate_khz), phi)?
            }
            Variant::Case2 => {
                if s.v0_khz != 0.0 {
                    return Err(field_err("schedule.v0_khz", "only used by rabi_controlled; set 0"));
                }
                RampSchedule::case2(khz(s.j0_khz), khz(s.omega1_khz), detuning, khz(s.rate_khz), phi)?
            }
            Variant::RabiControlled => {
                if s.delta1_khz != 0.0 || s.delta2_khz != 0.0 {
                    return Err(field_err("schedule.delta1_khz", "rabi_controlled carries no detunings; set 0"));
                }
                if s.gamma_per_ms.is_some() {
                    return Err(field_err("schedule.gamma_per_ms", "rabi_controlled has no detuning ramp"));
                }
                if s.j0_khz + s.v0_khz <= 0.0 {
                    return Err(field_err("schedule.v0_khz", "J0 + V0 must be positive"));
                }
                RampSchedule::rabi_controlled(khz(s.j0_khz), khz(s.v0_khz), khz(s.omega1_khz), khz(s.rate_khz), phi)?
            }
        };
        match s.gamma_per_ms {
            Some(g) if !(g > 0.0 && g.is_finite()) => {
                Err(field_err("schedule.gamma_per_ms", format!("must be positive, got {g}")))
            }
            Some(g) => Ok(schedule.with_exponential_detuning(g)?),
            None => Ok(schedule),
        }
    }

    /// Mutable access to a numeric field by its config name.
    pub fn field_mut(&mut self, name: &str) -> CliResult<&mut f64> {
        Ok(match name {
            "j0_khz" => &mut self.j0_khz,
            "omega1_khz" => &mut self.omega1_khz,
            "v0_khz" => &mut self.v0_khz,
            "delta1_khz" => &mut self.delta1_khz,
            "delta2_khz" => &mut self.delta2_khz,
            "rate_khz" => &mut self.rate_khz,
            "phi_pi" => &mut self.phi_pi,
            _ => return Err(field_err("sweep.parameter", format!("unknown schedule field {name:?}"))),
        })
    }
}

impl InitialConfig {
    /// Initial state; `alpha2` is required when `premultiply_alpha2` is set.
    pub fn state(&self, schedule: &RampSchedule, alpha2: Option<f64>) -> CliResult<StateVector> {
        let index = |kind: &str| -> CliResult<usize> {
            let fallback = (kind == "computational").then_some(0);
            match self.index.or(fallback) {
                Some(i) if i < 4 => Ok(i),
                Some(i) => Err(field_err("initial.index", format!("must be 0..=3, got {i}"))),
                None => Err(field_err("initial.index", format!("required for kind = {kind}"))),
            }
        };
        let v = match self.kind {
            InitialKind::Computational => StateVector::basis(index("computational")?)?,
            InitialKind::Fourier => fourier_state(index("fourier")?)?,
            InitialKind::Rotating => {
                let signs = self
                    .signs
                    .as_ref()
                    .ok_or_else(|| field_err("initial.signs", "required for kind = rotating"))?;
                let q1 = parse_sign("initial.signs", &signs[0])?;
                let q2 = parse_sign("initial.signs", &signs[1])?;
                rotating_basis_state(q1, q2, schedule.phi)
            }
            InitialKind::Custom => {
                let re = self
                    .amplitudes_re
                    .ok_or_else(|| field_err("initial.amplitudes_re", "required for kind = custom"))?;
                let im = self.amplitudes_im.unwrap_or([0.0; 4]);
                if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
                    return Err(field_err("initial.amplitudes_re", "amplitudes must be finite"));
                }
                let v = StateVector(std::array::from_fn(|k| C64::new(re[k], im[k])));
                v.normalized().map_err(|_| field_err("initial.amplitudes_re", "state has zero norm"))?
            }
        };
        if self.premultiply_alpha2 {
            let a = alpha2.ok_or_else(|| {
                field_err("initial.premultiply_alpha2", "alpha2 exists only for case2 schedules at phi = pi/4")
            })?;
            return Ok(v.scale(C64::from_polar(1.0, -a)));
        }
        Ok(v)
    }
}

impl IntegratorConfig {
    pub fn control(&self) -> CliResult<StepControl> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(field_err("integrator.tolerance", format!("must be positive, got {}", self.tolerance)));
        }
        if let Some(dt) = self.dt_ms {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(field_err("integrator.dt_ms", format!("must be positive, got {dt}")));
            }
        }
        if self.max_steps < 2 {
            return Err(field_err("integrator.max_steps", "must be at least 2"));
        }
        Ok(StepControl { dt_initial: self.dt_ms, tolerance: self.tolerance, max_steps: self.max_steps })
    }
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        ScheduleConfig::default().field_mut(&self.parameter)?;
        if self.values.is_empty() {
            return Err(field_err("sweep.values", "grid is empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(field_err("sweep.values", "grid values must be finite"));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(field_err("sweep.values", "grid must be strictly monotone"));
        }
        if self.target_fourier > 3 {
            return Err(field_err("sweep.target_fourier", "must be 0..=3"));
        }
        Ok(())
    }
}

/// Everything a run needs, validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub schedule: RampSchedule,
    pub control: StepControl,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let cfg = Self::from_toml(&text)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.tolerance {
            self.integrator.tolerance = t;
        }
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
    }

    /// Validates every section and builds the core objects.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let schedule = self.schedule.schedule()?;
        let control = self.integrator.control()?;
        if self.integrator.samples == 0 {
            return Err(field_err("integrator.samples", "must be at least 1"));
        }
        if self.integrator.counterdiabatic && self.schedule.variant != Variant::RabiControlled {
            return Err(field_err("integrator.counterdiabatic", "needs variant = rabi_controlled"));
        }
        if self.initial.premultiply_alpha2 && !schedule.has_analytic_phases() {
            return Err(field_err("initial.premultiply_alpha2", "needs a case2 schedule at phi = pi/4"));
        }
        // shape checks that do not need α₂
        InitialConfig { premultiply_alpha2: false, ..self.initial.clone() }.state(&schedule, None)?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(Resolved { schedule, control })
    }
}
