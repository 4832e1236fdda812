//! Ramp schedules, Schrödinger propagation and adiabatic phase integrals.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_detuning, build_general, DetuningPair, GeneralParams};
use crate::linalg::{expm_i, HermitianOperator, Mat4, StateVector, UnitaryOperator, C64};
use crate::quadrature;
use crate::spectral;

/// Which Hamiltonian family the schedule drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleVariant {
    /// Circulant coupling with Ω₁ ≡ 0, plus detunings.
    Case1,
    /// Circulant coupling with a ramped spin-1 drive, plus detunings.
    Case2,
    /// No detunings; Ω₂(t) = J₀ + V₀cos²(ωt) ramps down onto J(t_max).
    RabiControlled,
}

/// Time dependence of the detunings in the Case-1/2 variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetuningRamp {
    /// Δₖ cos²(ωt)
    CosSquared,
    /// Δₖ e^{−γt}, truncated at t_max = ln(10⁵)/γ; couplings still use
    /// sin²(ωt) with ω = π/(2 t_max).
    Exponential { gamma: f64 },
}

/// ln(10⁵): the exponential ramp is cut once Δ(t)/Δ(0) = 10⁻⁵.
const EXP_RAMP_DECADES: f64 = 11.512_925_464_970_229;

/// Time-parametrized Hamiltonian coefficients on [0, t_max].
///
/// Couplings ramp as J(t) = J₀sin²(ωt) and (Case 2) Ω₁(t) = Ω₁sin²(ωt),
/// detunings as Δₖcos²(ωt), with t_max = π/(2ω).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSchedule {
    pub variant: ScheduleVariant,
    /// J₀
    pub coupling: f64,
    /// Ω₁
    pub rabi1: f64,
    /// V₀ (rabi-controlled only)
    pub rabi2_excess: f64,
    /// Detuning amplitudes Δ₁, Δ₂ (Case 1/2 only)
    pub detuning: DetuningPair,
    /// ω
    pub rate: f64,
    /// φ
    pub phi: f64,
    pub t_max: f64,
    pub detuning_ramp: DetuningRamp,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(name, format!("must be finite, got {v}")));
    }
    Ok(())
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v < 0.0 {
        return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v <= 0.0 {
        return Err(Error::invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

impl RampSchedule {
    fn base(variant: ScheduleVariant, rate: f64, phi: f64) -> Result<Self> {
        positive("omega", rate)?;
        finite("phi", phi)?;
        Ok(RampSchedule {
            variant,
            coupling: 0.0,
            rabi1: 0.0,
            rabi2_excess: 0.0,
            detuning: DetuningPair::default(),
            rate,
            phi,
            t_max: FRAC_PI_2 / rate,
            detuning_ramp: DetuningRamp::CosSquared,
        })
    }

    pub fn case1(coupling: f64, detuning: DetuningPair, rate: f64, phi: f64) -> Result<Self> {
        nonneg("J0", coupling)?;
        finite("Delta1", detuning.delta1)?;
        finite("Delta2", detuning.delta2)?;
        Ok(RampSchedule { coupling, detuning, ..Self::base(ScheduleVariant::Case1, rate, phi)? })
    }

    pub fn case2(coupling: f64, rabi1: f64, detuning: DetuningPair, rate: f64, phi: f64) -> Result<Self> {
        nonneg("Omega1", rabi1)?;
        Ok(RampSchedule { rabi1, variant: ScheduleVariant::Case2, ..Self::case1(coupling, detuning, rate, phi)? })
    }

    pub fn rabi_controlled(coupling: f64, rabi2_excess: f64, rabi1: f64, rate: f64, phi: f64) -> Result<Self> {
        nonneg("J0", coupling)?;
        finite("V0", rabi2_excess)?;
        finite("Omega1", rabi1)?;
        Ok(RampSchedule {
            coupling,
            rabi2_excess,
            rabi1,
            ..Self::base(ScheduleVariant::RabiControlled, rate, phi)?
        })
    }

    /// Switches the detunings to an exponential ramp with rate γ; t_max and
    /// ω are re-derived from γ.
    pub fn with_exponential_detuning(mut self, gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        if self.variant == ScheduleVariant::RabiControlled {
            return Err(Error::invalid("detuning_ramp", "rabi-controlled schedules carry no detunings"));
        }
        self.t_max = EXP_RAMP_DECADES / gamma;
        self.rate = FRAC_PI_2 / self.t_max;
        self.detuning_ramp = DetuningRamp::Exponential { gamma };
        Ok(self)
    }

    /// Same schedule with new detuning amplitudes.
    pub fn with_detuning(mut self, detuning: DetuningPair) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn coefficients_at(&self, t: f64) -> Result<Coefficients> {
        let slack = 1e-12 * self.t_max;
        if !(t >= -slack && t <= self.t_max + slack) {
            return Err(Error::invalid("t", format!("{t} outside [0, {}]", self.t_max)));
        }
        Ok(self.coefficients_unchecked(t.clamp(0.0, self.t_max)))
    }

    pub(crate) fn coefficients_unchecked(&self, t: f64) -> Coefficients {
        let s = (self.rate * t).sin().powi(2);
        let c = (self.rate * t).cos().powi(2);
        let phi = self.phi;
        let detuning_factor = match self.detuning_ramp {
            DetuningRamp::CosSquared => c,
            DetuningRamp::Exponential { gamma } => (-gamma * t).exp(),
        };
        let fold = |p: Result<GeneralParams>| p.expect("schedule coefficients are validated finite");
        match self.variant {
            ScheduleVariant::Case1 => Coefficients {
                params: fold(GeneralParams::case1(self.coupling * s, phi)),
                detuning: self.scaled_detuning(detuning_factor),
            },
            ScheduleVariant::Case2 => Coefficients {
                params: fold(GeneralParams::case2(self.coupling * s, self.rabi1 * s, phi)),
                detuning: self.scaled_detuning(detuning_factor),
            },
            ScheduleVariant::RabiControlled => Coefficients {
                params: fold(GeneralParams::rabi_controlled(
                    self.coupling * s,
                    self.rabi1,
                    self.coupling + self.rabi2_excess * c,
                    phi,
                )),
                detuning: DetuningPair::default(),
            },
        }
    }

    fn scaled_detuning(&self, f: f64) -> DetuningPair {
        DetuningPair { delta1: self.detuning.delta1 * f, delta2: self.detuning.delta2 * f }
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<HermitianOperator> {
        Ok(self.coefficients_at(t)?.hamiltonian())
    }

    pub(crate) fn hamiltonian_unchecked(&self, t: f64) -> HermitianOperator {
        self.coefficients_unchecked(t).hamiltonian()
    }

    /// Case 2 at φ = π/4, where the closed-form eigenfrequencies apply.
    pub fn has_analytic_phases(&self) -> bool {
        self.variant == ScheduleVariant::Case2 && (self.phi - FRAC_PI_4).abs() < 1e-12
    }
}

/// Instantaneous Hamiltonian coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub params: GeneralParams,
    pub detuning: DetuningPair,
}

impl Coefficients {
    pub fn hamiltonian(&self) -> HermitianOperator {
        build_general(&self.params) + build_detuning(&self.detuning)
    }
}

/// Step-halving control for [`propagate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// Initial step; `None` means t_max/2000.
    pub dt_initial: Option<f64>,
    /// Max-norm change between successive halvings at which to stop.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { dt_initial: None, tolerance: 1e-8, max_steps: 1 << 22 }
    }
}

impl StepControl {
    pub fn with_tolerance(tolerance: f64) -> Self {
        StepControl { tolerance, ..Default::default() }
    }
}

/// α₂ = ∫λ₊dt and β₂ = ∫μ₊dt in rad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticPhases {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionResult {
    pub propagator: UnitaryOperator,
    pub final_state: Option<StateVector>,
    /// Present for Case-2 schedules at φ = π/4 with a nondegenerate path.
    pub adiabatic_phases: Option<AdiabaticPhases>,
    pub steps: usize,
    pub unitarity_defect: f64,
    /// Max-norm change at the last halving.
    pub last_change: f64,
}

/// Product of midpoint exponentials over `steps` equal slices of [0, t_max].
pub fn propagate_fixed<F>(hamiltonian: F, t_max: f64, steps: usize) -> Result<UnitaryOperator>
where
    F: Fn(f64) -> HermitianOperator,
{
    propagate_observed(hamiltonian, t_max, steps, |_, _, _| {})
}

/// As [`propagate_fixed`], calling `observe(k, t_k, U(t_k, 0))` after every
/// step k = 1..=steps (and once with k = 0 at t = 0).
pub fn propagate_observed<F, O>(hamiltonian: F, t_max: f64, steps: usize, mut observe: O) -> Result<UnitaryOperator>
where
    F: Fn(f64) -> HermitianOperator,
    O: FnMut(usize, f64, &Mat4),
{
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    let dt = t_max / steps as f64;
    let mut u = Mat4::identity();
    observe(0, 0.0, &u);
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * dt;
        let step = expm_i(&hamiltonian(mid), dt)?;
        u = *step.matrix() * u;
        observe(k + 1, (k + 1) as f64 * dt, &u);
    }
    Ok(UnitaryOperator::unchecked(u))
}

/// Adaptive step halving on a generic Hamiltonian; returns (U, steps, last change).
pub fn propagate_adaptive<F>(hamiltonian: F, t_max: f64, control: &StepControl) -> Result<(UnitaryOperator, usize, f64)>
where
    F: Fn(f64) -> HermitianOperator,
{
    positive("t_max", t_max)?;
    positive("tolerance", control.tolerance)?;
    let dt0 = control.dt_initial.unwrap_or(t_max / 2000.0);
    positive("dt_initial", dt0)?;
    let mut steps = ((t_max / dt0).ceil() as usize).max(1);
    let mut prev = propagate_fixed(&hamiltonian, t_max, steps)?;
    loop {
        steps *= 2;
        if steps > control.max_steps {
            return Err(Error::NonConvergence {
                what: format!("propagation within {} steps", control.max_steps),
                residual: f64::NAN,
            });
        }
        let next = propagate_fixed(&hamiltonian, t_max, steps)?;
        let change = next.matrix().max_diff(prev.matrix());
        if change < control.tolerance {
            return Ok((next, steps, change));
        }
        if steps * 2 > control.max_steps {
            return Err(Error::NonConvergence {
                what: format!("propagation within {} steps", control.max_steps),
                residual: change,
            });
        }
        prev = next;
    }
}

/// U(t_max, 0) for the schedule.
pub fn propagate(schedule: &RampSchedule, control: &StepControl) -> Result<EvolutionResult> {
    let (u, steps, change) = propagate_adaptive(|t| schedule.hamiltonian_unchecked(t), schedule.t_max, control)?;
    let adiabatic_phases = if schedule.has_analytic_phases() { adiabatic_phases(schedule).ok() } else { None };
    Ok(EvolutionResult {
        unitarity_defect: u.defect(),
        propagator: u,
        final_state: None,
        adiabatic_phases,
        steps,
        last_change: change,
    })
}

/// [`propagate`] plus the image of `initial`.
pub fn propagate_state(schedule: &RampSchedule, control: &StepControl, initial: &StateVector) -> Result<EvolutionResult> {
    let mut r = propagate(schedule, control)?;
    r.final_state = Some(r.propagator.apply(initial));
    Ok(r)
}

/// Default absolute tolerance of [`adiabatic_phases`] (rad).
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// α₂ and β₂ for a Case-2 schedule at φ = π/4, by quadrature of the
/// closed-form λ₊ and μ₊ branches.
pub fn adiabatic_phases(schedule: &RampSchedule) -> Result<AdiabaticPhases> {
    adiabatic_phases_with_tolerance(schedule, PHASE_TOLERANCE)
}

pub fn adiabatic_phases_with_tolerance(schedule: &RampSchedule, tol: f64) -> Result<AdiabaticPhases> {
    if !schedule.has_analytic_phases() {
        return Err(Error::invalid(
            "schedule",
            "adiabatic phases need a Case-2 schedule at phi = pi/4",
        ));
    }
    let d = schedule.detuning;
    let scale0 = d.delta1.abs() + d.delta2.abs();
    if scale0 > 0.0 && (d.delta1 - d.delta2).abs() <= 1e-9 * scale0 {
        return Err(Error::degenerate("lambda/mu branches collide (Delta1 = Delta2)", Some(0.0)));
    }
    let [alpha, beta] = quadrature::integrate(
        |t| {
            let c = schedule.coefficients_unchecked(t);
            let v = spectral::analytic_case2(c.params.coupling, c.params.rabi1, c.detuning.delta1, c.detuning.delta2)?;
            if v.lambda_plus > 0.0 && v.mu_plus <= 1e-9 * v.lambda_plus {
                return Err(Error::degenerate("mu+ and mu- collide", Some(t)));
            }
            Ok([v.lambda_plus, v.mu_plus])
        },
        0.0,
        schedule.t_max,
        tol,
    )?;
    Ok(AdiabaticPhases { alpha, beta })
}

/// Sign label ± of a single-spin state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// |q₁⟩⊗|q₂⟩ with |±₁⟩ = (|↓⟩ ± |↑⟩)/√2 and |±₂⟩ = (|↓⟩ ± e^{iφ}|↑⟩)/√2.
pub fn rotating_basis_state(q1: Sign, q2: Sign, phi: f64) -> StateVector {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let a = [h, h * q1.value()];
    let b = [h, C64::from_polar(FRAC_1_SQRT_2 * q2.value(), phi)];
    StateVector::product(a, b)
}

/// Columns are U applied to each computational basis state; convenience for
/// linearity checks.
pub fn apply_to_basis(u: &UnitaryOperator) -> [StateVector; 4] {
    [0, 1, 2, 3].map(|k| u.matrix().column(k))
}
