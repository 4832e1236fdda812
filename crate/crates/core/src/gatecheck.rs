//! Target Fourier gates, the adiabatic transition map and fidelities.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::dynamics::{propagate, RampSchedule, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonian::fourier_state;
use crate::linalg::{Mat4, StateVector, UnitaryOperator, C64};
use crate::sta::{eigenbasis_at, transport_phases, H3Branch};

/// Sign of φ = ±π/4 selecting the gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateBranch {
    PlusQuarterPi,
    MinusQuarterPi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetGate {
    pub matrix: UnitaryOperator,
    pub branch: GateBranch,
}

/// One column of the transition map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    /// Computational basis index of the input.
    pub input: usize,
    /// Fourier index of the output.
    pub fourier_index: usize,
    /// Phase factor multiplying ψ_fourier_index.
    pub phase: C64,
    pub output: StateVector,
}

/// Images of |↓↓⟩, |↓↑⟩, |↑↓⟩, |↑↑⟩ under adiabatic following.
///
/// For +π/4: e^{iα₂}ψ₃, −ie^{iβ₂}ψ₁, e^{−iβ₂}ψ₂, e^{−iα₂}ψ₀.
/// For −π/4: e^{iα₂}ψ₁, ie^{iβ₂}ψ₃, e^{−iβ₂}ψ₂, e^{−iα₂}ψ₀.
pub fn transition_map(branch: GateBranch, alpha: f64, beta: f64) -> [Transition; 4] {
    let e = |x: f64| C64::from_polar(1.0, x);
    let i = C64::new(0.0, 1.0);
    let spec: [(usize, C64); 4] = match branch {
        GateBranch::PlusQuarterPi => [(3, e(alpha)), (1, -i * e(beta)), (2, e(-beta)), (0, e(-alpha))],
        GateBranch::MinusQuarterPi => [(1, e(alpha)), (3, i * e(beta)), (2, e(-beta)), (0, e(-alpha))],
    };
    let mut out = [0, 1, 2, 3].map(|k| Transition {
        input: k,
        fourier_index: spec[k].0,
        phase: spec[k].1,
        output: StateVector([C64::new(0.0, 0.0); 4]),
    });
    for t in &mut out {
        t.output = fourier_state(t.fourier_index).expect("index < 4").scale(t.phase);
    }
    out
}

/// The gate realized when both adiabatic phases are multiples of 2π.
pub fn target_gate(branch: GateBranch) -> TargetGate {
    let cols = transition_map(branch, 0.0, 0.0).map(|t| t.output);
    TargetGate {
        matrix: UnitaryOperator::new(Mat4::from_columns(&cols)).expect("Fourier columns are orthonormal"),
        branch,
    }
}

/// |tr(G†G′)|²/16.
pub fn gate_fidelity(actual: &UnitaryOperator, target: &TargetGate) -> f64 {
    let tr = (target.matrix.matrix().adjoint() * *actual.matrix()).trace();
    tr.norm_sqr() / 16.0
}

/// [`gate_fidelity`] on a raw matrix, rejecting it if it is not unitary.
pub fn gate_fidelity_matrix(actual: &Mat4, target: &TargetGate) -> Result<f64> {
    Ok(gate_fidelity(&UnitaryOperator::new(*actual)?, target))
}

/// (ψ₃ + ψ₂)/√2.
pub fn entangled_target() -> StateVector {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    fourier_state(3).expect("in range").add(&fourier_state(2).expect("in range")).scale(s)
}

/// ½|⟨ψ_target|e^{−iα}U|χ₋(0)⟩ + e^{−iβ}U|ν₋(0)⟩|² for a given propagator.
pub fn entangled_fidelity_with_propagator(
    schedule: &RampSchedule,
    u: &UnitaryOperator,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let start = eigenbasis_at(schedule, 0.0)?;
    let chi = u.apply(start.vector(H3Branch::ChiMinus)).scale(C64::from_polar(1.0, -alpha));
    let nu = u.apply(start.vector(H3Branch::NuMinus)).scale(C64::from_polar(1.0, -beta));
    let amp = entangled_target().inner(&chi.add(&nu));
    Ok(0.5 * amp.norm_sqr())
}

/// Entangled-state fidelity after propagating the schedule.
pub fn entangled_fidelity(schedule: &RampSchedule, alpha: f64, beta: f64, control: &StepControl) -> Result<f64> {
    let r = propagate(schedule, control)?;
    entangled_fidelity_with_propagator(schedule, &r.propagator, alpha, beta)
}

/// (α, β): transport phases of the χ₋ and ν₋ branches, so that adiabatic
/// following yields e^{iα}ψ₃ and e^{iβ}ψ₂.
pub fn entangled_phases(schedule: &RampSchedule) -> Result<(f64, f64)> {
    let g = transport_phases(schedule)?;
    Ok((g.get(H3Branch::ChiMinus), g.get(H3Branch::NuMinus)))
}

/// Fidelity with α, β from [`entangled_phases`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntangledReport {
    pub fidelity: f64,
    pub alpha: f64,
    pub beta: f64,
    pub steps: usize,
}

pub fn entangled_report(schedule: &RampSchedule, control: &StepControl) -> Result<EntangledReport> {
    let (alpha, beta) = entangled_phases(schedule)?;
    let r = propagate(schedule, control)?;
    let fidelity = entangled_fidelity_with_propagator(schedule, &r.propagator, alpha, beta)?;
    if !fidelity.is_finite() {
        return Err(Error::Instability("non-finite fidelity".into()));
    }
    Ok(EntangledReport { fidelity, alpha, beta, steps: r.steps })
}
