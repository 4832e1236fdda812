//! Exact eigenbasis of the Rabi-controlled Hamiltonian and counterdiabatic
//! driving.
//!
//! The Hamiltonian commutes with σ₁ˣ⊗I. In the sector σ₁ˣ = q it reduces to
//! qΩ₁ + [[0, z_q], [z_q*, 0]] on spin 2 with z_q = qJe^{iφ} + Ω₂e^{−iφ}, whose
//! eigenvectors are (|↓⟩ + s e^{−iθ_q}|↑⟩)/√2 with θ_q = arg z_q and energy
//! qΩ₁ + s|z_q|. The χ branches live in q = −1, the ν branches in q = +1.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::dynamics::{propagate_adaptive, EvolutionResult, RampSchedule, ScheduleVariant, Sign, StepControl};
use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Mat4, StateVector, UnitaryOperator, C64, ZERO};
use crate::quadrature;

/// Labels of the four eigenpairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum H3Branch {
    ChiPlus = 0,
    ChiMinus = 1,
    NuPlus = 2,
    NuMinus = 3,
}

impl H3Branch {
    pub const ALL: [H3Branch; 4] = [H3Branch::ChiPlus, H3Branch::ChiMinus, H3Branch::NuPlus, H3Branch::NuMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    /// σ₁ˣ eigenvalue q of the sector.
    pub fn sector(self) -> Sign {
        match self {
            H3Branch::ChiPlus | H3Branch::ChiMinus => Sign::Minus,
            H3Branch::NuPlus | H3Branch::NuMinus => Sign::Plus,
        }
    }

    /// s: upper (+) or lower (−) level within the sector.
    pub fn level(self) -> Sign {
        match self {
            H3Branch::ChiPlus | H3Branch::NuPlus => Sign::Plus,
            H3Branch::ChiMinus | H3Branch::NuMinus => Sign::Minus,
        }
    }

    pub fn from_signs(sector: Sign, level: Sign) -> Self {
        match (sector, level) {
            (Sign::Minus, Sign::Plus) => H3Branch::ChiPlus,
            (Sign::Minus, Sign::Minus) => H3Branch::ChiMinus,
            (Sign::Plus, Sign::Plus) => H3Branch::NuPlus,
            (Sign::Plus, Sign::Minus) => H3Branch::NuMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            H3Branch::ChiPlus => "chi+",
            H3Branch::ChiMinus => "chi-",
            H3Branch::NuPlus => "nu+",
            H3Branch::NuMinus => "nu-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H3Eigenbasis {
    /// Indexed by [`H3Branch::index`].
    pub values: [f64; 4],
    /// Indexed by [`H3Branch::index`], in the closed-form gauge above.
    pub vectors: [StateVector; 4],
    /// ξ = atan2(Ω₂, J).
    pub xi: f64,
    /// θ_q = arg z_q for q = −1, +1.
    pub block_angles: [f64; 2],
}

impl H3Eigenbasis {
    pub fn value(&self, b: H3Branch) -> f64 {
        self.values[b.index()]
    }

    pub fn vector(&self, b: H3Branch) -> &StateVector {
        &self.vectors[b.index()]
    }
}

fn block_offdiag(q: f64, coupling: f64, rabi2: f64, phi: f64) -> C64 {
    C64::from_polar(q * coupling, phi) + C64::from_polar(rabi2, -phi)
}

fn branch_vector(q: f64, s: f64, theta: f64) -> StateVector {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::product([h, h * q], [h, C64::from_polar(s * FRAC_1_SQRT_2, -theta)])
}

/// Closed-form eigenpairs of the Rabi-controlled Hamiltonian.
pub fn h3_eigenbasis(coupling: f64, rabi1: f64, rabi2: f64, phi: f64) -> Result<H3Eigenbasis> {
    for (name, v) in [("J", coupling), ("Omega1", rabi1), ("Omega2", rabi2), ("phi", phi)] {
        if !v.is_finite() {
            return Err(Error::invalid(name, format!("must be finite, got {v}")));
        }
    }
    if coupling == 0.0 && rabi2 == 0.0 {
        return Err(Error::invalid("J, Omega2", "not both zero"));
    }
    let scale = coupling.abs() + rabi2.abs();
    let mut values = [0.0; 4];
    let mut vectors = [StateVector([ZERO; 4]); 4];
    let mut block_angles = [0.0; 2];
    for (k, q) in [Sign::Minus, Sign::Plus].into_iter().enumerate() {
        let z = block_offdiag(q.value(), coupling, rabi2, phi);
        if z.norm() <= 1e-12 * scale {
            return Err(Error::degenerate(
                format!("sector q = {:+} has coinciding levels", q.value()),
                None,
            ));
        }
        let theta = z.arg();
        block_angles[k] = theta;
        for s in Sign::BOTH {
            let b = H3Branch::from_signs(q, s);
            values[b.index()] = q.value() * rabi1 + s.value() * z.norm();
            vectors[b.index()] = branch_vector(q.value(), s.value(), theta);
        }
    }
    Ok(H3Eigenbasis { values, vectors, xi: rabi2.atan2(coupling), block_angles })
}

/// Counterdriving rate ωJ₀(J₀+V₀)sin(2ωt) / (J₀²sin⁴(ωt) + [V₀sin²(ωt) − (J₀+V₀)]²).
///
/// Equals d/dt arctan(J/Ω₂) along the ramp J = J₀sin²(ωt), Ω₂ = J₀ + V₀cos²(ωt).
pub fn cd_rate(t: f64, coupling: f64, rabi2_excess: f64, rate: f64) -> f64 {
    let s2 = (rate * t).sin().powi(2);
    let num = rate * coupling * (coupling + rabi2_excess) * (2.0 * rate * t).sin();
    let den = coupling * coupling * s2 * s2 + (rabi2_excess * s2 - (coupling + rabi2_excess)).powi(2);
    num / den
}

/// −r(|↓₁⟩⟨↑₁| + |↑₁⟩⟨↓₁|)⊗|↓₂⟩⟨↓₂|.
pub fn build_hcd(rate: f64) -> HermitianOperator {
    let mut m = Mat4::zeros();
    m[(0, 2)] = C64::new(-rate, 0.0);
    m[(2, 0)] = C64::new(-rate, 0.0);
    HermitianOperator::new(m).expect("real symmetric")
}

fn require_rabi_controlled(schedule: &RampSchedule) -> Result<()> {
    if schedule.variant != ScheduleVariant::RabiControlled {
        return Err(Error::invalid("schedule", "needs the rabi-controlled variant"));
    }
    Ok(())
}

/// Schedule Hamiltonian plus `gain`·H_CD(t); gain = 1 is the full field.
pub fn hamiltonian_with_cd(schedule: &RampSchedule, t: f64, gain: f64) -> Result<HermitianOperator> {
    let rate = gain * cd_rate(t, schedule.coupling, schedule.rabi2_excess, schedule.rate);
    Ok(schedule.hamiltonian_at(t)? + build_hcd(rate))
}

/// Propagates under H(t) + H_CD(t).
pub fn propagate_with_cd(schedule: &RampSchedule, control: &StepControl) -> Result<EvolutionResult> {
    propagate_with_cd_gain(schedule, control, 1.0)
}

/// As [`propagate_with_cd`] with the counterdriving field scaled by `gain`.
pub fn propagate_with_cd_gain(schedule: &RampSchedule, control: &StepControl, gain: f64) -> Result<EvolutionResult> {
    require_rabi_controlled(schedule)?;
    if !gain.is_finite() {
        return Err(Error::invalid("gain", "must be finite"));
    }
    let (u, steps, change) = propagate_adaptive(
        |t| {
            let t = t.clamp(0.0, schedule.t_max);
            let rate = gain * cd_rate(t, schedule.coupling, schedule.rabi2_excess, schedule.rate);
            schedule.hamiltonian_unchecked(t) + build_hcd(rate)
        },
        schedule.t_max,
        control,
    )?;
    Ok(EvolutionResult {
        unitarity_defect: u.defect(),
        propagator: u,
        final_state: None,
        adiabatic_phases: None,
        steps,
        last_change: change,
    })
}

/// Closed-form eigenbasis at time t along a rabi-controlled schedule.
pub fn eigenbasis_at(schedule: &RampSchedule, t: f64) -> Result<H3Eigenbasis> {
    require_rabi_controlled(schedule)?;
    schedule.coefficients_at(t)?;
    let s2 = (schedule.rate * t).sin().powi(2);
    h3_eigenbasis(
        schedule.coupling * s2,
        schedule.rabi1,
        schedule.coupling + schedule.rabi2_excess * (1.0 - s2),
        schedule.phi,
    )
}

/// Adiabatic transport phase of each branch: the state starting in v_b(0)
/// ends in e^{iγ_b} v_b(t_max) under perfectly adiabatic evolution, with
/// γ_b = −∫E_b dt + (θ_q(t_max) − θ_q(0))/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportPhases {
    /// Indexed by [`H3Branch::index`].
    pub phases: [f64; 4],
}

impl TransportPhases {
    pub fn get(&self, b: H3Branch) -> f64 {
        self.phases[b.index()]
    }
}

/// Quadrature of the branch energies and of θ_q' = Im(z_q'/z_q).
pub fn transport_phases(schedule: &RampSchedule) -> Result<TransportPhases> {
    require_rabi_controlled(schedule)?;
    let (j0, v0, w, phi, o1) = (schedule.coupling, schedule.rabi2_excess, schedule.rate, schedule.phi, schedule.rabi1);
    let scale = j0.abs() + (j0 + v0).abs();
    // [∫|z₋|, ∫|z₊|, Δθ₋, Δθ₊]
    let ints = quadrature::integrate(
        |t| {
            let s2 = (w * t).sin().powi(2);
            let j = j0 * s2;
            let o2 = j0 + v0 * (1.0 - s2);
            let dj = j0 * w * (2.0 * w * t).sin();
            let do2 = -v0 * w * (2.0 * w * t).sin();
            let mut out = [0.0; 4];
            for (k, q) in [-1.0, 1.0].into_iter().enumerate() {
                let z = block_offdiag(q, j, o2, phi);
                if z.norm() <= 1e-12 * scale {
                    return Err(Error::degenerate(format!("sector q = {q:+} closes its gap"), Some(t)));
                }
                let dz = block_offdiag(q, dj, do2, phi);
                out[k] = z.norm();
                out[k + 2] = (dz / z).im;
            }
            Ok(out)
        },
        0.0,
        schedule.t_max,
        1e-10,
    )?;
    let mut phases = [0.0; 4];
    for b in H3Branch::ALL {
        let k = if b.sector() == Sign::Minus { 0 } else { 1 };
        let q = b.sector().value();
        let energy = q * o1 * schedule.t_max + b.level().value() * ints[k];
        phases[b.index()] = -energy + ints[k + 2] / 2.0;
    }
    Ok(TransportPhases { phases })
}

/// Σ_b e^{iγ_b}|v_b(t_max)⟩⟨v_b(0)|: the propagator of perfectly adiabatic
/// following.
pub fn adiabatic_propagator(schedule: &RampSchedule) -> Result<UnitaryOperator> {
    let start = eigenbasis_at(schedule, 0.0)?;
    let end = eigenbasis_at(schedule, schedule.t_max)?;
    let gammas = transport_phases(schedule)?;
    let mut m = Mat4::zeros();
    for b in H3Branch::ALL {
        let phase = C64::from_polar(1.0, gammas.get(b));
        let (out, inp) = (end.vector(b), start.vector(b));
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] += phase * out.0[r] * inp.0[c].conj();
            }
        }
    }
    UnitaryOperator::new(m)
}

/// Infidelity 1 − |⟨v_b(t_max)|U|v_b(0)⟩|² for each branch.
pub fn transport_infidelities(schedule: &RampSchedule, u: &UnitaryOperator) -> Result<[f64; 4]> {
    let start = eigenbasis_at(schedule, 0.0)?;
    let end = eigenbasis_at(schedule, schedule.t_max)?;
    Ok(H3Branch::ALL.map(|b| 1.0 - end.vector(b).overlap_sqr(&u.apply(start.vector(b)))))
}
