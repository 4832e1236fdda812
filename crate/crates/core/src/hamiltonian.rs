//! Two-spin Hamiltonians, circulant structure and the Fourier eigenmodes.
//!
//! All matrices are in the (↓↓, ↓↑, ↑↓, ↑↑) basis and in rad·ms⁻¹.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, HermitianOperator, Mat2, Mat4, StateVector, C64, I, ONE, ZERO};

/// Couplings and phases of the general driven two-spin Hamiltonian
///
/// H = J(σ₁⁺e^{−iφ₁} + σ₁⁻e^{iφ₁})(σ₂⁺e^{−iφ₂} + σ₂⁻e^{iφ₂})
///   + Ω₁(σ₁⁺e^{iϕ₁} + σ₁⁻e^{−iϕ₁}) + Ω₂(σ₂⁺e^{iϕ₂} + σ₂⁻e^{−iϕ₂}).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralParams {
    pub coupling: f64,
    pub rabi1: f64,
    pub rabi2: f64,
    /// φ₁, φ₂: phases of the spin-spin term.
    pub coupling_phase: [f64; 2],
    /// ϕ₁, ϕ₂: phases of the single-spin drives.
    pub drive_phase: [f64; 2],
}

impl GeneralParams {
    /// Validates finiteness and folds negative magnitudes into π phase shifts.
    pub fn new(
        coupling: f64,
        rabi1: f64,
        rabi2: f64,
        coupling_phase: [f64; 2],
        drive_phase: [f64; 2],
    ) -> Result<Self> {
        let named = [
            ("J", coupling),
            ("Omega1", rabi1),
            ("Omega2", rabi2),
            ("varphi1", coupling_phase[0]),
            ("varphi2", coupling_phase[1]),
            ("phi1", drive_phase[0]),
            ("phi2", drive_phase[1]),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        let mut p = GeneralParams { coupling, rabi1, rabi2, coupling_phase, drive_phase };
        if p.coupling < 0.0 {
            p.coupling = -p.coupling;
            p.coupling_phase[0] += PI;
        }
        if p.rabi1 < 0.0 {
            p.rabi1 = -p.rabi1;
            p.drive_phase[0] += PI;
        }
        if p.rabi2 < 0.0 {
            p.rabi2 = -p.rabi2;
            p.drive_phase[1] += PI;
        }
        Ok(p)
    }

    /// Case-1 conditions: Ω₂ = J, Ω₁ = 0, φ₂ = ϕ₂ = φ, φ₁ = 0.
    pub fn case1(coupling: f64, phi: f64) -> Result<Self> {
        Self::new(coupling, 0.0, coupling, [0.0, phi], [0.0, phi])
    }

    /// Case-2 conditions: Case 1 plus a spin-1 drive Ω₁ with ϕ₁ = 0.
    pub fn case2(coupling: f64, rabi1: f64, phi: f64) -> Result<Self> {
        Self::new(coupling, rabi1, coupling, [0.0, phi], [0.0, phi])
    }

    /// Rabi-controlled variant: Case-2 phases with an independent Ω₂.
    pub fn rabi_controlled(coupling: f64, rabi1: f64, rabi2: f64, phi: f64) -> Result<Self> {
        Self::new(coupling, rabi1, rabi2, [0.0, phi], [0.0, phi])
    }
}

/// Detunings Δ₁, Δ₂ entering Δ₁σ₁ᶻ + Δ₂σ₂ᶻ.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DetuningPair {
    pub delta1: f64,
    pub delta2: f64,
}

impl DetuningPair {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        if !delta1.is_finite() || !delta2.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(DetuningPair { delta1, delta2 })
    }
}

/// First column (c₀, c₁, c₂, c₃) of a 4×4 circulant matrix with
/// `C[r][c] = c_{(r − c) mod 4}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirculantSpec {
    pub column: [C64; 4],
}

impl CirculantSpec {
    /// Arbitrary complex entries (diagnostic use).
    pub fn new(column: [C64; 4]) -> Self {
        CirculantSpec { column }
    }

    /// Hermitian circulant: c₀, c₂ real and c₃ = conj(c₁).
    pub fn hermitian(c0: f64, c1: C64, c2: f64) -> Self {
        CirculantSpec { column: [C64::new(c0, 0.0), c1, C64::new(c2, 0.0), c1.conj()] }
    }

    pub fn matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = self.column[(r + 4 - c) % 4];
            }
        }
        m
    }

    pub fn to_hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.matrix())
    }

    /// Eigenvalue on `fourier_state(p)`: Σₖ cₖ i^{−kp}.
    pub fn eigenvalue(&self, p: usize) -> C64 {
        (0..4).map(|k| self.column[k] * i_pow(4 * 4 - (k * p) % 4)).sum()
    }
}

/// Result of a circulant test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirculantCheck {
    pub is_circulant: bool,
    /// Column 0 of the tested matrix.
    pub witness: [C64; 4],
    pub max_deviation: f64,
}

/// i^n for integer n.
fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Entry-for-entry matrix of the general Hamiltonian.
pub fn build_general(p: &GeneralParams) -> HermitianOperator {
    let e = |x: f64| C64::from_polar(1.0, x);
    let j = p.coupling;
    let (o1, o2) = (p.rabi1, p.rabi2);
    let [f1, f2] = p.coupling_phase;
    let [d1, d2] = p.drive_phase;
    let m = Mat4([
        [ZERO, e(-d2) * o2, e(-d1) * o1, e(f1 + f2) * j],
        [e(d2) * o2, ZERO, e(-(f2 - f1)) * j, e(-d1) * o1],
        [e(d1) * o1, e(f2 - f1) * j, ZERO, e(-d2) * o2],
        [e(-(f1 + f2)) * j, e(d1) * o1, e(d2) * o2, ZERO],
    ]);
    HermitianOperator::symmetrized(m)
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::invalid(name, format!("must be finite and non-negative, got {v}")));
    }
    Ok(())
}

/// Circulant Hamiltonian with Ω₁ = 0.
pub fn build_case1(coupling: f64, phi: f64) -> Result<HermitianOperator> {
    check_nonneg("J", coupling)?;
    Ok(build_general(&GeneralParams::case1(coupling, phi)?))
}

/// Circulant Hamiltonian with an extra Ω₁(σ₁⁺ + σ₁⁻) drive.
pub fn build_case2(coupling: f64, rabi1: f64, phi: f64) -> Result<HermitianOperator> {
    check_nonneg("J", coupling)?;
    check_nonneg("Omega1", rabi1)?;
    Ok(build_general(&GeneralParams::case2(coupling, rabi1, phi)?))
}

/// Δ₁σ₁ᶻ⊗I + I⊗Δ₂σ₂ᶻ = diag(−Δ₁−Δ₂, −Δ₁+Δ₂, Δ₁−Δ₂, Δ₁+Δ₂).
pub fn build_detuning(d: &DetuningPair) -> HermitianOperator {
    let (a, b) = (d.delta1, d.delta2);
    HermitianOperator::symmetrized(Mat4::diag([
        C64::new(-a - b, 0.0),
        C64::new(-a + b, 0.0),
        C64::new(a - b, 0.0),
        C64::new(a + b, 0.0),
    ]))
}

/// Rabi-controlled Hamiltonian without detunings; circulant iff Ω₂ = J.
pub fn build_rabi_controlled(coupling: f64, rabi1: f64, rabi2: f64, phi: f64) -> Result<HermitianOperator> {
    Ok(build_general(&GeneralParams::rabi_controlled(coupling, rabi1, rabi2, phi)?))
}

/// Tests `max_{r,c} |h[r,c] − w[(r−c) mod 4]| ≤ tol` with `w` = column 0.
pub fn is_circulant(h: &Mat4, tol: f64) -> CirculantCheck {
    let witness = [h.0[0][0], h.0[1][0], h.0[2][0], h.0[3][0]];
    let mut max_deviation: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            max_deviation = max_deviation.max((h.0[r][c] - witness[(r + 4 - c) % 4]).norm());
        }
    }
    CirculantCheck { is_circulant: max_deviation <= tol, witness, max_deviation }
}

/// Fourier mode ψₚ with components i^{jp}/2.
pub fn fourier_state(p: usize) -> Result<StateVector> {
    if p >= 4 {
        return Err(Error::IndexOutOfRange { index: p, len: 4 });
    }
    let mut amps = [ZERO; 4];
    for (j, a) in amps.iter_mut().enumerate() {
        *a = i_pow(j * p) * 0.5;
    }
    Ok(StateVector(amps))
}

/// All four Fourier modes.
pub fn fourier_basis() -> [StateVector; 4] {
    [0, 1, 2, 3].map(|p| fourier_state(p).expect("index in range"))
}

/// σ⁺e^{ia} + σ⁻e^{−ia} on one spin.
pub fn phased_flip(a: f64) -> Mat2 {
    pauli::raise().scale(C64::from_polar(1.0, a)) + pauli::lower().scale(C64::from_polar(1.0, -a))
}

/// Same Hamiltonian as [`build_general`], assembled from tensor products of
/// spin operators instead of written-out entries.
pub fn build_general_from_operators(p: &GeneralParams) -> Mat4 {
    let [f1, f2] = p.coupling_phase;
    let [d1, d2] = p.drive_phase;
    let id = Mat2::identity();
    tensor(&phased_flip(-f1), &phased_flip(-f2)).scale_re(p.coupling)
        + tensor(&phased_flip(d1), &id).scale_re(p.rabi1)
        + tensor(&id, &phased_flip(d2)).scale_re(p.rabi2)
}
