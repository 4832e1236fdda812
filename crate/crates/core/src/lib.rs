//! Simulator and parameter-design toolkit for an adiabatic two-qubit
//! Fourier gate protected by circulant symmetry.
//!
//! Module map:
//! - [`linalg`]: 4×4 complex algebra, Hermitian eigendecomposition, unitary exponentials
//! - [`hamiltonian`]: spin Hamiltonians, circulant checks, Fourier states
//! - [`spectral`]: closed-form eigenfrequencies, branch tracking, adiabaticity diagnostics
//! - [`dynamics`]: ramp schedules, propagation, adiabatic phases
//! - [`gatecheck`]: target gates, transition map, fidelities
//! - [`tuner`]: detuning search that quantizes the adiabatic phases
//! - [`sta`]: exact eigenbasis of the Rabi-controlled Hamiltonian and counterdiabatic driving
//! - [`iontrap`]: linear Coulomb crystal, transverse modes, effective spin-spin coupling

pub mod dynamics;
pub mod error;
pub mod gatecheck;
pub mod hamiltonian;
pub mod iontrap;
pub mod linalg;
mod quadrature;
pub mod spectral;
pub mod sta;
pub mod tuner;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{
    eigh, expm_i, tensor, Eigen, HermitianOperator, Mat2, Mat4, StateVector, UnitaryOperator, C64,
};
