//! Unit conventions.
//!
//! Frequencies are stored as angular frequencies in rad·ms⁻¹ and times in ms.
//! User-facing values are "frequency/2π in kHz", so 1 kHz ↦ 2π rad·ms⁻¹.

use std::f64::consts::{PI, TAU};

/// frequency/2π in kHz → rad·ms⁻¹
pub fn khz(f: f64) -> f64 {
    TAU * f
}

/// rad·ms⁻¹ → frequency/2π in kHz
pub fn to_khz(w: f64) -> f64 {
    w / TAU
}

/// Phase given in units of π → rad.
pub fn pi_units(x: f64) -> f64 {
    PI * x
}

/// CODATA 2018 constants (SI).
pub mod constants {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
}

/// rad·ms⁻¹ → rad·s⁻¹
pub fn to_per_second(w: f64) -> f64 {
    w * 1e3
}

/// rad·s⁻¹ → rad·ms⁻¹
pub fn from_per_second(w: f64) -> f64 {
    w * 1e-3
}
