//! Detuning search that makes the adiabatic phases α₂, β₂ multiples of 2π.

use std::f64::consts::PI;

use crate::dynamics::{adiabatic_phases_with_tolerance, AdiabaticPhases, RampSchedule};
use crate::error::{Error, Result};
use crate::hamiltonian::DetuningPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuneTarget {
    /// α₂ = 2kπ
    pub k: u32,
    /// β₂ = 2pπ
    pub p: u32,
    /// Case-2 schedule at φ = π/4; its detunings are ignored.
    pub base: RampSchedule,
    /// Residual tolerance in rad.
    pub tolerance: f64,
}

impl TuneTarget {
    pub fn new(k: u32, p: u32, base: RampSchedule, tolerance: f64) -> Result<Self> {
        if !(k > p && p > 0) {
            return Err(Error::invalid("k, p", format!("need k > p > 0, got k = {k}, p = {p}")));
        }
        if !base.has_analytic_phases() {
            return Err(Error::invalid("base", "needs a Case-2 schedule at phi = pi/4"));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        Ok(TuneTarget { k, p, base, tolerance })
    }

    pub fn alpha_target(&self) -> f64 {
        2.0 * PI * self.k as f64
    }

    pub fn beta_target(&self) -> f64 {
        2.0 * PI * self.p as f64
    }

    /// Exact solution when every coupling vanishes: Δ₁ ± Δ₂ = 4(k or p)π/t_max.
    pub fn decoupled_guess(&self) -> DetuningPair {
        let t = self.base.t_max;
        let sum = 4.0 * PI * self.k as f64 / t;
        let diff = 4.0 * PI * self.p as f64 / t;
        DetuningPair { delta1: 0.5 * (sum + diff), delta2: 0.5 * (sum - diff) }
    }

    fn quadrature_tolerance(&self) -> f64 {
        (self.tolerance * 1e-3).min(1e-9)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuneResult {
    pub detuning: DetuningPair,
    pub phases: AdiabaticPhases,
    pub residual: [f64; 2],
    pub iterations: usize,
}

/// (α₂(d) − 2kπ, β₂(d) − 2pπ).
pub fn phase_residual(d: &DetuningPair, target: &TuneTarget) -> Result<[f64; 2]> {
    let s = target.base.with_detuning(*d);
    let ph = adiabatic_phases_with_tolerance(&s, target.quadrature_tolerance())?;
    Ok([ph.alpha - target.alpha_target(), ph.beta - target.beta_target()])
}

const MAX_ITERATIONS: usize = 60;
const FD_STEP: f64 = 1e-3;

fn project(d: [f64; 2], floor: f64) -> [f64; 2] {
    let d2 = d[1].max(floor);
    let d1 = d[0].max(d2 * (1.0 + 1e-6) + floor);
    [d1, d2]
}

/// Damped Newton on the residual map, kept inside Δ₁ > Δ₂ > 0.
pub fn tune(target: &TuneTarget, initial: Option<DetuningPair>) -> Result<TuneResult> {
    let guess = initial.unwrap_or_else(|| target.decoupled_guess());
    if !(guess.delta1 > 0.0 && guess.delta2 > 0.0) || guess.delta1 == guess.delta2 {
        return Err(Error::invalid("initial", "need positive, distinct detunings"));
    }
    let floor = 1e-9 * guess.delta1;
    let pair = |x: [f64; 2]| DetuningPair { delta1: x[0], delta2: x[1] };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    let mut x = project([guess.delta1, guess.delta2], floor);
    let mut r = phase_residual(&pair(x), target)?;
    for it in 0..MAX_ITERATIONS {
        if norm(r) < target.tolerance {
            let s = target.base.with_detuning(pair(x));
            let phases = adiabatic_phases_with_tolerance(&s, target.quadrature_tolerance())?;
            return Ok(TuneResult { detuning: pair(x), phases, residual: r, iterations: it });
        }
        // central differences
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = FD_STEP * x[c];
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let rp = phase_residual(&pair(xp), target)?;
            let rm = phase_residual(&pair(xm), target)?;
            jac[0][c] = (rp[0] - rm[0]) / (2.0 * h);
            jac[1][c] = (rp[1] - rm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jscale = jac.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if det.abs() <= 1e-12 * jscale * jscale {
            return Err(Error::NonConvergence {
                what: format!("singular Jacobian at k = {}, p = {}; try another winding pair", target.k, target.p),
                residual: norm(r),
            });
        }
        let step = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let trial = project([x[0] + lambda * step[0], x[1] + lambda * step[1]], floor);
            match phase_residual(&pair(trial), target) {
                Ok(rt) if norm(rt) < norm(r) => {
                    x = trial;
                    r = rt;
                    break;
                }
                Ok(_) | Err(Error::Degenerate { .. }) => {
                    lambda *= 0.5;
                    if lambda < 1e-6 {
                        return Err(Error::NonConvergence { what: "detuning search line search".into(), residual: norm(r) });
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::NonConvergence { what: format!("detuning search in {MAX_ITERATIONS} iterations"), residual: norm(r) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::khz;
    use std::f64::consts::FRAC_PI_4;

    fn base(j: f64, o: f64) -> RampSchedule {
        RampSchedule::case2(j, o, DetuningPair::default(), khz(0.18), FRAC_PI_4).unwrap()
    }

    #[test]
    fn rejects_bad_windings() {
        assert!(TuneTarget::new(1, 2, base(1.0, 1.0), 1e-6).is_err());
        assert!(TuneTarget::new(2, 0, base(1.0, 1.0), 1e-6).is_err());
        assert!(TuneTarget::new(2, 2, base(1.0, 1.0), 1e-6).is_err());
    }

    #[test]
    fn decoupled_closed_form() {
        let t = TuneTarget::new(5, 2, base(0.0, 0.0), 1e-8).unwrap();
        let r = tune(&t, Some(DetuningPair { delta1: 30.0, delta2: 10.0 })).unwrap();
        let g = t.decoupled_guess();
        assert!((r.detuning.delta1 - g.delta1).abs() < 1e-10 * g.delta1);
        assert!((r.detuning.delta2 - g.delta2).abs() < 1e-10 * g.delta2);
    }

    #[test]
    fn equal_detunings_degenerate() {
        let t = TuneTarget::new(5, 2, base(khz(2.0), khz(40.0)), 1e-6).unwrap();
        let d = DetuningPair { delta1: 100.0, delta2: 100.0 };
        assert!(matches!(phase_residual(&d, &t), Err(Error::Degenerate { .. })));
    }
}
