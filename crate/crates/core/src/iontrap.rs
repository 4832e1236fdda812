//! Linear Coulomb crystal, transverse normal modes and the phonon-mediated
//! spin-spin coupling.
//!
//! Frequencies are angular, in rad·ms⁻¹, matching the rest of the crate.
//! Positions are dimensionless in units of ℓ = (e²/4πε₀Mω_z²)^{1/3}.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::units::{constants, to_per_second};

pub const MAX_IONS: usize = 20;

/// Dimensionless equilibrium positions of `n` ions, ascending.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_IONS).contains(&n) {
        return Err(Error::invalid("N", format!("need 2 <= N <= {MAX_IONS}, got {n}")));
    }
    let force = |u: &DVector<f64>| {
        DVector::from_fn(n, |m, _| {
            let mut f = u[m];
            for p in 0..n {
                if p != m {
                    let d = u[m] - u[p];
                    f -= d.signum() / (d * d);
                }
            }
            f
        })
    };
    let spacing = 2.0 / (n as f64).powf(0.56);
    let mut u = DVector::from_fn(n, |m, _| (m as f64 - (n as f64 - 1.0) / 2.0) * spacing);
    let mut f = force(&u);
    for _ in 0..200 {
        if f.amax() < 1e-13 {
            return Ok(u.iter().copied().collect());
        }
        let jac = DMatrix::from_fn(n, n, |m, p| {
            if m == p {
                1.0 + (0..n).filter(|&q| q != m).map(|q| 2.0 / (u[m] - u[q]).abs().powi(3)).sum::<f64>()
            } else {
                -2.0 / (u[m] - u[p]).abs().powi(3)
            }
        });
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::NonConvergence { what: "equilibrium Newton (singular Jacobian)".into(), residual: f.amax() })?;
        let mut lambda = 1.0;
        loop {
            let trial = &u - &step * lambda;
            let ordered = trial.as_slice().windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let ft = force(&trial);
                if ft.amax() < f.amax() || lambda < 1e-3 {
                    u = trial;
                    f = ft;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::NonConvergence { what: "equilibrium line search".into(), residual: f.amax() });
            }
        }
    }
    if f.amax() < 1e-10 {
        return Ok(u.iter().copied().collect());
    }
    Err(Error::NonConvergence { what: "equilibrium Newton".into(), residual: f.amax() })
}

/// Transverse Hessian in units of ω_z².
pub fn transverse_hessian(positions: &[f64], anisotropy: f64) -> DMatrix<f64> {
    let n = positions.len();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            anisotropy * anisotropy
                - (0..n).filter(|&p| p != a).map(|p| (positions[a] - positions[p]).abs().powi(-3)).sum::<f64>()
        } else {
            (positions[a] - positions[b]).abs().powi(-3)
        }
    })
}

/// A linear chain with its transverse modes.
#[derive(Clone, Debug, PartialEq)]
pub struct IonChain {
    pub n: usize,
    pub omega_x: f64,
    pub omega_z: f64,
    /// kg
    pub mass: f64,
    /// Effective wavenumber, m⁻¹.
    pub k_laser: f64,
    pub equilibrium: Vec<f64>,
    /// Descending.
    pub mode_frequencies: Vec<f64>,
    /// `modes[k][n]` = b_{k,n}.
    pub modes: Vec<Vec<f64>>,
}

impl IonChain {
    pub fn new(n: usize, omega_x: f64, omega_z: f64, mass: f64, k_laser: f64) -> Result<Self> {
        for (name, v) in [("omega_x", omega_x), ("omega_z", omega_z), ("mass", mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(k_laser >= 0.0 && k_laser.is_finite()) {
            return Err(Error::invalid("k_laser", format!("must be non-negative, got {k_laser}")));
        }
        let equilibrium = equilibrium_positions(n)?;
        let mut chain = IonChain {
            n,
            omega_x,
            omega_z,
            mass,
            k_laser,
            equilibrium,
            mode_frequencies: Vec::new(),
            modes: Vec::new(),
        };
        let (f, b) = transverse_modes(&chain)?;
        chain.mode_frequencies = f;
        chain.modes = b;
        Ok(chain)
    }

    /// ℓ in metres.
    pub fn length_scale(&self) -> f64 {
        let wz = to_per_second(self.omega_z);
        let e2 = constants::ELEMENTARY_CHARGE.powi(2);
        (e2 / (4.0 * std::f64::consts::PI * constants::VACUUM_PERMITTIVITY * self.mass * wz * wz)).cbrt()
    }
}

/// Mode frequencies (descending) and b_{k,n}.
///
/// Each mode vector is signed so its largest component is positive (lowest
/// ion index on ties).
pub fn transverse_modes(chain: &IonChain) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = chain.equilibrium.len();
    let a = transverse_hessian(&chain.equilibrium, chain.omega_x / chain.omega_z);
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let lowest = eig.eigenvalues[order[n - 1]];
    if lowest <= 0.0 {
        return Err(Error::Instability(format!(
            "transverse eigenvalue {lowest:.4e} <= 0: linear chain buckles (omega_x/omega_z = {:.4})",
            chain.omega_x / chain.omega_z
        )));
    }
    let freqs = order.iter().map(|&c| chain.omega_z * eig.eigenvalues[c].sqrt()).collect();
    let mut b = vec![vec![0.0; n]; n];
    for (col, &c) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(c);
        let mut pivot = 0;
        for k in 1..n {
            if v[k].abs() > v[pivot].abs() + 1e-12 {
                pivot = k;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            b[k][col] = sign * v[k];
        }
    }
    Ok((freqs, b))
}

/// η_{k,n} = b_{k,n}·k_laser·√(ℏ/2Mω_n).
pub fn lamb_dicke(chain: &IonChain, ion: usize, mode: usize) -> Result<f64> {
    check_index(ion, chain.n)?;
    check_index(mode, chain.n)?;
    let w = to_per_second(chain.mode_frequencies[mode]);
    Ok(chain.modes[ion][mode] * chain.k_laser * (constants::HBAR / (2.0 * chain.mass * w)).sqrt())
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    /// Ω_x
    pub rabi: f64,
    /// μ
    pub beatnote: f64,
    pub ions: (usize, usize),
}

impl DriveParams {
    pub fn new(rabi: f64, beatnote: f64, ions: (usize, usize), n: usize) -> Result<Self> {
        if !rabi.is_finite() || !(beatnote > 0.0 && beatnote.is_finite()) {
            return Err(Error::invalid("drive", "Omega_x must be finite and mu positive"));
        }
        if ions.0 == ions.1 {
            return Err(Error::invalid("ions", "target ions must differ"));
        }
        check_index(ions.0, n)?;
        check_index(ions.1, n)?;
        Ok(DriveParams { rabi, beatnote, ions })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveCoupling {
    /// J in rad·ms⁻¹.
    pub total: f64,
    /// Contribution of each mode, same order as the chain's modes.
    pub per_mode: Vec<f64>,
}

/// g_{k,n} = η_{k,n}Ω_x.
pub fn spin_phonon(chain: &IonChain, drive: &DriveParams, ion: usize, mode: usize) -> Result<f64> {
    Ok(lamb_dicke(chain, ion, mode)? * drive.rabi)
}

/// J = Σₙ g_{k,n}g_{m,n}ωₙ/(μ² − ωₙ²).
pub fn effective_j(chain: &IonChain, drive: &DriveParams) -> Result<EffectiveCoupling> {
    let (k, m) = drive.ions;
    check_index(k, chain.n)?;
    check_index(m, chain.n)?;
    let mu = drive.beatnote;
    let mut per_mode = Vec::with_capacity(chain.n);
    for (n, &w) in chain.mode_frequencies.iter().enumerate() {
        if (mu - w).abs() <= 1e-9 * w {
            return Err(Error::Resonance(format!("beatnote sits on mode {n} ({w:.6e} rad/ms)")));
        }
        let g = spin_phonon(chain, drive, k, n)? * spin_phonon(chain, drive, m, n)?;
        per_mode.push(g * w / (mu * mu - w * w));
    }
    Ok(EffectiveCoupling { total: per_mode.iter().sum(), per_mode })
}

/// minₙ |ωₙ − μ| / |g_{k,n}| over both target ions; +∞ if every g vanishes.
pub fn dispersive_margin(chain: &IonChain, drive: &DriveParams) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for (n, &w) in chain.mode_frequencies.iter().enumerate() {
        for ion in [drive.ions.0, drive.ions.1] {
            let g = spin_phonon(chain, drive, ion, n)?.abs();
            if g > 0.0 {
                margin = margin.min((w - drive.beatnote).abs() / g);
            }
        }
    }
    Ok(margin)
}
