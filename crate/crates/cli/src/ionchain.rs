//! Ion-chain report: equilibrium, transverse modes, effective coupling and
//! the dispersive margin.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use circulant_core::iontrap::{dispersive_margin, effective_j, lamb_dicke, DriveParams, IonChain};
use circulant_core::units::{constants, khz, to_khz};
use serde::{Deserialize, Serialize};

use crate::csv::Table;
use crate::{CliError, CliResult, Overrides};

/// Margins below this are reported as a warning.
pub const MARGIN_WARN: f64 = 10.0;
/// Margins below this abort the run.
pub const MARGIN_ERROR: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub ions: usize,
    pub omega_x_khz: f64,
    pub omega_z_khz: f64,
    pub mass_amu: f64,
    /// Effective wavenumber of the spin-dependent force, m⁻¹.
    pub wavenumber_per_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub rabi_khz: f64,
    pub beatnote_khz: f64,
    pub targets: [usize; 2],
    /// Rescale Ω_x so that |J|/2π equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_j_khz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonChainConfig {
    pub chain: ChainConfig,
    pub drive: DriveConfig,
    #[serde(default)]
    pub output: crate::config::OutputConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IonChainReport {
    pub chain: IonChain,
    pub drive: DriveParams,
    pub j_total: f64,
    pub j_per_mode: Vec<f64>,
    pub margin: f64,
    pub warning: Option<String>,
}

impl IonChainConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
    }

    fn validate(&self) -> CliResult<()> {
        let c = &self.chain;
        let positive = [
            ("chain.omega_x_khz", c.omega_x_khz),
            ("chain.omega_z_khz", c.omega_z_khz),
            ("chain.mass_amu", c.mass_amu),
            ("drive.beatnote_khz", self.drive.beatnote_khz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::config(format!("{name}: must be positive, got {v}")));
            }
        }
        if !(c.wavenumber_per_m >= 0.0 && c.wavenumber_per_m.is_finite()) {
            return Err(CliError::config("chain.wavenumber_per_m: must be non-negative"));
        }
        if !self.drive.rabi_khz.is_finite() {
            return Err(CliError::config("drive.rabi_khz: must be finite"));
        }
        if let Some(j) = self.drive.target_j_khz {
            if !(j > 0.0 && j.is_finite()) {
                return Err(CliError::config("drive.target_j_khz: must be positive"));
            }
        }
        let [a, b] = self.drive.targets;
        if a >= c.ions || b >= c.ions || a == b {
            return Err(CliError::config(format!("drive.targets: need two distinct ions below {}", c.ions)));
        }
        Ok(())
    }
}

pub fn run_ion_chain(cfg: &IonChainConfig) -> CliResult<IonChainReport> {
    cfg.validate()?;
    let c = &cfg.chain;
    let chain = IonChain::new(
        c.ions,
        khz(c.omega_x_khz),
        khz(c.omega_z_khz),
        c.mass_amu * constants::ATOMIC_MASS_UNIT,
        c.wavenumber_per_m,
    )?;
    let targets = (cfg.drive.targets[0], cfg.drive.targets[1]);
    let mut drive = DriveParams::new(khz(cfg.drive.rabi_khz), khz(cfg.drive.beatnote_khz), targets, c.ions)?;
    if let Some(j) = cfg.drive.target_j_khz {
        // J ∝ Ω_x²
        let now = effective_j(&chain, &drive)?.total;
        if now == 0.0 {
            return Err(CliError::config("drive.target_j_khz: coupling vanishes at this drive, cannot rescale"));
        }
        drive.rabi *= (khz(j) / now.abs()).sqrt();
    }
    let j = effective_j(&chain, &drive)?;
    let margin = dispersive_margin(&chain, &drive)?;
    if margin < MARGIN_ERROR {
        return Err(CliError::Margin { margin, limit: MARGIN_ERROR });
    }
    let warning = (margin < MARGIN_WARN)
        .then(|| format!("dispersive margin {margin:.3} below {MARGIN_WARN}; phonon elimination is marginal"));
    Ok(IonChainReport { chain, drive, j_total: j.total, j_per_mode: j.per_mode, margin, warning })
}

impl IonChainReport {
    /// One row per mode: frequency, Lamb-Dicke factors of both targets,
    /// contribution to J, then the mode vector.
    pub fn modes_table(&self) -> CliResult<Table> {
        let n = self.chain.n;
        let mut cols = vec![
            "mode".to_string(),
            "omega_khz".into(),
            "eta_first".into(),
            "eta_second".into(),
            "j_contribution_khz".into(),
        ];
        cols.extend((0..n).map(|k| format!("b_ion{k}")));
        let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
        for m in 0..n {
            let mut row = vec![
                m as f64,
                to_khz(self.chain.mode_frequencies[m]),
                lamb_dicke(&self.chain, self.drive.ions.0, m)?,
                lamb_dicke(&self.chain, self.drive.ions.1, m)?,
                to_khz(self.j_per_mode[m]),
            ];
            row.extend((0..n).map(|k| self.chain.modes[k][m]));
            t.push(row);
        }
        Ok(t)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let eq: Vec<String> = self.chain.equilibrium.iter().map(|x| format!("{x:.10}")).collect();
        let _ = writeln!(s, "equilibrium = [{}]  # units of the length scale", eq.join(", "));
        let _ = writeln!(s, "length_scale_m = {:.6e}", self.chain.length_scale());
        let _ = writeln!(s, "rabi_khz = {:.9}", to_khz(self.drive.rabi));
        let _ = writeln!(s, "j_khz = {:.9}", to_khz(self.j_total));
        let _ = writeln!(s, "dispersive_margin = {:.4}", self.margin);
        if let Some(w) = &self.warning {
            let _ = writeln!(s, "warning = {w:?}");
        }
        s
    }
}

pub fn run_and_write(cfg: &IonChainConfig) -> CliResult<(IonChainReport, PathBuf)> {
    let r = run_ion_chain(cfg)?;
    let mut t = r.modes_table()?;
    t.comment(&cfg.to_toml());
    t.comment(&r.summary());
    let path = t.write(&cfg.output.dir, &format!("{}_modes.csv", cfg.output.stem))?;
    Ok((r, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_ion() -> IonChainConfig {
        IonChainConfig::from_toml(
            r#"
            [chain]
            ions = 2
            omega_x_khz = 3000.0
            omega_z_khz = 2000.0
            mass_amu = 171.0
            wavenumber_per_m = 2.4e7

            [drive]
            rabi_khz = 100.0
            beatnote_khz = 2600.0
            targets = [0, 1]
            target_j_khz = 2.0
            "#,
        )
        .unwrap()
    }

    #[test]
    fn rescales_to_target_coupling() {
        let r = run_ion_chain(&two_ion()).unwrap();
        assert!((to_khz(r.j_total).abs() - 2.0).abs() < 1e-9);
        assert!(r.margin > MARGIN_WARN);
        assert_eq!(r.modes_table().unwrap().rows.len(), 2);
    }

    #[test]
    fn rejects_bad_targets_and_tiny_margins() {
        let mut c = two_ion();
        c.drive.targets = [0, 0];
        assert_eq!(run_ion_chain(&c).unwrap_err().exit_code(), 2);
        let mut c = two_ion();
        c.drive.target_j_khz = None;
        c.drive.rabi_khz = 1e5;
        c.drive.beatnote_khz = 3000.5;
        assert_eq!(run_ion_chain(&c).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn round_trip() {
        let c = two_ion();
        assert_eq!(IonChainConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
