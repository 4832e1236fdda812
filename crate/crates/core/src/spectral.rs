//! Closed-form eigenfrequencies, branch tracking and adiabaticity diagnostics.

use crate::dynamics::RampSchedule;
use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianOperator, StateVector, C64};

/// Branch labels. The discriminant is the storage index used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    LambdaPlus = 0,
    LambdaMinus = 1,
    MuPlus = 2,
    MuMinus = 3,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::LambdaPlus, Branch::LambdaMinus, Branch::MuPlus, Branch::MuMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::LambdaPlus => "lambda+",
            Branch::LambdaMinus => "lambda-",
            Branch::MuPlus => "mu+",
            Branch::MuMinus => "mu-",
        }
    }
}

/// The four eigenfrequencies in rad/ms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumValues {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl SpectrumValues {
    /// Values indexed by [`Branch::index`].
    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda_plus, self.lambda_minus, self.mu_plus, self.mu_minus]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        SpectrumValues { lambda_plus: v[0], lambda_minus: v[1], mu_plus: v[2], mu_minus: v[3] }
    }

    pub fn get(&self, b: Branch) -> f64 {
        self.as_array()[b.index()]
    }

    /// Ascending copy, for comparison against a sorted numerical spectrum.
    pub fn sorted(&self) -> [f64; 4] {
        let mut v = self.as_array();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Values plus eigenvectors, both indexed by [`Branch::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    pub values: SpectrumValues,
    pub vectors: [StateVector; 4],
}

impl Spectrum {
    pub fn vector(&self, b: Branch) -> &StateVector {
        &self.vectors[b.index()]
    }
}

/// Returns (√(s+2r), √(s−2r)), clamping a rounding-level negative radicand.
fn split_roots(s: f64, r: f64) -> (f64, f64) {
    let lo = s - 2.0 * r;
    debug_assert!(lo >= -1e-10 * s.abs().max(f64::MIN_POSITIVE), "negative radicand {lo}");
    ((s + 2.0 * r).sqrt(), lo.max(0.0).sqrt())
}

/// Eigenfrequencies with Ω₁ = 0 at arbitrary φ.
pub fn analytic_case1(coupling: f64, delta1: f64, delta2: f64, phi: f64) -> SpectrumValues {
    let (j2, d1s, d2s) = (coupling * coupling, delta1 * delta1, delta2 * delta2);
    let s = 2.0 * j2 + d1s + d2s;
    let r = (j2 * j2 * (2.0 * phi).cos().powi(2) + d1s * (j2 + d2s)).sqrt();
    let (l, m) = split_roots(s, r);
    SpectrumValues { lambda_plus: l, lambda_minus: -l, mu_plus: m, mu_minus: -m }
}

/// Eigenfrequencies with a spin-1 drive Ω₁ at φ = π/4 (the only angle where
/// a closed form is available).
pub fn analytic_case2(coupling: f64, rabi1: f64, delta1: f64, delta2: f64) -> Result<SpectrumValues> {
    for (name, v) in [("J", coupling), ("Omega1", rabi1), ("Delta1", delta1), ("Delta2", delta2)] {
        if !v.is_finite() {
            return Err(Error::invalid(name, format!("must be finite, got {v}")));
        }
    }
    let (j2, o2, d1s, d2s) = (coupling * coupling, rabi1 * rabi1, delta1 * delta1, delta2 * delta2);
    let s = 2.0 * j2 + o2 + d1s + d2s;
    let r = (j2 * (2.0 * o2 + d1s) + d2s * (o2 + d1s)).sqrt();
    let (l, m) = split_roots(s, r);
    Ok(SpectrumValues { lambda_plus: l, lambda_minus: -l, mu_plus: m, mu_minus: -m })
}

/// One end-of-ramp level and the Fourier state it connects to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledLevel {
    pub branch: Branch,
    pub value: f64,
    /// p in ψ_p.
    pub fourier_index: usize,
}

/// Relative tolerance for calling two eigenvalues degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Levels of the driven circulant Hamiltonian once the detunings are off.
///
/// λ₊ = Ω₁+2J cos φ ↦ ψ₀, λ₋ = −Ω₁−2J sin φ ↦ ψ₃,
/// μ₊ = Ω₁−2J cos φ ↦ ψ₂, μ₋ = −Ω₁+2J sin φ ↦ ψ₁.
pub fn final_case2(coupling: f64, rabi1: f64, phi: f64) -> Result<[LabeledLevel; 4]> {
    let (c, s) = (2.0 * coupling * phi.cos(), 2.0 * coupling * phi.sin());
    let levels = [
        LabeledLevel { branch: Branch::LambdaPlus, value: rabi1 + c, fourier_index: 0 },
        LabeledLevel { branch: Branch::LambdaMinus, value: -rabi1 - s, fourier_index: 3 },
        LabeledLevel { branch: Branch::MuPlus, value: rabi1 - c, fourier_index: 2 },
        LabeledLevel { branch: Branch::MuMinus, value: -rabi1 + s, fourier_index: 1 },
    ];
    let scale = levels.iter().map(|l| l.value.abs()).fold(0.0, f64::max);
    for a in 0..4 {
        for b in a + 1..4 {
            if (levels[a].value - levels[b].value).abs() <= DEGENERACY_TOL * scale {
                return Err(Error::degenerate(
                    format!("{} and {} coincide", levels[a].branch.name(), levels[b].branch.name()),
                    None,
                ));
            }
        }
    }
    Ok(levels)
}

/// First pair of branches closer than [`DEGENERACY_TOL`] times the largest
/// magnitude, if any.
pub fn degenerate_pair(values: &SpectrumValues) -> Option<(Branch, Branch)> {
    let v = values.as_array();
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for a in 0..4 {
        for b in a + 1..4 {
            if (v[a] - v[b]).abs() <= DEGENERACY_TOL * scale {
                return Some((Branch::ALL[a], Branch::ALL[b]));
            }
        }
    }
    None
}

/// Numerical spectra along a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPath {
    pub times: Vec<f64>,
    pub spectra: Vec<Spectrum>,
    /// Minimal pairwise separation at each time.
    pub gaps: Vec<f64>,
    /// `couplings[k][a][b]` ≈ |⟨a(tₖ)|∂ₜb⟩| on [tₖ, tₖ₊₁].
    pub couplings: Vec<[[f64; 4]; 4]>,
}

impl SpectralPath {
    pub fn branch_values(&self, b: Branch) -> Vec<f64> {
        self.spectra.iter().map(|s| s.values.get(b)).collect()
    }
}

/// Overlaps closer than this make branch continuation ambiguous.
pub const MATCH_AMBIGUITY: f64 = 1e-6;

fn min_gap(v: &[f64; 4]) -> f64 {
    let mut g = f64::INFINITY;
    for a in 0..4 {
        for b in a + 1..4 {
            g = g.min((v[a] - v[b]).abs());
        }
    }
    g
}

/// Diagonalizes along `grid` and follows each branch by maximal overlap.
///
/// Labels are fixed at the first grid point from the ordering
/// λ₊ > μ₊ > μ₋ > λ₋ of the initial-limit values and carried by continuity.
pub fn track(schedule: &RampSchedule, grid: &[f64]) -> Result<SpectralPath> {
    if grid.len() < 2 {
        return Err(Error::invalid("grid", "need at least two points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    let hams = grid.iter().map(|&t| schedule.hamiltonian_at(t)).collect::<Result<Vec<_>>>()?;
    track_hamiltonians(grid, &hams)
}

/// [`track`] on precomputed Hamiltonians.
pub fn track_hamiltonians(times: &[f64], hams: &[HermitianOperator]) -> Result<SpectralPath> {
    if times.len() != hams.len() || times.len() < 2 {
        return Err(Error::invalid("grid", "need at least two points and one Hamiltonian per point"));
    }
    let mut spectra: Vec<Spectrum> = Vec::with_capacity(times.len());
    let mut gaps = Vec::with_capacity(times.len());

    // ascending order → (λ₋, μ₋, μ₊, λ₊)
    let first = eigh(&hams[0])?;
    let scale = first.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let g0 = min_gap(&first.values);
    if scale > 0.0 && g0 <= DEGENERACY_TOL * scale {
        return Err(Error::degenerate("initial levels coincide; labels undefined", Some(times[0])));
    }
    let order = [3, 0, 2, 1];
    spectra.push(Spectrum {
        values: SpectrumValues::from_array(order.map(|k| first.values[k])),
        vectors: order.map(|k| first.vectors[k]),
    });
    gaps.push(g0);

    for (k, h) in hams.iter().enumerate().skip(1) {
        let e = eigh(h)?;
        let prev = spectra[k - 1];
        let mut used = [false; 4];
        let mut values = [0.0; 4];
        let mut vectors = prev.vectors;
        for b in 0..4 {
            let ov = e.vectors.map(|w| prev.vectors[b].inner(&w));
            let mut idx = [0, 1, 2, 3];
            idx.sort_by(|&x, &y| ov[y].norm().total_cmp(&ov[x].norm()));
            let best = idx[0];
            if ov[best].norm() - ov[idx[1]].norm() < MATCH_AMBIGUITY {
                return Err(Error::degenerate(
                    format!("branch {} matches two eigenvectors", Branch::ALL[b].name()),
                    Some(times[k]),
                ));
            }
            if used[best] {
                return Err(Error::degenerate("two branches claim one eigenvector", Some(times[k])));
            }
            used[best] = true;
            values[b] = e.values[best];
            let phase = ov[best] / ov[best].norm();
            // ⟨prev|w·phase*⟩ = |⟨prev|w⟩| ≥ 0
            vectors[b] = e.vectors[best].scale(phase.conj());
        }
        gaps.push(min_gap(&values));
        spectra.push(Spectrum { values: SpectrumValues::from_array(values), vectors });
    }

    let couplings = (0..times.len() - 1)
        .map(|k| {
            let dt = times[k + 1] - times[k];
            let mut c = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        let va = &spectra[k].vectors[a];
                        let diff = spectra[k + 1].vectors[b].add(&spectra[k].vectors[b].scale(C64::new(-1.0, 0.0)));
                        c[a][b] = va.inner(&diff).norm() / dt;
                    }
                }
            }
            c
        })
        .collect();

    Ok(SpectralPath { times: times.to_vec(), spectra, gaps, couplings })
}

/// min over intervals and pairs of |E_a − E_b| / |⟨∂ₜa|b⟩|; +∞ when every
/// coupling vanishes.
pub fn adiabaticity_margin(path: &SpectralPath) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for (k, c) in path.couplings.iter().enumerate() {
        let (v0, v1) = (path.spectra[k].values.as_array(), path.spectra[k + 1].values.as_array());
        for a in 0..4 {
            for b in a + 1..4 {
                let coupling = c[a][b].max(c[b][a]);
                if coupling == 0.0 {
                    continue;
                }
                let gap = (v0[a] - v0[b]).abs().min((v1[a] - v1[b]).abs());
                if gap == 0.0 {
                    return Err(Error::degenerate(
                        format!("{} and {} touch", Branch::ALL[a].name(), Branch::ALL[b].name()),
                        Some(path.times[k]),
                    ));
                }
                margin = margin.min(gap / coupling);
            }
        }
    }
    Ok(margin)
}
