//! Acceptance suite. Every test prints one `PASS`/`FAIL` line on stderr
//! (bypassing the test harness capture) before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write as _;
use std::time::Instant;

use circulant_cli::csv::Table;
use circulant_cli::figures::{run_figure, FigureId};
use circulant_cli::Overrides;
use circulant_core::dynamics::{propagate, propagate_state, rotating_basis_state, RampSchedule, Sign, StepControl};
use circulant_core::gatecheck::{entangled_fidelity, entangled_phases, gate_fidelity, target_gate, GateBranch};
use circulant_core::hamiltonian::{
    build_case1, build_case2, build_detuning, fourier_basis, fourier_state, CirculantSpec, DetuningPair,
};
use circulant_core::iontrap::{effective_j, equilibrium_positions, DriveParams, IonChain};
use circulant_core::linalg::{eigh, StateVector, C64};
use circulant_core::spectral::{analytic_case1, analytic_case2, degenerate_pair, final_case2};
use circulant_core::sta::{eigenbasis_at, propagate_with_cd, propagate_with_cd_gain, H3Branch};
use circulant_core::tuner::{tune, TuneTarget};
use circulant_core::units::{constants, khz, to_khz};
use circulant_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

fn report(name: &str, ok: bool, detail: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn check(name: &str, ok: bool, detail: String) {
    report(name, ok, &detail);
    assert!(ok, "{name}: {detail}");
}

fn fig4a_base() -> RampSchedule {
    RampSchedule::case2(khz(2.0), khz(40.0), DetuningPair::default(), khz(0.18), FRAC_PI_4).unwrap()
}

fn fig5(rate_khz: f64) -> RampSchedule {
    RampSchedule::rabi_controlled(khz(2.0), khz(2.0), khz(30.0), khz(rate_khz), FRAC_PI_4).unwrap()
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

#[test]
fn criterion_01_gate_infidelity() {
    let s = fig4a_base().with_detuning(DetuningPair::new(khz(59.96), khz(27.76)).unwrap());
    let start = Instant::now();
    let r = propagate(&s, &StepControl::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let inf = 1.0 - gate_fidelity(&r.propagator, &target_gate(GateBranch::PlusQuarterPi));
    let ok = inf <= 1e-3 && elapsed < 30.0 && (s.t_max - 1.389).abs() < 1e-3;
    check(
        "criterion 1 (gate infidelity)",
        ok,
        format!("1-F = {inf:.3e} (bound 1e-3), t_max = {:.4} ms, runtime {elapsed:.2} s (bound 30 s)", s.t_max),
    );
}

#[test]
fn criterion_02_detuning_tuning() {
    let t = TuneTarget::new(40, 20, fig4a_base(), 1e-6).unwrap();
    match tune(&t, None) {
        Ok(r) => {
            let (d1, d2) = (to_khz(r.detuning.delta1), to_khz(r.detuning.delta2));
            let ea = (r.phases.alpha - 80.0 * PI).abs();
            let eb = (r.phases.beta - 40.0 * PI).abs();
            let ok = (d1 / 59.96 - 1.0).abs() < 5e-3 && (d2 / 27.76 - 1.0).abs() < 5e-3 && ea < 0.05 && eb < 0.05;
            check(
                "criterion 2 (detuning tuning)",
                ok,
                format!("delta = ({d1:.4}, {d2:.4}) kHz vs (59.96, 27.76); |alpha2-80pi| = {ea:.2e}, |beta2-40pi| = {eb:.2e}"),
            );
        }
        Err(e) => check("criterion 2 (detuning tuning)", false, format!("tuner for (k, p) = (40, 20) failed: {e}")),
    }
}

#[test]
fn criterion_03_state_transfer() {
    let a = RampSchedule::case2(khz(2.0), khz(50.0), DetuningPair::new(khz(30.0), khz(10.0)).unwrap(), khz(0.2), FRAC_PI_4)
        .unwrap();
    let ra = propagate_state(&a, &StepControl::default(), &StateVector::basis(0).unwrap()).unwrap();
    let pa = fourier_state(3).unwrap().overlap_sqr(&ra.final_state.unwrap());
    let b = RampSchedule::rabi_controlled(khz(2.0), khz(3.8), khz(30.0), khz(0.6), FRAC_PI_4).unwrap();
    let init = rotating_basis_state(Sign::Minus, Sign::Minus, FRAC_PI_4);
    let rb = propagate_state(&b, &StepControl::default(), &init).unwrap();
    let pb = fourier_state(3).unwrap().overlap_sqr(&rb.final_state.unwrap());
    let ok = pa >= 0.999 && pb >= 0.999 && (a.t_max - 1.25).abs() < 1e-12 && (b.t_max - 0.417).abs() < 1e-3;
    check(
        "criterion 3 (state transfer)",
        ok,
        format!(
            "|<psi3|U|dd>|^2 = {pa:.6} at t_max = {:.4} ms; |<psi3|U|--|>|^2 = {pb:.6} at t_max = {:.4} ms",
            a.t_max, b.t_max
        ),
    );
}

#[test]
fn criterion_04a_entangled_infidelity() {
    let s = fig5(0.8);
    let (alpha, beta) = entangled_phases(&s).unwrap();
    let f = entangled_fidelity(&s, alpha, beta, &StepControl::default()).unwrap();
    let ok = 1.0 - f <= 1e-3 && (s.t_max - 0.3125).abs() < 1e-12;
    check(
        "criterion 4a (entangled-state infidelity)",
        ok,
        format!("1-F = {:.4e} (bound 1e-3) at t_max = {:.4} ms", 1.0 - f, s.t_max),
    );
}

#[test]
fn criterion_04b_entangled_monotone() {
    let f: Vec<f64> = [0.2, 0.4, 0.8, 1.6]
        .iter()
        .map(|&w| {
            let s = fig5(w);
            let (a, b) = entangled_phases(&s).unwrap();
            entangled_fidelity(&s, a, b, &StepControl::default()).unwrap()
        })
        .collect();
    let ok = f.windows(2).all(|x| x[1] <= x[0]);
    let inf: Vec<String> = f.iter().map(|x| format!("{:.3e}", 1.0 - x)).collect();
    check(
        "criterion 4b (fidelity monotone in omega)",
        ok,
        format!("1-F over omega/2pi = 0.2, 0.4, 0.8, 1.6 kHz: [{}]", inf.join(", ")),
    );
}

/// 1 − |⟨v_b(t_max)|U|q₁q₂⟩|² for each rotating product state.
fn rotating_transport(s: &RampSchedule, u: &circulant_core::UnitaryOperator) -> Vec<f64> {
    let start = eigenbasis_at(s, 0.0).unwrap();
    let end = eigenbasis_at(s, s.t_max).unwrap();
    let mut out = Vec::new();
    for q1 in Sign::BOTH {
        for q2 in Sign::BOTH {
            let init = rotating_basis_state(q1, q2, s.phi);
            let b = H3Branch::ALL
                .into_iter()
                .find(|&b| start.vector(b).overlap_sqr(&init) > 1.0 - 1e-12)
                .expect("rotating product states are the initial eigenstates");
            out.push(1.0 - end.vector(b).overlap_sqr(&u.apply(&init)));
        }
    }
    out
}

#[test]
fn criterion_05_counterdiabatic_acceleration() {
    let s = RampSchedule::rabi_controlled(khz(2.0), khz(0.5), khz(80.0), khz(2.5), FRAC_PI_4).unwrap();
    let c = StepControl::default();
    let with = rotating_transport(&s, &propagate_with_cd(&s, &c).unwrap().propagator);
    let without = rotating_transport(&s, &propagate_with_cd_gain(&s, &c, 0.0).unwrap().propagator);
    let worst_with = with.iter().cloned().fold(0.0, f64::max);
    let worst_without = without.iter().cloned().fold(0.0, f64::max);
    let ok = worst_with <= 1e-6 && worst_without >= 100.0 * worst_with.max(1e-6) && (s.t_max - 0.1).abs() < 1e-12;
    check(
        "criterion 5 (counterdiabatic acceleration)",
        ok,
        format!("t_max = {:.4} ms; worst infidelity with field {worst_with:.3e} (bound 1e-6), without {worst_without:.3e}", s.t_max),
    );
}

#[test]
fn criterion_06_circulant_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // ψ_p[j] = i^{jp}/2, written out independently
    let i = C64::new(0.0, 1.0);
    let psi: Vec<StateVector> = (0..4).map(|p| StateVector(std::array::from_fn(|j| i.powu((j * p) as u32) / 2.0))).collect();
    let lib = fourier_basis();
    let basis_agrees = psi.iter().zip(&lib).all(|(a, b)| a.max_diff(b) < 1e-15);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let c0 = scale * rng.random_range(-1.0..1.0);
        let c1 = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        let c2 = scale * rng.random_range(-1.0..1.0);
        let h = CirculantSpec::hermitian(c0, c1, c2).to_hermitian().unwrap();
        for v in &psi {
            let hv = h.matrix().apply(v);
            worst = worst.max(hv.max_diff(&v.scale(v.inner(&hv))));
        }
    }
    check(
        "criterion 6 (circulant Fourier eigenvectors)",
        basis_agrees && worst < 1e-10,
        format!("1000 seeded draws, worst residual {worst:.3e} (bound 1e-10)"),
    );
}

fn rel_dev(analytic: [f64; 4], numeric: [f64; 4]) -> f64 {
    let scale = numeric.iter().map(|x| x.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let mut a = analytic;
    a.sort_by(f64::total_cmp);
    a.iter().zip(numeric).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max)
}

#[test]
fn criterion_07_analytic_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let j = scale * rng.random_range(0.01..1.0);
        let o1 = scale * rng.random_range(0.0..10.0);
        let d1 = scale * rng.random_range(-10.0..10.0);
        let d2 = scale * rng.random_range(-10.0..10.0);
        let phi = rng.random_range(-PI..PI);
        let det = build_detuning(&DetuningPair::new(d1, d2).unwrap());
        let n1 = eigh(&(build_case1(j, phi).unwrap() + det)).unwrap().values;
        worst = worst.max(rel_dev(analytic_case1(j, d1, d2, phi).as_array(), n1));
        let n2 = eigh(&(build_case2(j, o1, FRAC_PI_4).unwrap() + det)).unwrap().values;
        worst = worst.max(rel_dev(analytic_case2(j, o1, d1, d2).unwrap().as_array(), n2));
        let (c, s) = (2.0 * j * phi.cos(), 2.0 * j * phi.sin());
        worst = worst.max(rel_dev([c, -c, s, -s], eigh(&build_case1(j, phi).unwrap()).unwrap().values));
        let levels = final_case2(j, o1, phi).unwrap().map(|l| l.value);
        worst = worst.max(rel_dev(levels, eigh(&build_case2(j, o1, phi).unwrap()).unwrap().values));
    }
    let j = 1.7;
    let case1_flags = (-4..=4).all(|n| degenerate_pair(&analytic_case1(j, 0.0, 0.0, n as f64 * FRAC_PI_4)).is_some());
    let degenerate = |o1: f64, phi: f64| matches!(final_case2(j, o1, phi), Err(Error::Degenerate { .. }));
    let case2_flags = (-2..=2).all(|n| degenerate(3.0 * j, n as f64 * FRAC_PI_2)) && degenerate(2.0 * j, 0.0);
    check(
        "criterion 7 (analytic spectrum oracle)",
        worst < 1e-10 && case1_flags && case2_flags,
        format!(
            "1000 seeded draws, worst relative deviation {worst:.3e} (bound 1e-10); degeneracy flags case 1 {case1_flags}, case 2 {case2_flags}"
        ),
    );
}

#[test]
fn criterion_08_unitarity_and_linearity() {
    let c = StepControl::default();
    let schedules = [
        RampSchedule::case1(khz(2.1), DetuningPair::new(khz(120.0), khz(30.0)).unwrap(), khz(0.25), PI / 8.0).unwrap(),
        RampSchedule::case2(khz(2.0), khz(50.0), DetuningPair::new(khz(30.0), khz(10.0)).unwrap(), khz(0.2), FRAC_PI_4)
            .unwrap(),
        RampSchedule::rabi_controlled(khz(2.0), khz(3.8), khz(30.0), khz(0.6), FRAC_PI_4).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let (mut defect, mut linearity) = (0.0f64, 0.0f64);
    for s in &schedules {
        let amps: [C64; 4] = std::array::from_fn(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let psi = StateVector(amps).normalized().unwrap();
        let r = propagate_state(s, &c, &psi).unwrap();
        defect = defect.max(r.unitarity_defect);
        let mut sum = StateVector([C64::new(0.0, 0.0); 4]);
        for k in 0..4 {
            let rk = propagate_state(s, &c, &StateVector::basis(k).unwrap()).unwrap();
            defect = defect.max(rk.unitarity_defect);
            sum = sum.add(&rk.final_state.unwrap().scale(psi.0[k]));
        }
        linearity = linearity.max(sum.max_diff(&r.final_state.unwrap()));
    }
    let cd = propagate_with_cd(&RampSchedule::rabi_controlled(khz(2.0), khz(0.5), khz(80.0), khz(2.5), FRAC_PI_4).unwrap(), &c)
        .unwrap();
    defect = defect.max(cd.unitarity_defect);
    check(
        "criterion 8 (unitarity and linearity)",
        defect < 1e-9 && linearity < 1e-9,
        format!("worst unitarity defect {defect:.3e}, worst superposition error {linearity:.3e} (bounds 1e-9)"),
    );
}

#[test]
fn criterion_09_target_gate_identities() {
    let plus = target_gate(GateBranch::PlusQuarterPi);
    let minus = target_gate(GateBranch::MinusQuarterPi);
    let det = plus.matrix.matrix().det();
    let det_ok = (det - C64::new(1.0, 0.0)).norm() < 1e-12;
    let conj_ok = minus.matrix.matrix().max_diff(&plus.matrix.matrix().conj()) == 0.0;
    // the printed gate matrix, rows top to bottom
    let (o, i) = (C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let printed = [[o, -i, o, o], [-i, o, -o, o], [-o, i, o, o], [i, -o, -o, o]];
    let mut printed_ok = true;
    for r in 0..4 {
        for c in 0..4 {
            printed_ok &= plus.matrix.matrix()[(r, c)] == printed[r][c] / 2.0;
        }
    }
    let decorations = [(3, o), (1, -i), (2, o), (0, o)];
    let columns_ok = decorations
        .iter()
        .enumerate()
        .all(|(c, &(p, ph))| plus.matrix.matrix().column(c).max_diff(&fourier_state(p).unwrap().scale(ph)) == 0.0);
    check(
        "criterion 9 (target gate identities)",
        det_ok && conj_ok && printed_ok && columns_ok,
        format!("det = {det:.3e}, conj {conj_ok}, printed matrix {printed_ok}, column decorations {columns_ok}"),
    );
}

#[test]
fn criterion_10_ion_chain() {
    let u2 = equilibrium_positions(2).unwrap();
    let x2 = 0.25f64.powf(1.0 / 3.0);
    let u3 = equilibrium_positions(3).unwrap();
    let x3 = (5.0f64 / 4.0).powf(1.0 / 3.0);
    let eq_err = [(u2[0] + x2).abs(), (u2[1] - x2).abs(), (u3[0] + x3).abs(), u3[1].abs(), (u3[2] - x3).abs()]
        .into_iter()
        .fold(0.0, f64::max);

    let (wx, wz) = (khz(3000.0), khz(2000.0));
    let mass = 171.0 * constants::ATOMIC_MASS_UNIT;
    let k = 2.0 * PI * 2f64.sqrt() / 369.5e-9;
    let chain = IonChain::new(2, wx, wz, mass, k).unwrap();
    let rock = (wx * wx - wz * wz).sqrt();
    let mode_err = ((chain.mode_frequencies[0] - wx).abs() / wx).max((chain.mode_frequencies[1] - rock).abs() / wx);

    let (rabi, mu) = (khz(40.0), khz(2700.0));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut expect = 0.0;
    for (w, b) in [(wx, [h, h]), (rock, [h, -h])] {
        let eta = |bk: f64| bk * k * (constants::HBAR / (2.0 * mass * w * 1e3)).sqrt();
        expect += (eta(b[0]) * rabi) * (eta(b[1]) * rabi) * w / (mu * mu - w * w);
    }
    let j = effective_j(&chain, &DriveParams::new(rabi, mu, (0, 1), 2).unwrap()).unwrap().total;
    let j_err = (j - expect).abs() / expect.abs();
    let mut scale_err = 0.0f64;
    for decade in [0.1, 1.0, 10.0, 100.0] {
        let jd = effective_j(&chain, &DriveParams::new(rabi * decade, mu, (0, 1), 2).unwrap()).unwrap().total;
        scale_err = scale_err.max((jd / (j * decade * decade) - 1.0).abs());
    }
    check(
        "criterion 10 (ion-chain oracle)",
        eq_err < 1e-10 && mode_err < 1e-10 && j_err < 1e-12 && scale_err < 1e-12,
        format!(
            "equilibrium error {eq_err:.2e}, mode error {mode_err:.2e} (bounds 1e-10); J error {j_err:.2e}, Omega^2 scaling error {scale_err:.2e} (bounds 1e-12)"
        ),
    );
}

fn figure_csv(id: FigureId) -> Table {
    let dir = tempfile::tempdir().unwrap();
    let o = Overrides { out: Some(dir.path().to_path_buf()), ..Overrides::default() };
    let paths = run_figure(id, &o).unwrap();
    Table::parse(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap()
}

#[test]
fn figure_1_csv_endpoints() {
    let cols = ["lambda_plus_khz", "lambda_minus_khz", "mu_plus_khz", "mu_minus_khz"];
    let a = figure_csv(FigureId::F1a);
    let (c, s) = (4.2 * (PI / 8.0).cos(), 4.2 * (PI / 8.0).sin());
    let mut worst = 0.0f64;
    for (name, (start, end)) in cols.iter().zip([(150.0, c), (-150.0, -c), (90.0, s), (-90.0, -s)]) {
        let v = a.column(name).unwrap();
        worst = worst.max((v[0] - start).abs()).max((v.last().unwrap() - end).abs());
    }
    let b = figure_csv(FigureId::F1b);
    let end: Vec<f64> = cols.iter().map(|n| *b.column(n).unwrap().last().unwrap()).collect();
    let split = 2.0 * 2f64.sqrt() * 2.1;
    let b_err = (end[0] - end[2] - split).abs().max((end[3] - end[1] - split).abs());
    check(
        "figure 1 CSV endpoints",
        worst < 1e-9 && b_err < 1e-9,
        format!("(a) worst endpoint error {worst:.2e} kHz; (b) end splitting error {b_err:.2e} kHz"),
    );
}

#[test]
fn figure_3_csv_arguments() {
    let t = figure_csv(FigureId::F3);
    let target = [0.0, -FRAC_PI_2, PI, FRAC_PI_2];
    let mut worst = 0.0f64;
    for (name, want) in ["arg_dd", "arg_du", "arg_ud", "arg_uu"].iter().zip(target) {
        let got = *t.column(name).unwrap().last().unwrap();
        worst = worst.max(wrap(got - want).abs());
    }
    check("figure 3 CSV arguments", worst < 0.02, format!("worst final argument error {worst:.3e} rad (bound 0.02)"));
}

#[test]
fn figure_4a_csv_final_infidelity() {
    let t = figure_csv(FigureId::F4a);
    let inf = *t.column("infidelity").unwrap().last().unwrap();
    check("figure 4a CSV final infidelity", inf <= 1e-3, format!("final row 1-F = {inf:.3e} (bound 1e-3)"));
}
