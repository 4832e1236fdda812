use circulant_core::dynamics::{propagate, RampSchedule, StepControl};
use circulant_core::hamiltonian::build_rabi_controlled;
use circulant_core::iontrap::{
    dispersive_margin, effective_j, equilibrium_positions, lamb_dicke, DriveParams, IonChain,
};
use circulant_core::linalg::C64;
use circulant_core::sta::{
    cd_rate, eigenbasis_at, h3_eigenbasis, propagate_with_cd, propagate_with_cd_gain, transport_infidelities, H3Branch,
};
use circulant_core::units::{constants, khz, to_khz};
use circulant_core::Error;
use std::f64::consts::{FRAC_PI_4, PI};

fn fig6(w: f64, j0: f64) -> RampSchedule {
    RampSchedule::rabi_controlled(khz(j0), khz(0.5), khz(80.0), khz(w), FRAC_PI_4).unwrap()
}

#[test]
fn cd_transport_exact_across_two_decades() {
    let tol = 1e-9;
    for w in [0.1, 1.0, 10.0] {
        let s = fig6(w, 2.0);
        let r = propagate_with_cd(&s, &StepControl::with_tolerance(tol)).unwrap();
        let inf = transport_infidelities(&s, &r.propagator).unwrap();
        for x in inf {
            assert!(x <= 10.0 * tol, "w = {w}: {inf:?}");
        }
    }
}

#[test]
fn cd_gain_zero_is_plain_propagation() {
    let s = fig6(2.5, 2.0);
    let c = StepControl::default();
    let a = propagate_with_cd_gain(&s, &c, 0.0).unwrap();
    let b = propagate(&s, &c).unwrap();
    assert!(a.propagator.matrix().max_diff(b.propagator.matrix()) < 1e-14);
}

#[test]
fn cd_tolerance_halving() {
    let s = fig6(2.5, 2.0);
    let tol = 1e-7;
    let a = propagate_with_cd(&s, &StepControl::with_tolerance(tol)).unwrap();
    let b = propagate_with_cd(&s, &StepControl::with_tolerance(tol / 2.0)).unwrap();
    assert!(a.propagator.matrix().max_diff(b.propagator.matrix()) < tol);
}

#[test]
fn cd_field_not_exact_off_quarter_pi() {
    let s = RampSchedule::rabi_controlled(khz(2.0), khz(0.5), khz(80.0), khz(2.5), PI / 8.0).unwrap();
    let r = propagate_with_cd(&s, &StepControl::default()).unwrap();
    let worst = transport_infidelities(&s, &r.propagator).unwrap().into_iter().fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn cd_rate_is_mixing_angle_derivative() {
    let (j0, v0, w) = (khz(2.0), khz(0.5), khz(2.5));
    let t_max = PI / (2.0 * w);
    // angle between the coupling and drive axes, complementary to ξ
    let angle = |t: f64| {
        let s2 = (w * t).sin().powi(2);
        (j0 * s2).atan2(j0 + v0 * (1.0 - s2))
    };
    for k in 1..20 {
        let t = t_max * k as f64 / 20.0;
        let h = 1e-6 * t_max;
        let fd = (angle(t + h) - angle(t - h)) / (2.0 * h);
        let r = cd_rate(t, j0, v0, w);
        assert!((fd - r).abs() <= 1e-6 * r.abs(), "t = {t}: {fd} vs {r}");
    }
}

#[test]
fn cd_profile_single_extremum() {
    for (w, j0) in [(2.5, 2.0), (1.8, 1.5), (1.2, 1.0)] {
        let (j0, v0, w) = (khz(j0), khz(0.5), khz(w));
        let t_max = PI / (2.0 * w);
        let v: Vec<f64> = (0..=400).map(|k| cd_rate(t_max * k as f64 / 400.0, j0, v0, w)).collect();
        assert_eq!(v[0], 0.0);
        assert!(v[400].abs() < 1e-9 * v.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        assert!(v[1..400].iter().all(|&x| x > 0.0));
        let peaks = v.windows(3).filter(|x| x[1] > x[0] && x[1] > x[2]).count();
        assert_eq!(peaks, 1);
    }
}

#[test]
fn eigenbasis_residuals_and_limits() {
    for &(j, o1, o2, phi) in &[(0.3, 5.0, 2.0, 0.2), (2.0, 30.0, 2.0, FRAC_PI_4), (1.0, -3.0, 4.0, -1.0)] {
        let e = h3_eigenbasis(j, o1, o2, phi).unwrap();
        let h = build_rabi_controlled(j, o1, o2, phi).unwrap();
        let norm = h.matrix().frobenius();
        for b in H3Branch::ALL {
            let v = e.vector(b);
            assert!(h.matrix().apply(v).max_diff(&v.scale(C64::new(e.value(b), 0.0))) < 1e-12 * norm);
        }
    }
    let s = fig6(2.5, 2.0);
    assert!(eigenbasis_at(&s, 0.0).is_ok());
    assert!(eigenbasis_at(&s, 2.0 * s.t_max).is_err());
}

fn yb(n: usize, wx_khz: f64, wz_khz: f64) -> IonChain {
    let k = 2.0 * PI * 2f64.sqrt() / 369.5e-9;
    IonChain::new(n, khz(wx_khz), khz(wz_khz), 171.0 * constants::ATOMIC_MASS_UNIT, k).unwrap()
}

#[test]
fn equilibrium_is_stationary_and_symmetric() {
    for n in 2..=20 {
        let u = equilibrium_positions(n).unwrap();
        for m in 0..n {
            let mut f = u[m];
            for p in 0..n {
                if p != m {
                    let d = u[m] - u[p];
                    f -= d.signum() / (d * d);
                }
            }
            assert!(f.abs() < 1e-10, "n = {n}");
            assert!((u[m] + u[n - 1 - m]).abs() < 1e-10);
        }
    }
}

#[test]
fn modes_orthonormal_with_com_on_top() {
    let c = yb(8, 3000.0, 300.0);
    for a in 0..8 {
        for b in 0..8 {
            let dot: f64 = (0..8).map(|k| c.modes[k][a] * c.modes[k][b]).sum();
            assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
    assert!((c.mode_frequencies[0] / c.omega_x - 1.0).abs() < 1e-12);
    assert!(c.mode_frequencies.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn zigzag_threshold() {
    let k = 1.0;
    let m = 171.0 * constants::ATOMIC_MASS_UNIT;
    assert!(IonChain::new(10, khz(3000.0), khz(300.0), m, k).is_ok());
    assert!(matches!(IonChain::new(10, khz(3000.0), khz(1500.0), m, k), Err(Error::Instability(_))));
}

#[test]
fn lamb_dicke_scaling() {
    let c = yb(2, 3000.0, 2000.0);
    let eta = lamb_dicke(&c, 0, 0).unwrap();
    let b = c.modes[0][0];
    assert!((eta / b - 0.0755).abs() < 0.001, "{}", eta / b);
    let mut faster = c.clone();
    faster.mode_frequencies[0] *= 2.0;
    let ratio = lamb_dicke(&faster, 0, 0).unwrap() / eta;
    assert!((ratio - 0.5f64.sqrt()).abs() < 1e-14);
    let mut zeroed = c.clone();
    zeroed.modes[0][0] = 0.0;
    assert_eq!(lamb_dicke(&zeroed, 0, 0).unwrap(), 0.0);
    assert!(lamb_dicke(&c, 2, 0).is_err());
}

#[test]
fn two_ion_coupling_signs() {
    let c = yb(2, 3000.0, 2000.0);
    let (com, rock) = (c.mode_frequencies[0], c.mode_frequencies[1]);
    let above = DriveParams::new(khz(50.0), 1.1 * com, (0, 1), 2).unwrap();
    let j = effective_j(&c, &above).unwrap();
    assert!(j.per_mode[0] > 0.0 && j.per_mode[1] < 0.0);
    let between = DriveParams::new(khz(50.0), 0.5 * (com + rock), (0, 1), 2).unwrap();
    let j = effective_j(&c, &between).unwrap();
    assert!(j.per_mode[0] < 0.0 && j.per_mode[1] < 0.0);
    assert!(j.total < 0.0);
    // outside the band the two terms have opposite signs and J > 0; J only
    // changes sign through the mode poles
    let jf = |mu: f64| effective_j(&c, &DriveParams::new(khz(50.0), mu, (0, 1), 2).unwrap()).unwrap().total;
    let below = 0.9 * rock;
    let jb = effective_j(&c, &DriveParams::new(khz(50.0), below, (0, 1), 2).unwrap()).unwrap();
    assert!(jb.per_mode[0] < 0.0 && jb.per_mode[1] > 0.0 && jb.total > 0.0);
    for k in 1..200 {
        let x = k as f64 / 200.0;
        assert!(jf(com * (1.0 + 2.0 * x)) > 0.0);
        assert!(jf(rock + x * (com - rock)) < 0.0);
        assert!(jf(rock * x) > 0.0);
    }
}

#[test]
fn realistic_two_ion_margin() {
    let c = yb(2, 3000.0, 2000.0);
    let mu = 0.5 * (c.mode_frequencies[0] + c.mode_frequencies[1]);
    let unit = DriveParams::new(khz(1.0), mu, (0, 1), 2).unwrap();
    let j1 = effective_j(&c, &unit).unwrap().total;
    let rabi = khz(1.0) * (khz(2.0) / j1.abs()).sqrt();
    let d = DriveParams::new(rabi, mu, (0, 1), 2).unwrap();
    let j = effective_j(&c, &d).unwrap().total;
    assert!((to_khz(j.abs()) - 2.0).abs() < 1e-9);
    assert!(dispersive_margin(&c, &d).unwrap() > 10.0);
}

#[test]
fn constructed_margin() {
    let c = yb(2, 3000.0, 2000.0);
    let w = c.mode_frequencies[1];
    let mu = 1.05 * w;
    let g_per_rabi = (0..2)
        .flat_map(|ion| (0..2).map(move |n| (ion, n)))
        .map(|(ion, n)| ((c.mode_frequencies[n] - mu).abs(), lamb_dicke(&c, ion, n).unwrap().abs()))
        .fold(f64::INFINITY, |m, (gap, eta)| m.min(gap / eta));
    let rabi = g_per_rabi;
    let d = DriveParams::new(rabi, mu, (0, 1), 2).unwrap();
    assert!((dispersive_margin(&c, &d).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn two_ion_hand_computation() {
    let (wx, wz) = (khz(3000.0), khz(2000.0));
    let c = yb(2, 3000.0, 2000.0);
    assert!((c.mode_frequencies[0] - wx).abs() < 1e-10 * wx);
    assert!((c.mode_frequencies[1] - (wx * wx - wz * wz).sqrt()).abs() < 1e-10 * wx);
    let mass = 171.0 * constants::ATOMIC_MASS_UNIT;
    let k = 2.0 * PI * 2f64.sqrt() / 369.5e-9;
    let (rabi, mu) = (khz(40.0), khz(2700.0));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let modes = [(wx, [h, h]), ((wx * wx - wz * wz).sqrt(), [h, -h])];
    let mut expect = 0.0;
    for (w, b) in modes {
        let eta0 = b[0] * k * (constants::HBAR / (2.0 * mass * w * 1e3)).sqrt();
        let eta1 = b[1] * k * (constants::HBAR / (2.0 * mass * w * 1e3)).sqrt();
        expect += (eta0 * rabi) * (eta1 * rabi) * w / (mu * mu - w * w);
    }
    let j = effective_j(&c, &DriveParams::new(rabi, mu, (0, 1), 2).unwrap()).unwrap();
    assert!((j.total - expect).abs() < 1e-12 * expect.abs());
}
