use std::f64::consts::PI;

use gbeam::spectral::{
    check_resolution, energy_of_state, forward_dft, inverse_dft, propagate, propagate_checked, read_state,
    spectral_gradient, write_state, GridField2D, WaveState2D,
};
use gbeam::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn state(u: GridField2D, ut: GridField2D) -> WaveState2D {
    WaveState2D::new(u, ut, 0.0).unwrap()
}

/// Band-limited state from a handful of seeded modes.
fn random_state(seed: u64, n: usize, l: f64) -> WaveState2D {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let modes: Vec<(f64, f64, Complex64, Complex64)> = (0..6)
        .map(|_| {
            let a = (next() * 6.0).round();
            let b = (next() * 6.0).round();
            (a, b, Complex64::new(next(), next()), Complex64::new(next(), next()))
        })
        .collect();
    let w = 2.0 * PI / l;
    let field = |pick: usize| {
        let modes = modes.clone();
        GridField2D::from_fn(n, l, move |x1, x2| {
            modes
                .iter()
                .map(|&(a, b, p, q)| (if pick == 0 { p } else { q }) * Complex64::new(0.0, w * (a * x1 + b * x2)).exp())
                .sum()
        })
        .unwrap()
    };
    state(field(0), field(1))
}

#[test]
fn single_mode_cosine_vanishes_at_quarter_period() {
    let l = 4.0;
    let u = GridField2D::from_fn(32, l, |x1, _| Complex64::new(0.0, PI * x1 / 2.0).exp()).unwrap();
    let s = state(u, GridField2D::zeros(32, l).unwrap());
    let out = propagate(&s, 1.0);
    assert!(out.u.max_abs() < 1e-12);
    // u_t = -w sin(w t) e^{...} with w = pi / 2.
    let want = GridField2D::from_fn(32, l, |x1, _| Complex64::new(0.0, PI * x1 / 2.0).exp() * (-PI / 2.0)).unwrap();
    assert!(out.ut.max_abs_diff(&want).unwrap() < 1e-12);
    assert_eq!(out.t, 1.0);
}

#[test]
fn zero_mode_moves_linearly() {
    let (n, l) = (16, 4.0);
    let u = GridField2D::from_fn(n, l, |_, _| Complex64::new(1.5, -0.5)).unwrap();
    let ut = GridField2D::from_fn(n, l, |_, _| Complex64::new(0.25, 2.0)).unwrap();
    let out = propagate(&state(u, ut.clone()), 0.8);
    let want = Complex64::new(1.5, -0.5) + Complex64::new(0.25, 2.0) * 0.8;
    assert!(out.u.values.iter().all(|v| (v - want).norm() < 1e-13));
    assert!(out.ut.max_abs_diff(&ut).unwrap() < 1e-13);
}

#[test]
fn propagation_is_reversible() {
    let s = random_state(7, 64, 4.0);
    let back = propagate(&propagate(&s, 0.7), 0.0);
    assert!(back.u.max_abs_diff(&s.u).unwrap() < 1e-12);
    assert!(back.ut.max_abs_diff(&s.ut).unwrap() < 1e-12);
}

#[test]
fn gradients_of_simple_fields() {
    let l = 4.0;
    let f = GridField2D::from_fn(32, l, |x1, _| Complex64::new(0.0, PI * x1 / 2.0).exp()).unwrap();
    let (fx, fy) = spectral_gradient(&f);
    let want = GridField2D::from_fn(32, l, |x1, _| Complex64::new(0.0, PI / 2.0) * Complex64::new(0.0, PI * x1 / 2.0).exp()).unwrap();
    assert!(fx.max_abs_diff(&want).unwrap() < 1e-12);
    assert!(fy.max_abs() < 1e-12);

    let k = GridField2D::from_fn(16, l, |_, _| c(3.0)).unwrap();
    let (kx, ky) = spectral_gradient(&k);
    assert!(kx.max_abs() < 1e-13 && ky.max_abs() < 1e-13);

    let w = 2.0 * PI / l;
    let g = GridField2D::from_fn(64, l, |x1, x2| c((w * x1).sin() * (w * x2).cos())).unwrap();
    let (gx, gy) = spectral_gradient(&g);
    let wx = GridField2D::from_fn(64, l, |x1, x2| c(w * (w * x1).cos() * (w * x2).cos())).unwrap();
    let wy = GridField2D::from_fn(64, l, |x1, x2| c(-w * (w * x1).sin() * (w * x2).sin())).unwrap();
    assert!(gx.max_abs_diff(&wx).unwrap() < 1e-11);
    assert!(gy.max_abs_diff(&wy).unwrap() < 1e-11);
}

#[test]
fn energy_of_known_states() {
    let l = 2.0 * PI;
    let u = GridField2D::from_fn(32, l, |x1, _| c(x1.sin())).unwrap();
    let e = energy_of_state(&state(u, GridField2D::zeros(32, l).unwrap()), 1.0).unwrap();
    assert!((e.sqrt() - PI).abs() < 1e-12);

    let ut = GridField2D::from_fn(16, 4.0, |_, _| c(1.0)).unwrap();
    let e = energy_of_state(&state(GridField2D::zeros(16, 4.0).unwrap(), ut), 1.0).unwrap();
    assert!((e - 8.0).abs() < 1e-12);
    assert!(energy_of_state(&state(GridField2D::zeros(16, 4.0).unwrap(), GridField2D::zeros(16, 4.0).unwrap()), 0.0).is_err());
}

#[test]
fn dft_round_trip() {
    let s = random_state(3, 128, 4.0);
    let modes = forward_dft(&s.u);
    let back = inverse_dft(&modes, 128, 4.0).unwrap();
    assert!(back.max_abs_diff(&s.u).unwrap() < 1e-13);
}

#[test]
fn resolution_guard_blocks_coarse_grids() {
    let s = random_state(1, 64, 4.0);
    let err = propagate_checked(&s, 0.2, 100.0).unwrap_err();
    assert!(matches!(err, Error::ResolutionTooLow { grid: 64, .. }));
    assert!(propagate_checked(&s, 0.2, 20.0).is_ok());
    assert!(check_resolution(80.0, 512, 4.0).is_ok());
}

#[test]
fn dump_round_trip() {
    let s = random_state(11, 16, 4.0);
    let s = WaveState2D { t: 0.35, ..s };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    write_state(&path, &s).unwrap();
    let back = read_state(&path).unwrap();
    assert_eq!((back.grid(), back.box_side(), back.t), (16, 4.0, 0.35));
    assert!(back.u.max_abs_diff(&s.u).unwrap() < 1e-5 * s.u.max_abs());
    assert!(back.ut.max_abs_diff(&s.ut).unwrap() < 1e-5 * s.ut.max_abs());
    std::fs::write(&path, b"garbage").unwrap();
    assert!(read_state(&path).is_err());
}

#[test]
fn mismatched_states_are_rejected() {
    assert!(WaveState2D::new(GridField2D::zeros(8, 1.0).unwrap(), GridField2D::zeros(16, 1.0).unwrap(), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_is_conserved(seed in 0u64..1000, t in prop::sample::select(vec![0.3, 0.8, -0.45])) {
        let s = random_state(seed, 32, 4.0);
        let e0 = energy_of_state(&s, 1.0).unwrap();
        let e1 = energy_of_state(&propagate(&s, t), 1.0).unwrap();
        prop_assert!((e1 - e0).abs() <= 1e-10 * e0);
    }

    #[test]
    fn propagation_composes(seed in 0u64..1000, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let s = random_state(seed, 16, 4.0);
        let two = propagate(&propagate(&s, a), a + b);
        let one = propagate(&s, a + b);
        prop_assert!(two.u.max_abs_diff(&one.u).unwrap() < 1e-11);
    }
}
