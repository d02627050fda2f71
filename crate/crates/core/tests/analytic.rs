use std::f64::consts::PI;

use gbeam::analytic::annulus::AnnulusFamily;
use gbeam::analytic::oracles::{closed_form, closed_form_gradient, oracle_manifold};
use gbeam::analytic::{
    manifold_from_example, AnnulusExample, AnyManifold, Branch, ExampleSpec, OracleDims, OracleId, Radial3dExample,
    SphericalExample,
};
use gbeam::beam::{propagate_hessian, ComplexSymMatrix, HamiltonianModel, PhaseSpacePoint, RealVector};
use gbeam::quadrature::{gauss_legendre_nodes, QuadratureSpec};
use gbeam::superposition::{integrate_superposition, BeamFamily, Want};
use gbeam::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn fixed(panels: Vec<usize>, order: Vec<usize>) -> QuadratureSpec {
    QuadratureSpec::new(panels, order, 1e-8, 0).unwrap()
}

/// Composite Gauss-Legendre sum of `f` over `[a, b]`.
fn gl_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre_nodes(10).unwrap();
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * h / 2.0 * f(c + xi * h / 2.0);
        }
    }
    s
}

#[test]
fn spherical_exact_matches_difference_quotient_near_origin() {
    let ex = SphericalExample::new(100.0).unwrap();
    let f = |x: f64| Complex64::new(-100.0 * x * x / 2.0, -100.0 * x).exp() / 100.0;
    let t = 0.5;
    // Difference quotients converge to the limit like r^2; one Richardson
    // step removes that term.
    let limit = ex.exact(1e-7, t);
    let d = |r: f64| (f(t - r) - f(t + r)) / r;
    let mut prev = f64::INFINITY;
    for &r in &[1e-2, 3e-3, 1e-3] {
        let err = (d(r) - limit).norm() / limit.norm();
        assert!(err < prev);
        prev = err;
    }
    let r = 1e-3;
    let extrapolated = (4.0 * d(r / 2.0) - d(r)) / 3.0;
    let rel = (extrapolated - limit).norm() / limit.norm();
    assert!(rel < 1e-6, "{rel}");
}

#[test]
fn spherical_initial_identity_over_radii() {
    for &k in &[40.0, 160.0] {
        let ex = SphericalExample::new(k).unwrap();
        let q = QuadratureSpec::uniform(1, 8, 8).with_tolerance(1e-10, 6);
        for i in 0..=20 {
            let r = 0.1 * i as f64;
            let got = ex.superposition(r, 0.0, &q).unwrap();
            let want = ex.exact(r, 0.0);
            assert!((got - want).norm() < 1e-8, "k = {k}, r = {r}: {got} vs {want}");
        }
    }
}

#[test]
fn spherical_engine_agrees_with_reduced_integral() {
    let k = 20.0;
    let ex = SphericalExample::new(k).unwrap();
    let fam = ex.family();
    let quad = fixed(vec![24, 48], vec![8, 8]);
    let t = 0.5;
    let targets: Vec<RealVector<3>> = vec![
        RealVector::<3>::new(0.0, 0.0, 0.0),
        RealVector::<3>::new(0.3, 0.1, -0.2),
        RealVector::<3>::new(0.0, 0.5, 0.0),
        RealVector::<3>::new(-0.4, 0.2, 0.35),
    ];
    let res = integrate_superposition(&fam, t, k, &targets, &quad, Want::ALL).unwrap();
    let rq = QuadratureSpec::uniform(1, 16, 8).with_tolerance(1e-12, 6);
    for (i, x) in targets.iter().enumerate() {
        let r = x.norm();
        let jet = ex.superposition_jet(r, t, &rq).unwrap();
        assert!((res.values[i] - jet.u).norm() < 1e-9, "value at {x:?}");
        let dt = res.dt_values.as_ref().unwrap()[i];
        assert!((dt - jet.ut).norm() < 1e-8, "dt at {x:?}: {dt} vs {}", jet.ut);
        if r > 0.0 {
            let g = res.grad_values.as_ref().unwrap()[i];
            let radial: Complex64 = (0..3).map(|j| g[j] * (x[j] / r)).sum();
            assert!((radial - jet.ur).norm() < 1e-8, "ur at {x:?}");
        }
    }
}

#[test]
fn spherical_pointwise_error_decays_near_the_peak() {
    // Brute-force sweep over r in [t - 0.2, t + 0.2]; the pointwise error
    // relative to the local peak shrinks as k grows.
    let t = 0.5;
    let mut errs = Vec::new();
    for &k in &[80.0, 160.0] {
        let ex = SphericalExample::new(k).unwrap();
        let q = QuadratureSpec::uniform(1, 64, 8).with_tolerance(1e-10, 4);
        let mut e = 0.0f64;
        for i in 0..=80 {
            let r = t - 0.2 + 0.005 * i as f64;
            e = e.max((ex.superposition(r, t, &q).unwrap() - ex.exact(r, t)).norm());
        }
        errs.push(e);
    }
    // Amplitude near r = t is O(1/k); the error ratio is at least the
    // first-order gain.
    assert!(errs[1] < errs[0] * 0.75, "{errs:?}");
}

#[test]
fn radial3d_focus_errors_match_reference_points() {
    let quad = fixed(vec![80, 80], vec![5, 5]);
    for &(k, t, want) in &[(320.0, 0.4, 0.109724), (640.0, 0.55, 0.0420894)] {
        let ex = Radial3dExample::new(k, 0.1, 1.0).unwrap();
        let ugb = ex.superposition(0.0, t, &quad).unwrap();
        let u = ex.exact(0.0, t);
        let rel = (u - ugb).norm() / ugb.norm();
        assert!((rel - want).abs() <= 0.05 * want, "k = {k}, t = {t}: {rel} vs {want}");
    }
}

#[test]
fn radial3d_engine_is_radially_symmetric_and_matches_reduced_form() {
    let k = 20.0;
    let t = 0.3;
    let ex = Radial3dExample::new(k, 0.1, 1.0).unwrap();
    let quad = fixed(vec![8, 16, 32], vec![6, 6, 6]);
    let mut targets = Vec::new();
    for i in 0..5 {
        let r = 0.1 + 0.15 * i as f64;
        targets.push(RealVector::<3>::new(r, 0.0, 0.0));
        let a = 0.7 + i as f64;
        targets.push(RealVector::<3>::new(r * a.sin() * 0.6, r * a.cos() * 0.6, r * 0.8));
    }
    let minus = integrate_superposition(&ex.family(Branch::Minus), t, k, &targets, &quad, Want::VALUE).unwrap();
    let plus = integrate_superposition(&ex.family(Branch::Plus), t, k, &targets, &quad, Want::VALUE).unwrap();
    let rq = QuadratureSpec::uniform(2, 8, 8).with_tolerance(1e-10, 5);
    for i in 0..5 {
        let a = minus.values[2 * i] + plus.values[2 * i];
        let b = minus.values[2 * i + 1] + plus.values[2 * i + 1];
        assert!((a - b).norm() < 1e-7, "pair {i}: {a} vs {b}");
        let red = ex.superposition(targets[2 * i].norm(), t, &rq).unwrap();
        assert!((a - red).norm() < 1e-7, "reduced {i}: {a} vs {red}");
    }
}

#[test]
fn radial3d_hessian_matches_riccati_integration() {
    let ex = Radial3dExample::new(50.0, 0.1, 1.0).unwrap();
    let omega = RealVector::<3>::new(0.36, 0.48, 0.8);
    let s = 0.6;
    let b0 = ex.beam(Branch::Minus, s, &omega, 0.0, false).unwrap().unwrap();
    let start = PhaseSpacePoint::from_vectors(b0.phase.center, b0.phase.momentum);
    let hist = propagate_hessian(&HamiltonianModel::minus(1.0), &start, &b0.phase.hessian, 0.5, 1e-3).unwrap();
    for (t, m) in hist.iter().step_by(100) {
        let b = ex.beam(Branch::Minus, s, &omega, *t, false).unwrap().unwrap();
        assert!(b.phase.hessian.max_abs_diff(m) < 1e-8, "t = {t}");
    }
}

#[test]
fn annulus_hessian_matches_riccati_integration() {
    let ex = AnnulusExample::standard(80.0).unwrap();
    let (th, s) = (1.1, 0.4);
    let (p0, _) = ex.beam(th, s, 0.0).unwrap();
    let start = PhaseSpacePoint::from_vectors(p0.center, p0.momentum);
    let hist = propagate_hessian(&HamiltonianModel::plus(1.0), &start, &p0.hessian, 1.0, 1e-3).unwrap();
    for (t, m) in hist.iter().step_by(125) {
        let (p, _) = ex.beam(th, s, *t).unwrap();
        assert!(p.hessian.max_abs_diff(m) < 1e-8, "t = {t}");
    }
}

#[test]
fn annulus_central_ray_phase_and_rate() {
    let ex = AnnulusExample::standard(40.0).unwrap();
    for &(th, s, t) in &[(0.3, 0.5, 0.0), (2.0, 0.3, 0.7), (5.5, 0.7, 1.4)] {
        let b = ex.beam_sample(th, s, t, false, true).unwrap();
        let x = b.phase.center;
        assert!((b.phase.value(&x) - Complex64::new(s - th, 0.0)).norm() < 1e-14);
        let rate = b.phase_rate(&x).unwrap();
        assert!((rate - Complex64::new(-1.0, 0.0)).norm() < 1e-10);
        let fam = ex.family();
        let z = [th, s];
        let scaled = fam.sample(&z, t, false).unwrap().unwrap();
        assert!((scaled.amplitude * 2.0 * PI - b.amplitude).norm() < 1e-15);
        assert_eq!(ex.beam(th, s, 0.0).unwrap().1.im, 0.0);
    }
}

#[test]
fn annulus_rotation_covariance() {
    let ex = AnnulusExample::standard(12.0).unwrap();
    let quad = ex.default_quadrature();
    let alpha = PI / 3.0;
    let rot = gbeam::analytic::annulus::rotation(alpha);
    let pts = vec![RealVector::<2>::new(0.9, 0.2), RealVector::<2>::new(-0.3, 1.05), RealVector::<2>::new(0.1, -0.6)];
    let turned: Vec<_> = pts.iter().map(|p| rot * p).collect();
    let t = 0.4;
    let (a, _, _) = ex.superposition_points(&pts, t, &quad, Want::VALUE).unwrap();
    let (b, _, _) = ex.superposition_points(&turned, t, &quad, Want::VALUE).unwrap();
    let phase = Complex64::new(0.0, -ex.k * alpha).exp();
    for i in 0..pts.len() {
        assert!((b[i] - a[i] * phase).norm() < 1e-7, "{i}: {} vs {}", b[i], a[i] * phase);
    }
}

#[test]
fn annulus_far_field_is_negligible() {
    // Beam centres satisfy |x0| <= 1.25 on the support, so the far ring sits
    // about 0.66 away: exp(-160 * 0.66^2 / 2) is far below 1e-8.
    let ex = AnnulusExample::standard(160.0).unwrap();
    let quad = ex.default_quadrature();
    let near: Vec<f64> = (0..40).map(|i| 0.7 + 0.01 * i as f64).collect();
    let far = [2.0f64.sqrt() + 0.5, 2.3, 2.7];
    let (gn, _, _) = ex.radial_profile(&near, 0.0, &quad, Want::VALUE).unwrap();
    let (gf, _, _) = ex.radial_profile(&far, 0.0, &quad, Want::VALUE).unwrap();
    let sup = gn.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in gf {
        assert!(v.norm() < 1e-8 * sup, "{} vs {sup}", v.norm());
    }
}

#[test]
fn annulus_grid_uses_rotational_covariance_consistently() {
    let ex = AnnulusExample::standard(8.0).unwrap();
    let quad = ex.default_quadrature();
    let k = 16;
    let grid = ex.grid_fields(k, 0.3, &quad, Want::VALUE_DT).unwrap();
    let h = ex.box_side / k as f64;
    let picks = [(3usize, 11usize), (9, 2), (12, 12), (8, 5)];
    let pts: Vec<_> = picks
        .iter()
        .map(|&(i, j)| RealVector::<2>::new(h * (i as f64 - 8.0), h * (j as f64 - 8.0)))
        .collect();
    let (u, ut, _) = ex.superposition_points(&pts, 0.3, &quad, Want::VALUE_DT).unwrap();
    let ut = ut.unwrap();
    for (n, &(i, j)) in picks.iter().enumerate() {
        assert!((grid.u[i * k + j] - u[n]).norm() < 1e-7);
        assert!((grid.ut.as_ref().unwrap()[i * k + j] - ut[n]).norm() < 1e-6);
    }
}

#[test]
fn annulus_plus_branch_is_optional_and_adds() {
    let base = AnnulusExample::standard(10.0).unwrap();
    let both = AnnulusExample { include_plus_branch: true, ..base };
    let quad = base.default_quadrature();
    let pts = [RealVector::<2>::new(0.8, 0.4)];
    let (a, _, _) = base.superposition_points(&pts, 0.5, &quad, Want::VALUE).unwrap();
    let (b, _, _) = both.superposition_points(&pts, 0.5, &quad, Want::VALUE).unwrap();
    let plus = integrate_superposition(&AnnulusFamily::plus(base), 0.5, 10.0, &pts, &quad, Want::VALUE).unwrap();
    assert!((b[0] - a[0] - plus.values[0]).norm() < 1e-12);
    // The same sum through the generic manifold.
    let AnyManifold::D2(m) = manifold_from_example(&ExampleSpec::Annulus(both)).unwrap() else {
        panic!("annulus is two-dimensional")
    };
    let q2 = QuadratureSpec::new(vec![quad.panels[0], 2 * quad.panels[1]], quad.order.clone(), 1e-8, 3).unwrap();
    let c = integrate_superposition(&m, 0.5, 10.0, &pts, &q2, Want::VALUE).unwrap();
    assert!((c.values[0] - b[0]).norm() < 1e-7);
}

#[test]
fn manifold_descriptions() {
    let m = manifold_from_example(&ExampleSpec::by_name("annulus", 16.0, 2).unwrap()).unwrap();
    assert_eq!((m.spatial_dim(), m.dim_m()), (2, 2));
    assert_eq!(m.param_box(), &[(0.0, 2.0 * PI), (0.0, 1.0)]);
    let AnyManifold::D2(a) = m else { unreachable!() };
    assert!((a.weight(&[1.0, 0.3]) - 0.7).abs() < 1e-15);

    let m = manifold_from_example(&ExampleSpec::by_name("spherical", 16.0, 3).unwrap()).unwrap();
    let AnyManifold::D3(s) = m else { panic!() };
    assert_eq!(s.dim_m, 2);
    let z = [0.7, 2.0];
    assert!((s.weight(&z) - 0.7f64.sin()).abs() < 1e-15);
    let b = s.initial(&z).unwrap().unwrap();
    assert_eq!(b.phase.center, RealVector::<3>::zeros());
    assert!((b.phase.momentum.norm() - 1.0).abs() < 1e-15);

    let m = manifold_from_example(&ExampleSpec::by_name("e1-flat", 16.0, 2).unwrap()).unwrap();
    let AnyManifold::D2(f) = m else { panic!() };
    let b = f.initial(&[0.3, -0.2]).unwrap().unwrap();
    assert_eq!(b.phase.center, RealVector::<2>::zeros());
    assert_eq!(b.phase.momentum, RealVector::<2>::new(0.3, -0.2));

    let m = manifold_from_example(&ExampleSpec::by_name("radial3d", 16.0, 3).unwrap()).unwrap();
    assert_eq!((m.spatial_dim(), m.dim_m()), (3, 3));

    assert!(matches!(ExampleSpec::by_name("bogus", 1.0, 1), Err(Error::UnknownExample(_))));
}

#[test]
fn e5_engine_value_at_origin() {
    let dims = OracleDims { d: 1, m: 1, r: 0 };
    let m = oracle_manifold::<1>(OracleId::E5Gaussian, dims).unwrap();
    let q = QuadratureSpec::uniform(1, 16, 8).with_tolerance(1e-10, 3);
    let res = integrate_superposition(&m, 0.0, 4.0, &[RealVector::<1>::zeros()], &q, Want::VALUE).unwrap();
    assert!((res.values[0] - Complex64::new(2.24200, 0.0)).norm() < 1e-5);
    assert!((res.values[0] - Complex64::new(2.0 * (2.0 * PI / 5.0).sqrt(), 0.0)).norm() < 1e-6);
}

fn sample_points<const D: usize>(n: usize, spread: f64) -> Vec<RealVector<D>> {
    (0..n)
        .map(|i| RealVector::<D>::from_fn(|j, _| spread * ((i * (j + 3)) as f64 * 0.61803 + j as f64 * 0.3).sin()))
        .collect()
}

fn engine_vs_closed_form<const D: usize>(id: OracleId, dims: OracleDims, k: f64, panels: usize) {
    let m = oracle_manifold::<D>(id, dims).unwrap();
    let q = QuadratureSpec::uniform(dims.m, panels, 8).with_tolerance(1e-9, 0);
    let pts = sample_points::<D>(20, 0.6);
    let res = integrate_superposition(&m, 0.0, k, &pts, &q, Want::ALL).unwrap();
    let scale = closed_form(id, &vec![0.0; D], k, dims).unwrap().norm();
    for (i, x) in pts.iter().enumerate() {
        let want = closed_form(id, x.as_slice(), k, dims).unwrap();
        assert!((res.values[i] - want).norm() <= 1e-6 * scale.max(want.norm()), "{id:?} at {x:?}: {} vs {want}", res.values[i]);
        let g = closed_form_gradient::<D>(id, x, k, dims).unwrap();
        let got = res.grad_values.as_ref().unwrap()[i];
        assert!((got - g).norm() <= 1e-6 * k * scale.max(g.norm()), "{id:?} gradient at {x:?}");
    }
}

#[test]
fn e4_and_e5_quadrature_match_closed_forms() {
    let d1 = OracleDims { d: 1, m: 1, r: 0 };
    let d2 = OracleDims { d: 2, m: 2, r: 0 };
    engine_vs_closed_form::<1>(OracleId::E5Gaussian, d1, 10.0, 32);
    engine_vs_closed_form::<1>(OracleId::E4Wkb, d1, 10.0, 32);
    engine_vs_closed_form::<2>(OracleId::E5Gaussian, d2, 10.0, 32);
    engine_vs_closed_form::<2>(OracleId::E4Wkb, d2, 10.0, 32);
}

#[test]
fn e1_and_e2_quadrature_match_closed_forms() {
    engine_vs_closed_form::<2>(OracleId::E1Flat, OracleDims { d: 2, m: 2, r: 0 }, 6.0, 32);
    engine_vs_closed_form::<3>(OracleId::E2Split, OracleDims { d: 3, m: 2, r: 1 }, 6.0, 32);
    let dims = OracleDims { d: 3, m: 2, r: 0 };
    let m = oracle_manifold::<3>(OracleId::E1SpherePoint, dims).unwrap();
    let q = fixed(vec![16, 32], vec![8, 8]);
    let pts = sample_points::<3>(10, 0.5);
    let res = integrate_superposition(&m, 0.0, 10.0, &pts, &q, Want::VALUE).unwrap();
    for (i, x) in pts.iter().enumerate() {
        let want = closed_form(OracleId::E1SpherePoint, x.as_slice(), 10.0, dims).unwrap();
        assert!((res.values[i] - want).norm() < 1e-8, "{x:?}");
    }
}

#[test]
fn e5_l2_norm_ratio_at_k64() {
    let dims = OracleDims { d: 2, m: 2, r: 0 };
    let norm = |k: f64| {
        let inner = |x: f64| gl_1d(|y| closed_form(OracleId::E5Gaussian, &[x, y], k, dims).unwrap().norm_sqr(), -2.0, 2.0, 64);
        gl_1d(inner, -2.0, 2.0, 64).sqrt()
    };
    let ratio = norm(128.0) / norm(64.0);
    let want = 2f64.powf(-0.5);
    assert!((ratio - want).abs() < 0.03 * want, "{ratio}");
}

#[test]
fn oracles_reject_invalid_parameters() {
    assert!(closed_form(OracleId::E2Split, &[0.0; 3], 4.0, OracleDims { d: 3, m: 2, r: 0 }).is_err());
    assert!(closed_form(OracleId::E5Gaussian, &[0.0; 2], 4.0, OracleDims { d: 2, m: 1, r: 0 }).is_err());
    assert!(oracle_manifold::<2>(OracleId::E5Gaussian, OracleDims { d: 3, m: 3, r: 0 }).is_err());
}

#[test]
fn annulus_rejects_tangency_and_fractional_k() {
    assert!(matches!(AnnulusExample::b0(1.0), Err(Error::SingularHessian { .. })));
    assert!(AnnulusExample::standard(10.5).is_err());
}

proptest! {
    #[test]
    fn annulus_b_solves_its_riccati_equation(t in 0.0f64..2.0, s in 0.0f64..0.99) {
        let h = 1e-5;
        let b = AnnulusExample::hessian_b(t, s).unwrap();
        let bp = AnnulusExample::hessian_b(t + h, s).unwrap();
        let bm = AnnulusExample::hessian_b((t - h).max(0.0), s).unwrap();
        let span = t + h - (t - h).max(0.0);
        let deriv = (bp - bm) / span;
        prop_assert!((deriv + b * b).norm() < 1e-4 * (1.0 + b.norm_sqr()));
        prop_assert!(b.im > 0.0);
    }

    #[test]
    fn radial3d_minus_hessian_keeps_positive_imaginary_part(t in 0.0f64..1.5, s in 0.1f64..1.0) {
        let b = Radial3dExample::hessian_b(-t, s);
        let m = ComplexSymMatrix::<3>::from_projections(&RealVector::<3>::new(0.0, 0.0, 1.0), Complex64::i(), b + Complex64::i()).unwrap();
        prop_assert!(m.min_imag_eigenvalue() > 0.0);
    }

    #[test]
    fn spherical_exact_is_even_in_r(r in 1e-3f64..2.0, t in -1.0f64..1.0) {
        let ex = SphericalExample::new(30.0).unwrap();
        prop_assert!((ex.exact(r, t) - ex.exact(-r, t)).norm() == 0.0);
    }

    #[test]
    fn radial3d_amplitude_vanishes_outside_support(s in -1.0f64..3.0) {
        let ex = Radial3dExample::new(10.0, 0.1, 1.0).unwrap();
        let a = ex.amplitude(s);
        if !(0.1..=1.0).contains(&s) {
            prop_assert_eq!(a, 0.0);
        } else {
            prop_assert!(a >= 0.0);
        }
    }
}
