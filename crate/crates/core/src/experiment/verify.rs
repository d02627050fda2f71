//! Self-checks grouped into suites, each reporting a value against a tolerance.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::oracles::{closed_form, oracle_manifold, OracleDims, OracleId};
use crate::analytic::{annulus::rotation, AnnulusExample, Branch, Radial3dExample, SphericalExample};
use crate::beam::{propagate_hessian, propagate_ray, HamiltonianModel, PhaseSpacePoint, RealVector};
use crate::error::{Error, Result};
use crate::metrics::{eoc, rate_fit};
use crate::quadrature::{gauss_legendre_nodes, integrate_box, CompositeRule, QuadratureSpec};
use crate::spectral::{energy_of_state, propagate, propagate_checked, GridField2D, WaveState2D};
use crate::superposition::{integrate_superposition, Want};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BeamCore,
    Quadrature,
    Spectral,
    Examples,
    Metrics,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::BeamCore, Suite::Quadrature, Suite::Spectral, Suite::Examples, Suite::Metrics];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BeamCore => "beam-core",
            Suite::Quadrature => "quadrature",
            Suite::Spectral => "spectral",
            Suite::Examples => "examples",
            Suite::Metrics => "metrics",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}' (known: beam-core, quadrature, spectral, examples, metrics)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: String,
    /// Measured deviation; `passed` means `value <= tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(suite: Suite, name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// Pass when the operation was rejected with an error.
    fn rejected<T>(suite: Suite, name: &str, r: Result<T>) -> Self {
        Self::new(suite, name, if r.is_err() { 0.0 } else { 1.0 }, 0.0)
    }
}

pub fn verify(suite: Suite) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::BeamCore => beam_core(),
        Suite::Quadrature => quadrature(),
        Suite::Spectral => spectral(),
        Suite::Examples => examples(),
        Suite::Metrics => metrics(),
    }
}

fn beam_core() -> Result<Vec<CheckOutcome>> {
    let s = Suite::BeamCore;
    let mut out = Vec::new();

    let model = HamiltonianModel::plus(1.0);
    let start = PhaseSpacePoint::new([0.3, -0.2], [1.2, 0.5]);
    let path = propagate_ray(&model, &start, Complex64::new(0.0, 0.0), 1.0, 1e-3)?;
    let h0 = model.value(&start);
    let drift = path.iter().map(|p| (model.value(&p.point) - h0).abs()).fold(0.0, f64::max);
    out.push(CheckOutcome::new(s, "ray_hamiltonian_conserved", drift, 1e-10));
    let action = path.iter().map(|p| p.action.norm()).fold(0.0, f64::max);
    out.push(CheckOutcome::new(s, "ray_action_conserved", action, 1e-10));
    let end = path.last().expect("non-empty path");
    let straight = (end.point.x - (start.x + start.p.normalize())).norm();
    out.push(CheckOutcome::new(s, "ray_is_straight_unit_speed", straight, 1e-12));

    let b = AnnulusExample::hessian_b(1.0, 0.5)?;
    out.push(CheckOutcome::new(s, "annulus_hessian_b_closed_form", (b - Complex64::new(1.5, 0.5)).norm(), 1e-8));

    let ex = AnnulusExample::standard(80.0)?;
    let mut dev = 0.0f64;
    for &(th, sp, t) in &[(0.3, 0.5, 0.0), (2.0, 0.3, 0.7), (5.5, 0.7, 1.4)] {
        let b = ex.beam_sample(th, sp, t, false, false)?;
        dev = dev.max((b.phase.value(&b.phase.center) - Complex64::new(sp - th, 0.0)).norm());
    }
    out.push(CheckOutcome::new(s, "annulus_central_ray_phase", dev, 1e-12));

    let (th, sp) = (1.1, 0.4);
    let (p0, _) = ex.beam(th, sp, 0.0)?;
    let st = PhaseSpacePoint::from_vectors(p0.center, p0.momentum);
    let hist = propagate_hessian(&model, &st, &p0.hessian, 1.0, 1e-3)?;
    let mut dev = 0.0f64;
    let mut min_im = f64::INFINITY;
    for (t, m) in hist.iter().step_by(50) {
        dev = dev.max(ex.beam(th, sp, *t)?.0.hessian.max_abs_diff(m));
        min_im = min_im.min(m.min_imag_eigenvalue());
    }
    out.push(CheckOutcome::new(s, "annulus_riccati_closed_form", dev, 1e-8));
    out.push(CheckOutcome::new(s, "im_hessian_stays_positive", -min_im, 0.0));

    let rx = Radial3dExample::new(40.0, 0.1, 1.0)?;
    let omega = RealVector::<3>::new(0.6, 0.0, 0.8);
    let b0 = rx.beam(Branch::Minus, 0.6, &omega, 0.0, false)?.ok_or_else(|| Error::InvalidInput("empty beam".into()))?;
    let st = PhaseSpacePoint::from_vectors(b0.phase.center, b0.phase.momentum);
    let hist = propagate_hessian(&HamiltonianModel::minus(1.0), &st, &b0.phase.hessian, 0.5, 1e-3)?;
    let mut dev = 0.0f64;
    for (t, m) in hist.iter().step_by(50) {
        let b = rx.beam(Branch::Minus, 0.6, &omega, *t, false)?.ok_or_else(|| Error::InvalidInput("empty beam".into()))?;
        dev = dev.max(b.phase.hessian.max_abs_diff(m));
    }
    out.push(CheckOutcome::new(s, "radial3d_riccati_closed_form", dev, 1e-8));

    out.push(CheckOutcome::rejected(s, "zero_momentum_rejected", model.eval(&PhaseSpacePoint::new([0.0, 0.0], [0.0, 0.0]))));
    Ok(out)
}

fn quadrature() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Quadrature;
    let mut out = Vec::new();
    let mut sum_dev = 0.0f64;
    let mut exact_dev = 0.0f64;
    for n in 2..=64 {
        let (x, w) = gauss_legendre_nodes(n)?;
        sum_dev = sum_dev.max((w.iter().sum::<f64>() - 2.0).abs());
        if n <= 20 {
            let p = 2 * n - 2;
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
            exact_dev = exact_dev.max((got - 2.0 / (p as f64 + 1.0)).abs());
        }
    }
    out.push(CheckOutcome::new(s, "weights_sum_to_two", sum_dev, 1e-13));
    out.push(CheckOutcome::new(s, "polynomial_exactness", exact_dev, 1e-13));

    let rule = CompositeRule::new(0.0, 1.0, 10, 8)?;
    let got: Complex64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| Complex64::new(0.0, 50.0 * x).exp() * w).sum();
    let want = (Complex64::new(0.0, 50.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
    out.push(CheckOutcome::new(s, "oscillatory_integral", (got - want).norm(), 1e-10));

    let spec = QuadratureSpec::uniform(2, 2, 6).with_tolerance(1e-10, 6);
    let res = integrate_box(|z| [Complex64::new(0.0, 20.0 * z[0]).exp() * (3.0 * z[1]).exp()], &[(0.0, 1.0), (0.0, 1.0)], &spec, [1.0])?;
    let want = (Complex64::new(0.0, 20.0).exp() - 1.0) / Complex64::new(0.0, 20.0) * ((3f64).exp() - 1.0) / 3.0;
    out.push(CheckOutcome::new(s, "refined_box_integral", (res.values[0] - want).norm(), 1e-9));
    out.push(CheckOutcome::new(s, "refinement_estimate_within_tolerance", res.error_estimate, spec.abs_tol));

    let d2 = OracleDims { d: 2, m: 2, r: 0 };
    out.push(CheckOutcome::new(s, "e5_oracle_closed_form", oracle_deviation::<2>(OracleId::E5Gaussian, d2, 10.0, 32)?, 1e-6));
    out.push(CheckOutcome::new(s, "e4_oracle_closed_form", oracle_deviation::<2>(OracleId::E4Wkb, d2, 10.0, 32)?, 1e-6));
    out.push(CheckOutcome::new(s, "e1_flat_oracle_closed_form", oracle_deviation::<2>(OracleId::E1Flat, d2, 6.0, 32)?, 1e-6));
    let split = OracleDims { d: 3, m: 2, r: 1 };
    out.push(CheckOutcome::new(s, "e2_oracle_closed_form", oracle_deviation::<3>(OracleId::E2Split, split, 6.0, 32)?, 1e-6));
    let sphere = OracleDims { d: 3, m: 2, r: 0 };
    out.push(CheckOutcome::new(s, "e1_sphere_oracle_closed_form", oracle_deviation::<3>(OracleId::E1SpherePoint, sphere, 10.0, 32)?, 1e-6));
    Ok(out)
}

/// Largest relative deviation of engine values from the closed form at
/// scattered points in `[-0.6, 0.6]^D`, scaled by the peak value.
fn oracle_deviation<const D: usize>(id: OracleId, dims: OracleDims, k: f64, panels: usize) -> Result<f64> {
    let m = oracle_manifold::<D>(id, dims)?;
    let q = QuadratureSpec::new(vec![panels; dims.m], vec![8; dims.m], 1e-9, 0)?;
    let pts: Vec<RealVector<D>> = (0..20)
        .map(|i| RealVector::<D>::from_fn(|j, _| 0.6 * ((i * (j + 3)) as f64 * 0.61803 + j as f64 * 0.3).sin()))
        .collect();
    let res = integrate_superposition(&m, 0.0, k, &pts, &q, Want::VALUE)?;
    let peak = closed_form(id, &[0.0; D], k, dims)?.norm();
    let mut dev = 0.0f64;
    for (x, v) in pts.iter().zip(&res.values) {
        let c = closed_form(id, x.as_slice(), k, dims)?;
        dev = dev.max((v - c).norm() / peak.max(c.norm()));
    }
    Ok(dev)
}

/// Fixed band-limited state on a 32-point grid.
fn sample_state() -> Result<WaveState2D> {
    let l = 4.0;
    let w = 2.0 * PI / l;
    let modes = [(1.0, 2.0, 0.7, -0.2), (-3.0, 1.0, 0.1, 0.5), (5.0, -4.0, -0.3, 0.25), (0.0, 6.0, 0.4, 0.0)];
    let field = |phase: f64| {
        GridField2D::from_fn(32, l, move |x1, x2| {
            modes
                .iter()
                .map(|&(a, b, re, im)| Complex64::new(re, im + phase) * Complex64::new(0.0, w * (a * x1 + b * x2)).exp())
                .sum()
        })
    };
    WaveState2D::new(field(0.0)?, field(0.3)?, 0.0)
}

fn spectral() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Spectral;
    let mut out = Vec::new();
    let st = sample_state()?;
    let e0 = energy_of_state(&st, 1.0)?;
    let e1 = energy_of_state(&propagate(&st, 0.7), 1.0)?;
    out.push(CheckOutcome::new(s, "energy_conserved", (e1 - e0).abs() / e0, 1e-10));
    let back = propagate(&propagate(&st, 0.7), 0.0);
    out.push(CheckOutcome::new(s, "propagation_reversible", back.u.max_abs_diff(&st.u)?, 1e-12));

    let l = 4.0;
    let u = GridField2D::from_fn(32, l, |x1, _| Complex64::new(0.0, PI * x1 / 2.0).exp())?;
    let mode = WaveState2D::new(u, GridField2D::zeros(32, l)?, 0.0)?;
    out.push(CheckOutcome::new(s, "single_mode_quarter_period", propagate(&mode, 1.0).u.max_abs(), 1e-12));

    out.push(CheckOutcome::rejected(s, "resolution_guard", propagate_checked(&st, 0.2, 100.0)));
    Ok(out)
}

fn examples() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Examples;
    let mut out = Vec::new();

    let ex = SphericalExample::new(40.0)?;
    let q = QuadratureSpec::uniform(1, 8, 8).with_tolerance(1e-10, 6);
    let mut dev = 0.0f64;
    for i in 0..=20 {
        let r = 0.1 * i as f64;
        dev = dev.max((ex.superposition(r, 0.0, &q)? - ex.exact(r, 0.0)).norm());
    }
    out.push(CheckOutcome::new(s, "spherical_initial_identity", dev, 1e-8));

    let dims = OracleDims { d: 1, m: 1, r: 0 };
    let m = oracle_manifold::<1>(OracleId::E5Gaussian, dims)?;
    let q = QuadratureSpec::uniform(1, 16, 8).with_tolerance(1e-10, 3);
    let res = integrate_superposition(&m, 0.0, 4.0, &[RealVector::<1>::zeros()], &q, Want::VALUE)?;
    out.push(CheckOutcome::new(s, "e5_origin_value", (res.values[0] - Complex64::new(2.24200, 0.0)).norm(), 1e-5));

    let an = AnnulusExample::standard(12.0)?;
    let q = an.default_quadrature();
    let alpha = PI / 3.0;
    let pts = vec![RealVector::<2>::new(0.9, 0.2), RealVector::<2>::new(-0.3, 1.05)];
    let turned: Vec<_> = pts.iter().map(|p| rotation(alpha) * p).collect();
    let (a, _, _) = an.superposition_points(&pts, 0.4, &q, Want::VALUE)?;
    let (b, _, _) = an.superposition_points(&turned, 0.4, &q, Want::VALUE)?;
    let phase = Complex64::new(0.0, -an.k * alpha).exp();
    let dev = a.iter().zip(&b).map(|(x, y)| (y - x * phase).norm()).fold(0.0, f64::max);
    out.push(CheckOutcome::new(s, "annulus_rotation_covariance", dev, 1e-7));

    let rx = Radial3dExample::new(320.0, 0.1, 1.0)?;
    let r = 0.5;
    let want = Complex64::new(0.0, rx.k * r).exp() * rx.amplitude(r);
    out.push(CheckOutcome::new(s, "radial3d_initial_data", (rx.exact(r, 0.0) - want).norm() / want.norm(), 1e-10));
    let g = rx.superposition(0.0, 0.4, &super::run::radial3d_default_quadrature())?;
    let e = (rx.exact(0.0, 0.4) - g).norm() / g.norm();
    out.push(CheckOutcome::new(s, "radial3d_focus_error_k320", (e / 0.109724 - 1.0).abs(), 0.05));
    Ok(out)
}

fn metrics() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Metrics;
    let mut out = Vec::new();
    let (a, b, c) = (0.109724, 0.064004, 0.0381);
    out.push(CheckOutcome::new(s, "eoc_additive", (eoc(a, b)? + eoc(b, c)? - eoc(a, c)?).abs(), 1e-14));
    let fit = rate_fit(&[(320.0, a), (640.0, b)])?;
    out.push(CheckOutcome::new(s, "two_point_fit_is_minus_eoc", (fit + eoc(a, b)?).abs(), 1e-14));
    let pts: Vec<(f64, f64)> = [80.0f64, 160.0, 320.0, 640.0].iter().map(|&k| (k, 3.0 * k.powf(-0.75))).collect();
    out.push(CheckOutcome::new(s, "power_law_fit_exact", (rate_fit(&pts)? + 0.75).abs(), 1e-14));
    out.push(CheckOutcome::new(s, "eoc_of_halving_is_one", (eoc(0.2, 0.1)? - 1.0).abs(), 1e-14));
    Ok(out)
}
