//! Focusing spherical wave in 3D with data concentrated at the origin.
//!
//! Exact solution `u = (f(t - r) - f(t + r)) / r` with
//! `f(x) = exp(-i k x - k x^2 / 2) / k`, and the beam superposition over the
//! unit sphere of directions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beam::{BeamPhase, ComplexMatrix, ComplexSymMatrix, RealVector};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box, QuadratureSpec};
use crate::superposition::{BeamFamily, BeamRates, BeamSample};

/// Below this radius the exact solution uses its Taylor expansion in `r`.
pub const SERIES_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalExample {
    pub k: f64,
}

/// Value and first derivatives of a radial field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialJet {
    pub u: Complex64,
    pub ut: Complex64,
    pub ur: Complex64,
}

impl SphericalExample {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 1.0) {
            return Err(Error::InvalidInput(format!("k must be at least 1, got {k}")));
        }
        Ok(Self { k })
    }

    /// `f` and its first four derivatives at `x`.
    fn f_jet(&self, x: f64) -> [Complex64; 5] {
        let k = self.k;
        let f = (Complex64::new(-k * x * x / 2.0, -k * x)).exp() / k;
        // f' = g f with g = -ik - kx, g' = -k
        let g = Complex64::new(-k * x, -k);
        let gp = -k;
        let f1 = g * f;
        let f2 = (g * g + gp) * f;
        let f3 = (g * g * g + 3.0 * gp * g) * f;
        let f4 = (g.powi(4) + 6.0 * gp * g * g + 3.0 * gp * gp) * f;
        [f, f1, f2, f3, f4]
    }

    pub fn exact(&self, r: f64, t: f64) -> Complex64 {
        self.exact_jet(r, t).u
    }

    /// Exact `u`, `u_t`, `u_r` at radius `r`.
    pub fn exact_jet(&self, r: f64, t: f64) -> RadialJet {
        let r = r.abs();
        if r < SERIES_RADIUS {
            let j = self.f_jet(t);
            return RadialJet {
                u: -2.0 * j[1] - r * r / 3.0 * j[3],
                ut: -2.0 * j[2] - r * r / 3.0 * j[4],
                ur: -2.0 * r / 3.0 * j[3],
            };
        }
        let a = self.f_jet(t - r);
        let b = self.f_jet(t + r);
        let u = (a[0] - b[0]) / r;
        RadialJet {
            u,
            ut: (a[1] - b[1]) / r,
            ur: (-a[1] - b[1]) / r - u / r,
        }
    }

    fn reduced_integrand(&self, r: f64, t: f64, s: f64) -> [Complex64; 3] {
        let k = self.k;
        let q = 1.0 + t * t;
        let w = 1.0 - s * s;
        let d = r * s - t;
        let phi = Complex64::new(d + t * r * r * w / (2.0 * q), 0.5 * (d * d + r * r * w / q));
        let phi_t = Complex64::new(-1.0 + r * r * w * (1.0 - t * t) / (2.0 * q * q), -d - r * r * w * t / (q * q));
        let phi_r = Complex64::new(s + t * r * w / q, s * d + r * w / q);
        let e = (Complex64::i() * k * phi).exp();
        let ik = Complex64::new(0.0, k);
        [e, ik * phi_t * e, ik * phi_r * e]
    }

    /// Reduced one-dimensional form `u_GB = i/(1+it) int_{-1}^{1} exp(i k phi(s)) ds`.
    pub fn superposition(&self, r: f64, t: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        Ok(self.superposition_jet(r, t, quad)?.u)
    }

    /// `u_GB`, `d_t u_GB` and `d_r u_GB` from analytic integrand derivatives.
    pub fn superposition_jet(&self, r: f64, t: f64, quad: &QuadratureSpec) -> Result<RadialJet> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("spherical superposition needs t >= 0, got {t}")));
        }
        let r = r.abs();
        let c = Complex64::i() / Complex64::new(1.0, t);
        let dc = 1.0 / (Complex64::new(1.0, t) * Complex64::new(1.0, t));
        let f = |z: &[f64]| self.reduced_integrand(r, t, z[0]);
        let out = if quad.max_refinements == 0 {
            fixed_rule(f, quad)?
        } else {
            integrate_box(f, &[(-1.0, 1.0)], quad, [1.0, self.k, self.k])?.values
        };
        Ok(RadialJet {
            u: c * out[0],
            ut: dc * out[0] + c * out[1],
            ur: c * out[2],
        })
    }

    /// Single beam launched from the origin in direction `omega`.
    pub fn beam(&self, omega: &RealVector<3>, t: f64, with_rates: bool) -> BeamSample<3> {
        let w = omega.normalize();
        let p_along = (w * w.transpose()).map(|v| Complex64::new(v, 0.0));
        let p_across = ComplexMatrix::<3>::identity() - p_along;
        let z = Complex64::new(1.0, t);
        let across = Complex64::i() / z;
        let m = p_along * Complex64::i() + p_across * across;
        let amp = Complex64::i() / (2.0 * PI * z);
        let rates = with_rates.then(|| BeamRates {
            action: Complex64::new(0.0, 0.0),
            center: w,
            momentum: RealVector::zeros(),
            hessian: p_across * (1.0 / (z * z)),
            amplitude: 1.0 / (2.0 * PI * z * z),
        });
        BeamSample {
            phase: BeamPhase {
                action: Complex64::new(0.0, 0.0),
                momentum: w,
                hessian: ComplexSymMatrix::symmetrized(m),
                center: w * t,
            },
            amplitude: amp,
            rates,
        }
    }

    pub fn family(&self) -> SphericalFamily {
        SphericalFamily { example: *self }
    }
}

fn fixed_rule<F: Fn(&[f64]) -> [Complex64; 3]>(f: F, quad: &QuadratureSpec) -> Result<[Complex64; 3]> {
    let rule = crate::quadrature::TensorRule::new(&[(-1.0, 1.0)], quad)?;
    let mut acc: [crate::quadrature::PairwiseSum; 3] = Default::default();
    let mut z = [0.0];
    for i in 0..rule.len() {
        let w = rule.node(i, &mut z);
        for (a, v) in acc.iter_mut().zip(f(&z)) {
            a.push(v * w);
        }
    }
    Ok(std::array::from_fn(|i| acc[i].total()))
}

/// Beams over the sphere of directions in coordinates `(rho, varphi)` with
/// weight `sin rho`. Amplitudes carry `1/k` so that the `k^{m/2}` prefactor
/// reproduces the unscaled sphere integral.
#[derive(Debug, Clone, Copy)]
pub struct SphericalFamily {
    pub example: SphericalExample,
}

impl BeamFamily<3> for SphericalFamily {
    fn param_box(&self) -> Vec<(f64, f64)> {
        vec![(0.0, PI), (0.0, 2.0 * PI)]
    }

    fn weight(&self, z: &[f64]) -> f64 {
        z[0].sin().max(0.0)
    }

    fn sample(&self, z: &[f64], t: f64, with_rates: bool) -> Result<Option<BeamSample<3>>> {
        let (rho, vp) = (z[0], z[1]);
        let omega = RealVector::<3>::new(rho.sin() * vp.cos(), rho.sin() * vp.sin(), rho.cos());
        let mut b = self.example.beam(&omega, t, with_rates);
        let inv_k = 1.0 / self.example.k;
        b.amplitude *= inv_k;
        if let Some(r) = b.rates.as_mut() {
            r.amplitude *= inv_k;
        }
        Ok(Some(b))
    }
}
