//! Radial 3D example with a focus at the origin.
//!
//! Initial data `u(x, 0) = a(|x|) exp(i k |x|)`, `u_t(x, 0) = 0`, with
//! `a(s) = 4 (s - r0)^4 (s - r1)^4` on `[r0, r1]`. The exact solution is
//! `u = (f(t + r) - f(t - r)) / r` with `f(s) = s a(s) exp(i k s) / 2`
//! extended oddly.
//!
//! The beam superposition uses two families launched from `y = s omega`
//! and moving along `-omega` (minus) or `+omega` (plus). Their Hessians are
//! `M = b(-+t, s) P_perp + i I` with
//!
//! ```text
//! b(t; s) = (1 - i t (1 + i s)) / (s + i s t + t)
//! ```
//!
//! and amplitudes `A(t; s) = (a(s)/2) / (1 -+ t (1/s + i))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::spherical::RadialJet;
use crate::beam::{BeamPhase, ComplexMatrix, ComplexSymMatrix, RealVector};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box, PairwiseSum, QuadratureSpec, TensorRule};
use crate::superposition::{BeamFamily, BeamRates, BeamSample, CULL_EXPONENT};

/// Below this radius the exact solution uses its Taylor expansion in `r`.
pub const SERIES_RADIUS: f64 = 1e-6;
/// Smallest admissible `|1 - t (1/s + i)|`.
pub const POLE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial3dExample {
    pub k: f64,
    pub r0: f64,
    pub r1: f64,
}

/// Which beam family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Minus,
    Plus,
}

impl Radial3dExample {
    pub fn new(k: f64, r0: f64, r1: f64) -> Result<Self> {
        if !(k >= 1.0) {
            return Err(Error::InvalidInput(format!("k must be at least 1, got {k}")));
        }
        if !(0.0 < r0 && r0 < r1) {
            return Err(Error::InvalidInput(format!("need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}")));
        }
        Ok(Self { k, r0, r1 })
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(k, self.r0, self.r1)
    }

    /// Derivatives `a, a', ..., a^(n)` for `n <= 5`.
    pub fn amplitude_derivatives(&self, s: f64) -> [f64; 6] {
        if s < self.r0 || s > self.r1 {
            return [0.0; 6];
        }
        // a = 4 p^4 q^4 with p = s - r0, q = s - r1 (Leibniz on p^4 q^4)
        let (p, q) = (s - self.r0, s - self.r1);
        let pw = |x: f64, j: usize| -> f64 {
            // d^j/ds^j x^4
            match j {
                0 => x.powi(4),
                1 => 4.0 * x.powi(3),
                2 => 12.0 * x * x,
                3 => 24.0 * x,
                4 => 24.0,
                _ => 0.0,
            }
        };
        let binom = |n: usize, j: usize| -> f64 { (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
        let mut out = [0.0; 6];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=n {
                acc += binom(n, j) * pw(p, j) * pw(q, n - j);
            }
            *slot = 4.0 * acc;
        }
        out
    }

    pub fn amplitude(&self, s: f64) -> f64 {
        self.amplitude_derivatives(s)[0]
    }

    /// `f^(n)(s)` for `n = 0..=4`, odd extension included.
    fn f_jet(&self, s: f64) -> [Complex64; 5] {
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        let x = s.abs();
        let a = self.amplitude_derivatives(x);
        // g = x a / 2, g^(j) = (x a^(j) + j a^(j-1)) / 2
        let g: [f64; 5] = std::array::from_fn(|j| 0.5 * (x * a[j] + if j > 0 { j as f64 * a[j - 1] } else { 0.0 }));
        let ik = Complex64::new(0.0, self.k);
        let e = (ik * x).exp();
        let binom = [[1.0, 0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 3.0, 1.0, 0.0], [1.0, 4.0, 6.0, 4.0, 1.0]];
        std::array::from_fn(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                acc += binom[n][j] * g[j] * ik.powi((n - j) as i32);
            }
            // f(-x) = -f(x) gives f^(n)(-x) = (-1)^(n+1) f^(n)(x)
            let parity = if n % 2 == 0 { sign } else { 1.0 };
            acc * e * parity
        })
    }

    pub fn exact(&self, r: f64, t: f64) -> Complex64 {
        self.exact_jet(r, t).u
    }

    /// Exact `u`, `u_t`, `u_r`.
    pub fn exact_jet(&self, r: f64, t: f64) -> RadialJet {
        let r = r.abs();
        if r < SERIES_RADIUS {
            let j = self.f_jet(t);
            return RadialJet {
                u: 2.0 * j[1] + r * r / 3.0 * j[3],
                ut: 2.0 * j[2] + r * r / 3.0 * j[4],
                ur: 2.0 * r / 3.0 * j[3],
            };
        }
        let p = self.f_jet(t + r);
        let m = self.f_jet(t - r);
        let u = (p[0] - m[0]) / r;
        RadialJet {
            u,
            ut: (p[1] - m[1]) / r,
            ur: (p[1] + m[1]) / r - u / r,
        }
    }

    /// `(i k t a + a + t a') exp(i k t)`
    pub fn focus_value(&self, t: f64) -> Complex64 {
        let a = self.amplitude_derivatives(t);
        Complex64::new(a[0] + t * a[1], self.k * t * a[0]) * Complex64::new(0.0, self.k * t).exp()
    }

    /// Forward Hessian coefficient `b(t; s)`.
    pub fn hessian_b(t: f64, s: f64) -> Complex64 {
        let num = Complex64::new(1.0, 0.0) - Complex64::new(0.0, t) * Complex64::new(1.0, s);
        let den = Complex64::new(s + t, s * t);
        num / den
    }

    fn pole_factor(&self, t: f64, s: f64) -> Result<Complex64> {
        let d = 1.0 - t * Complex64::new(1.0 / s, 1.0);
        if d.norm() < POLE_GUARD {
            return Err(Error::PoleTooClose { s, value: d.norm() });
        }
        Ok(d)
    }

    /// `A(t; s) = (a(s)/2) / (1 - t (1/s + i))` and its time derivative.
    ///
    /// This is the minus amplitude; the plus one is the same at `-t` with the
    /// derivative negated.
    pub fn amplitude_minus(&self, t: f64, s: f64) -> Result<(Complex64, Complex64)> {
        let a = self.amplitude(s);
        let d = self.pole_factor(t, s)?;
        let q = Complex64::new(1.0 / s, 1.0);
        Ok((0.5 * a / d, 0.5 * a * q / (d * d)))
    }

    /// `s`-dependent part of the reduced integrand: the exponent and its `t`
    /// and `r` derivatives are quadratics in `v`.
    fn reduced_row(&self, r: f64, t: f64, s: f64) -> Result<Option<ReducedRow>> {
        let k = self.k;
        let (amp, amp_t) = self.amplitude_minus(t, s)?;
        if amp == Complex64::new(0.0, 0.0) {
            return Ok(None);
        }
        let ik = Complex64::new(0.0, k);
        let i = Complex64::i();
        let c = Complex64::new(1.0, -(s - t));
        let bm = Self::hessian_b(-t, s);
        let dd = 0.5 * bm;
        let w = bm + i;
        let dd_t = 0.5 * w * w;
        Ok(Some(ReducedRow {
            e: [ik * (t + dd * r * r) - k * (r * r + (s - t) * (s - t)) / 2.0, ik * c * r, -ik * dd * r * r],
            e_t: [ik * (1.0 + dd_t * r * r) + k * (s - t), ik * i * r, -ik * dd_t * r * r],
            e_r: [2.0 * ik * dd * r - k * r, ik * c, -2.0 * ik * dd * r],
            amp: amp * (s * s),
            amp_t: amp_t * (s * s),
        }))
    }

    fn reduced_integrand(&self, r: f64, t: f64, s: f64, v: f64, sign: f64) -> Result<[Complex64; 3]> {
        Ok(match self.reduced_row(r, t, s)? {
            Some(row) => row.at(v, sign),
            None => [Complex64::new(0.0, 0.0); 3],
        })
    }

    /// Reduced `(s, v)` integral for one family; `t` may be negative (plus family).
    fn reduced_once(&self, r: f64, t: f64, quad: &QuadratureSpec) -> Result<[Complex64; 3]> {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let bounds = [(self.r0, self.r1), (-1.0, 1.0)];
        if quad.max_refinements == 0 {
            let rule = TensorRule::new(&bounds, quad)?;
            let (ss, vs) = (&rule.axes[0], &rule.axes[1]);
            let mut acc: [PairwiseSum; 3] = Default::default();
            for (&s, &ws) in ss.nodes.iter().zip(&ss.weights) {
                let Some(row) = self.reduced_row(r, t, s)? else {
                    continue;
                };
                if row.max_log_modulus() < -CULL_EXPONENT {
                    continue;
                }
                for (&v, &wv) in vs.nodes.iter().zip(&vs.weights) {
                    if row.log_modulus(v) < -CULL_EXPONENT {
                        continue;
                    }
                    for (a, x) in acc.iter_mut().zip(row.at(v, sign)) {
                        a.push(x * (ws * wv));
                    }
                }
            }
            return Ok(std::array::from_fn(|i| acc[i].total()));
        }
        let failure = std::cell::Cell::new(None);
        let out = integrate_box(
            |z| match self.reduced_integrand(r, t, z[0], z[1], sign) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e.to_string()));
                    [Complex64::new(0.0, 0.0); 3]
                }
            },
            &bounds,
            quad,
            [1.0, self.k, self.k],
        )?;
        if let Some(msg) = failure.take() {
            return Err(Error::InvalidInput(msg));
        }
        Ok(out.values)
    }

    /// `u_GB`, `d_t u_GB`, `d_r u_GB` at radius `r` from the reduced integral,
    /// summing the minus family at `t` and its twin at `-t`.
    pub fn superposition_jet(&self, r: f64, t: f64, quad: &QuadratureSpec) -> Result<RadialJet> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("reduced integral needs t > 0, got {t}")));
        }
        let r = r.abs();
        let pref = 2.0 * PI * (self.k / (2.0 * PI)).powf(1.5);
        let a = self.reduced_once(r, t, quad)?;
        let b = self.reduced_once(r, -t, quad)?;
        Ok(RadialJet {
            u: (a[0] + b[0]) * pref,
            ut: (a[1] + b[1]) * pref,
            ur: (a[2] + b[2]) * pref,
        })
    }

    pub fn superposition(&self, r: f64, t: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        Ok(self.superposition_jet(r, t, quad)?.u)
    }

    /// Suggested `(s, v)` panels for radius `r`: the `v` integrand oscillates
    /// like `exp(i k r v)`.
    pub fn panels_for_radius(&self, r: f64, base: &QuadratureSpec) -> QuadratureSpec {
        let need_v = (self.k * r.abs() / 3.0).ceil() as usize;
        base.with_min_panels(1, need_v)
    }

    /// One beam of the given family launched from `y = s omega`.
    pub fn beam(&self, branch: Branch, s: f64, omega: &RealVector<3>, t: f64, with_rates: bool) -> Result<Option<BeamSample<3>>> {
        let a0 = self.amplitude(s);
        if a0 == 0.0 {
            return Ok(None);
        }
        let w = omega.normalize();
        let sg = match branch {
            Branch::Minus => 1.0,
            Branch::Plus => -1.0,
        };
        // minus family sees b(-t), plus family sees b(t)
        let tau = -sg * t;
        let b = Self::hessian_b(tau, s);
        let shifted = b + Complex64::i();
        let p_along = (w * w.transpose()).map(|v| Complex64::new(v, 0.0));
        let p_across = ComplexMatrix::<3>::identity() - p_along;
        let m = p_across * b + ComplexMatrix::<3>::identity() * Complex64::i();
        let (amp, amp_t) = self.amplitude_minus(sg * t, s)?;
        let rates = with_rates.then(|| BeamRates {
            action: Complex64::new(0.0, 0.0),
            center: -w * sg,
            momentum: RealVector::zeros(),
            hessian: p_across * (shifted * shifted * sg),
            amplitude: amp_t * sg,
        });
        Ok(Some(BeamSample {
            phase: BeamPhase {
                action: Complex64::new(s, 0.0),
                momentum: w,
                hessian: ComplexSymMatrix::symmetrized(m),
                center: w * (s - sg * t),
            },
            amplitude: amp,
            rates,
        }))
    }

    pub fn family(&self, branch: Branch) -> Radial3dFamily {
        Radial3dFamily { example: *self, branch }
    }
}

/// Reduced integrand along one `s`: `exp(e(v)) (amp, amp_t + amp e_t(v), amp e_r(v))`.
struct ReducedRow {
    e: [Complex64; 3],
    e_t: [Complex64; 3],
    e_r: [Complex64; 3],
    amp: Complex64,
    amp_t: Complex64,
}

impl ReducedRow {
    fn poly(c: &[Complex64; 3], v: f64) -> Complex64 {
        c[0] + v * (c[1] + v * c[2])
    }

    fn log_modulus(&self, v: f64) -> f64 {
        self.e[0].re + v * (self.e[1].re + v * self.e[2].re)
    }

    /// Upper bound of [`Self::log_modulus`] over `v in [-1, 1]`.
    fn max_log_modulus(&self) -> f64 {
        let (b, a) = (self.e[1].re, self.e[2].re);
        let mut m = self.log_modulus(-1.0).max(self.log_modulus(1.0));
        if a < 0.0 {
            let v = -b / (2.0 * a);
            if v.abs() < 1.0 {
                m = m.max(self.log_modulus(v));
            }
        }
        m
    }

    fn at(&self, v: f64, sign: f64) -> [Complex64; 3] {
        let f = Self::poly(&self.e, v).exp();
        [
            f * self.amp,
            f * (self.amp_t + self.amp * Self::poly(&self.e_t, v)) * sign,
            f * self.amp * Self::poly(&self.e_r, v),
        ]
    }
}

/// One beam family over `y = s omega` in coordinates `(s, rho, varphi)` with
/// weight `s^2 sin rho`. Amplitudes carry `(2 pi)^{-3/2}`.
#[derive(Debug, Clone, Copy)]
pub struct Radial3dFamily {
    pub example: Radial3dExample,
    pub branch: Branch,
}

impl BeamFamily<3> for Radial3dFamily {
    fn param_box(&self) -> Vec<(f64, f64)> {
        vec![(self.example.r0, self.example.r1), (0.0, PI), (0.0, 2.0 * PI)]
    }

    fn weight(&self, z: &[f64]) -> f64 {
        z[0] * z[0] * z[1].sin().max(0.0)
    }

    fn sample(&self, z: &[f64], t: f64, with_rates: bool) -> Result<Option<BeamSample<3>>> {
        let (s, rho, vp) = (z[0], z[1], z[2]);
        let omega = RealVector::<3>::new(rho.sin() * vp.cos(), rho.sin() * vp.sin(), rho.cos());
        let scale = (2.0 * PI).powf(-1.5);
        Ok(self.example.beam(self.branch, s, &omega, t, with_rates)?.map(|mut b| {
            b.amplitude *= scale;
            if let Some(r) = b.rates.as_mut() {
                r.amplitude *= scale;
            }
            b
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> Radial3dExample {
        Radial3dExample::new(320.0, 0.1, 1.0).unwrap()
    }

    #[test]
    fn amplitude_is_c3_at_the_endpoints() {
        let ex = standard();
        let inside = ex.amplitude_derivatives(0.1 + 1e-12);
        for d in &inside[..4] {
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn amplitude_derivatives_match_differences() {
        let ex = standard();
        let s = 0.37;
        let h = 1e-5;
        let a = ex.amplitude_derivatives(s);
        let ap = ex.amplitude_derivatives(s + h);
        let am = ex.amplitude_derivatives(s - h);
        for j in 0..4 {
            let fd = (ap[j] - am[j]) / (2.0 * h);
            assert!((fd - a[j + 1]).abs() < 1e-6 * (1.0 + a[j + 1].abs()), "order {j}");
        }
    }

    #[test]
    fn focus_limit_agrees_with_series() {
        let ex = standard();
        for &t in &[0.4, 0.55, 0.7] {
            assert!((ex.exact(0.0, t) - ex.focus_value(t)).norm() < 1e-9 * ex.focus_value(t).norm());
        }
    }

    #[test]
    fn initial_data_is_recovered() {
        let ex = standard();
        for &r in &[0.2, 0.5, 0.9] {
            let want = ex.amplitude(r) * Complex64::new(0.0, ex.k * r).exp();
            assert!((ex.exact(r, 0.0) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn hessian_closed_form_values() {
        assert!((Radial3dExample::hessian_b(0.0, 0.5) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((Radial3dExample::hessian_b(1.0, 1.0) - Complex64::new(0.6, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn amplitude_at_zero_time_is_half_the_profile() {
        let ex = standard();
        let (a, _) = ex.amplitude_minus(0.0, 0.4).unwrap();
        assert!((a - Complex64::new(ex.amplitude(0.4) / 2.0, 0.0)).norm() < 1e-15);
    }
}
