//! 2D beams tangent to the unit circle, forming a fold caustic.
//!
//! With `n = (cos th, sin th)` and `tau = (sin th, -cos th)` the ray launched
//! from `(th, s)` is `x(t) = n + (t + s - 1) tau` with momentum `tau`, the
//! action is `-th + s`, and
//!
//! ```text
//! M = i tau tau^T + b(t, s) n n^T,   b = b0 / (1 + t b0),   b0 = i + 1/(s - 1)
//! A = A0(s) (1 + t b0)^{-1/2}
//! ```
//!
//! The superposition is `(k / 2 pi) int int A exp(i k phi) (1 - s) dth ds`.
//! Rotating `x` by `alpha` multiplies `u_GB` by `exp(-i k alpha)` for
//! integer `k`, so grid fields follow from one radial profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamPhase, ComplexSymMatrix, RealVector};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::superposition::{integrate_superposition, BeamFamily, BeamRates, BeamSample, Want};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusExample {
    pub k: f64,
    pub s0: f64,
    pub s1: f64,
    pub box_side: f64,
    pub include_plus_branch: bool,
}

impl AnnulusExample {
    pub fn new(k: f64, s0: f64, s1: f64, box_side: f64, include_plus_branch: bool) -> Result<Self> {
        if !(k >= 1.0) || k.fract() != 0.0 {
            return Err(Error::InvalidInput(format!("annulus frequency must be a positive integer, got {k}")));
        }
        if !(0.0 < s0 && s0 < s1 && s1 < 1.0) {
            return Err(Error::InvalidInput(format!("need 0 < s0 < s1 < 1, got s0 = {s0}, s1 = {s1}")));
        }
        if !(box_side > 0.0) {
            return Err(Error::InvalidInput("box side must be positive".into()));
        }
        Ok(Self {
            k,
            s0,
            s1,
            box_side,
            include_plus_branch,
        })
    }

    /// Defaults used for the convergence tables: `s in [0.25, 0.75]`, `L = 4`.
    pub fn standard(k: f64) -> Result<Self> {
        Self::new(k, 0.25, 0.75, 4.0, false)
    }

    pub fn initial_amplitude(&self, s: f64) -> f64 {
        if s < self.s0 || s > self.s1 {
            0.0
        } else {
            let a = (s - self.s0) * (s - self.s1);
            a * a
        }
    }

    /// `b(0, s) = i + 1/(s - 1)`
    pub fn b0(s: f64) -> Result<Complex64> {
        if s == 1.0 {
            return Err(Error::SingularHessian { s });
        }
        Ok(Complex64::new(1.0 / (s - 1.0), 1.0))
    }

    /// `b(t, s) = b0 / (1 + t b0)`
    pub fn hessian_b(t: f64, s: f64) -> Result<Complex64> {
        let b0 = Self::b0(s)?;
        Ok(b0 / (1.0 + t * b0))
    }

    /// `(1 + t b0)^{-1/2}` on the principal branch, which is continuous in `t`
    /// from 1 at `t = 0` as long as `1 + t b0` avoids the negative real axis.
    pub fn transport_factor(t: f64, s: f64) -> Result<Complex64> {
        let z = 1.0 + t * Self::b0(s)?;
        if z.im == 0.0 && z.re <= 0.0 {
            return Err(Error::BranchCrossing { t, s });
        }
        Ok(1.0 / z.sqrt())
    }

    /// Beam phase and amplitude for `(th, s)` at time `t` (minus branch).
    pub fn beam(&self, theta: f64, s: f64, t: f64) -> Result<(BeamPhase<2>, Complex64)> {
        let b = self.beam_sample(theta, s, t, false, false)?;
        Ok((b.phase, b.amplitude))
    }

    /// Full beam sample; `plus` selects the branch moving away from the circle.
    pub fn beam_sample(&self, theta: f64, s: f64, t: f64, plus: bool, with_rates: bool) -> Result<BeamSample<2>> {
        let (sn, cs) = theta.sin_cos();
        let n = RealVector::<2>::new(cs, sn);
        let tau = RealVector::<2>::new(sn, -cs);
        let sg = if plus { -1.0 } else { 1.0 };
        let tt = sg * t;
        let b0 = Self::b0(s)?;
        let b = b0 / (1.0 + tt * b0);
        let factor = Self::transport_factor(tt, s)?;
        let amp = self.initial_amplitude(s) * factor;
        let nn = n * n.transpose();
        let tt_proj = tau * tau.transpose();
        let m = nn.map(|v| Complex64::new(v, 0.0)) * b + tt_proj.map(|v| Complex64::new(0.0, v));
        let rates = with_rates.then(|| BeamRates {
            action: Complex64::new(0.0, 0.0),
            center: tau * sg,
            momentum: RealVector::zeros(),
            hessian: nn.map(|v| Complex64::new(v, 0.0)) * (-b * b * sg),
            amplitude: -0.5 * b * amp * sg,
        });
        Ok(BeamSample {
            phase: BeamPhase {
                action: Complex64::new(s - theta, 0.0),
                momentum: tau,
                hessian: ComplexSymMatrix::symmetrized(m),
                center: n + tau * (tt + s - 1.0),
            },
            amplitude: amp,
            rates,
        })
    }

    pub fn family(&self) -> AnnulusFamily {
        AnnulusFamily { example: *self, plus: false }
    }

    /// Default rule: panels grow like `sqrt(k)`; `s` panels are a multiple of 4
    /// so the support edges `0.25, 0.75` fall on panel boundaries.
    pub fn default_quadrature(&self) -> QuadratureSpec {
        let rk = self.k.sqrt();
        let theta_panels = (3.0 * rk).ceil() as usize * 4;
        let s_panels = ((rk / 2.0).ceil() as usize).max(1) * 4;
        QuadratureSpec::new(vec![theta_panels, s_panels], vec![8, 8], 1e-8, 3).expect("valid default rule")
    }

    /// `u_GB` (and `d_t u_GB`) at arbitrary points, directly.
    pub fn superposition_points(&self, targets: &[RealVector<2>], t: f64, quad: &QuadratureSpec, want: Want) -> Result<(Vec<Complex64>, Option<Vec<Complex64>>, Option<f64>)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("annulus superposition needs t >= 0, got {t}")));
        }
        let fam = self.family();
        let mut res = integrate_superposition(&fam, t, self.k, targets, quad, want)?;
        let mut est = res.quad_error_estimate;
        if self.include_plus_branch {
            let plus = AnnulusFamily::plus(*self);
            let other = integrate_superposition(&plus, t, self.k, targets, quad, want)?;
            for (a, b) in res.values.iter_mut().zip(&other.values) {
                *a += b;
            }
            if let (Some(a), Some(b)) = (res.dt_values.as_mut(), other.dt_values.as_ref()) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            est = match (est, other.quad_error_estimate) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
        Ok((res.values, res.dt_values, est))
    }

    /// Radial profile `g(r) = u_GB((r, 0), t)` so that
    /// `u_GB(x) = exp(-i k th_x) g(|x|)`.
    pub fn radial_profile(&self, radii: &[f64], t: f64, quad: &QuadratureSpec, want: Want) -> Result<(Vec<Complex64>, Option<Vec<Complex64>>, Option<f64>)> {
        let targets: Vec<RealVector<2>> = radii.iter().map(|&r| RealVector::<2>::new(r, 0.0)).collect();
        self.superposition_points(&targets, t, quad, want)
    }

    /// `u_GB` and `d_t u_GB` on the `K x K` grid `x_j = -L/2 + j h`.
    ///
    /// One radial evaluation per distinct `|x|^2` on the grid (exact integer
    /// keys), expanded by rotational covariance.
    pub fn grid_fields(&self, grid: usize, t: f64, quad: &QuadratureSpec, want: Want) -> Result<GridEvaluation> {
        let h = self.box_side / grid as f64;
        let half = grid as i64 / 2;
        let mut keys = BTreeMap::new();
        for i in 0..grid as i64 {
            for j in 0..grid as i64 {
                let (a, b) = (i - half, j - half);
                keys.entry(a * a + b * b).or_insert(0usize);
            }
        }
        let radii: Vec<f64> = keys.keys().map(|&m| h * (m as f64).sqrt()).collect();
        for (idx, v) in keys.values_mut().enumerate() {
            *v = idx;
        }
        let (g, gt, est) = self.radial_profile(&radii, t, quad, want)?;
        let mut u = vec![Complex64::new(0.0, 0.0); grid * grid];
        let mut ut = want.dt.then(|| vec![Complex64::new(0.0, 0.0); grid * grid]);
        for i in 0..grid {
            for j in 0..grid {
                let (a, b) = (i as i64 - half, j as i64 - half);
                let idx = keys[&(a * a + b * b)];
                let rot = if a == 0 && b == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let th = (b as f64).atan2(a as f64);
                    Complex64::new(0.0, -self.k * th).exp()
                };
                // row-major: first index is x1, second is x2
                u[i * grid + j] = g[idx] * rot;
                if let (Some(f), Some(d)) = (ut.as_mut(), gt.as_ref()) {
                    f[i * grid + j] = d[idx] * rot;
                }
            }
        }
        Ok(GridEvaluation {
            u,
            ut,
            distinct_radii: radii.len(),
            quad_error_estimate: est,
        })
    }

    /// `max |u_GB|` over the `K x K` grid.
    ///
    /// A coarse radial pass locates the band where `|u_GB|` exceeds
    /// `1e-3` of its peak; only grid radii inside that band are evaluated.
    pub fn grid_sup_norm(&self, grid: usize, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        let h = self.box_side / grid as f64;
        let half = grid as i64 / 2;
        let r_max = h * ((2 * half * half) as f64).sqrt();
        let coarse_n = 2048;
        let step = r_max / (coarse_n - 1) as f64;
        let coarse: Vec<f64> = (0..coarse_n).map(|i| i as f64 * step).collect();
        let (g, _, _) = self.radial_profile(&coarse, t, quad, Want::VALUE)?;
        let peak = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(0.0);
        }
        let inside: Vec<usize> = (0..coarse_n).filter(|&i| g[i].norm() >= 1e-3 * peak).collect();
        let lo = coarse[inside[0].saturating_sub(2)];
        let hi = coarse[(inside[inside.len() - 1] + 2).min(coarse_n - 1)];
        let mut keys = std::collections::BTreeSet::new();
        for a in -half..half {
            for b in -half..half {
                let r = h * ((a * a + b * b) as f64).sqrt();
                if r >= lo && r <= hi {
                    keys.insert(a * a + b * b);
                }
            }
        }
        let radii: Vec<f64> = keys.iter().map(|&m| h * (m as f64).sqrt()).collect();
        let (vals, _, _) = self.radial_profile(&radii, t, quad, Want::VALUE)?;
        Ok(vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// Grid values produced by [`AnnulusExample::grid_fields`].
#[derive(Debug, Clone)]
pub struct GridEvaluation {
    pub u: Vec<Complex64>,
    pub ut: Option<Vec<Complex64>>,
    pub distinct_radii: usize,
    pub quad_error_estimate: Option<f64>,
}

/// The annulus beams over `(th, s) in [0, 2 pi] x [0, 1]` with weight `1 - s`.
/// Amplitudes carry `1 / (2 pi)`.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusFamily {
    pub example: AnnulusExample,
    plus: bool,
}

impl AnnulusFamily {
    pub fn plus(example: AnnulusExample) -> Self {
        Self { example, plus: true }
    }
}

impl BeamFamily<2> for AnnulusFamily {
    fn param_box(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 2.0 * PI), (0.0, 1.0)]
    }

    fn weight(&self, z: &[f64]) -> f64 {
        (1.0 - z[1]).max(0.0)
    }

    fn sample(&self, z: &[f64], t: f64, with_rates: bool) -> Result<Option<BeamSample<2>>> {
        if self.example.initial_amplitude(z[1]) == 0.0 {
            return Ok(None);
        }
        let mut b = self.example.beam_sample(z[0], z[1], t, self.plus, with_rates)?;
        let scale = 1.0 / (2.0 * PI);
        b.amplitude *= scale;
        if let Some(r) = b.rates.as_mut() {
            r.amplitude *= scale;
        }
        Ok(Some(b))
    }
}

/// Rotation by `alpha`.
pub fn rotation(alpha: f64) -> Matrix2<f64> {
    let (s, c) = alpha.sin_cos();
    Matrix2::new(c, -s, s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_hessian_values() {
        let b = AnnulusExample::hessian_b(0.0, 0.5).unwrap();
        assert!((b - Complex64::new(-2.0, 1.0)).norm() < 1e-15);
        let b = AnnulusExample::hessian_b(1.0, 0.5).unwrap();
        assert!((b - Complex64::new(1.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn tangency_is_rejected() {
        assert!(matches!(AnnulusExample::b0(1.0), Err(Error::SingularHessian { .. })));
    }

    #[test]
    fn ray_position_example() {
        let ex = AnnulusExample::standard(80.0).unwrap();
        let (ph, _) = ex.beam(0.0, 0.5, 0.25).unwrap();
        assert!((ph.center - RealVector::<2>::new(1.0, 0.25)).norm() < 1e-15);
    }

    #[test]
    fn amplitude_at_midpoint() {
        let ex = AnnulusExample::standard(80.0).unwrap();
        let (_, a) = ex.beam(1.0, 0.5, 0.0).unwrap();
        assert!((a - Complex64::new(0.00390625, 0.0)).norm() < 1e-17);
    }

    #[test]
    fn non_integer_frequency_is_rejected() {
        assert!(AnnulusExample::standard(80.5).is_err());
    }
}
