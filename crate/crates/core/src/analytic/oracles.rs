//! Closed-form initial superpositions used as quadrature oracles.
//!
//! All are `u_GB(x, 0) = k^{m/2} int a(z) exp(i k phi(x; z)) dz` with
//! `M = i I` (or `(1 + i) I`) and Gaussian amplitudes, so the integrals are
//! elementary.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::SVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamPhase, ComplexSymMatrix, RealVector};
use crate::error::{Error, Result};
use crate::superposition::{BeamSample, InitialManifold};

/// Amplitude truncation box half-width for Gaussian amplitudes.
pub const TRUNCATION: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleId {
    /// Point source in 3D: directions on the unit sphere.
    E1SpherePoint,
    /// Point source with `p = z in R^d` and Gaussian `a(p)`.
    E1Flat,
    /// Split parameters `z = (z1, z2)`, `x0 = (0, z2, 0)`, `p = (z1, 0, 0)`.
    /// `z1` takes the first `r >= 1` coordinates so that `p` never vanishes
    /// identically.
    E2Split,
    /// WKB data `exp((ik - 1)|x|^2 / 2)`: `x0 = p = z`, `S0 = |z|^2 / 2`.
    E4Wkb,
    /// `x0 = p = z`, `S0 = |z|^2`.
    E5Gaussian,
}

impl FromStr for OracleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e1-sphere-point" | "e1" => Ok(Self::E1SpherePoint),
            "e1-flat" => Ok(Self::E1Flat),
            "e2-split" | "e2" => Ok(Self::E2Split),
            "e4-wkb" | "e4" => Ok(Self::E4Wkb),
            "e5-gaussian" | "e5" => Ok(Self::E5Gaussian),
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }
}

/// Norm whose growth in `k` is predicted for an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingNorm {
    Energy,
    GradientL2,
    L2,
}

/// Dimensions of an oracle: space `d`, manifold `m`, and for E2 the split `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDims {
    pub d: usize,
    pub m: usize,
    #[serde(default)]
    pub r: usize,
}

impl OracleId {
    pub fn validate(self, dims: OracleDims) -> Result<()> {
        let OracleDims { d, m, r } = dims;
        let ok = (1..=3).contains(&d)
            && match self {
                Self::E1SpherePoint => d == 3 && m == 2,
                Self::E1Flat | Self::E4Wkb | Self::E5Gaussian => m == d,
                Self::E2Split => r >= 1 && r <= m && m <= d,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{self:?} does not support d = {d}, m = {m}, r = {r}")))
        }
    }

    /// Predicted exponent `alpha` in `norm ~ k^alpha` and the norm it refers to.
    pub fn scaling_exponent(self, dims: OracleDims) -> (ScalingNorm, f64) {
        let (d, m) = (dims.d as f64, dims.m as f64);
        match self {
            Self::E1SpherePoint | Self::E1Flat => (ScalingNorm::Energy, 1.0 - (d - m) / 4.0),
            Self::E2Split => (ScalingNorm::GradientL2, 1.0 - (d - m) / 4.0),
            Self::E4Wkb => (ScalingNorm::GradientL2, 1.0),
            Self::E5Gaussian => (ScalingNorm::L2, -d / 4.0),
        }
    }
}

/// Closed-form value of `u_GB(x, 0)`.
pub fn closed_form(id: OracleId, x: &[f64], k: f64, dims: OracleDims) -> Result<Complex64> {
    id.validate(dims)?;
    if x.len() != dims.d {
        return Err(Error::ShapeMismatch(format!("point has {} coordinates, expected {}", x.len(), dims.d)));
    }
    let d = dims.d as f64;
    let x2: f64 = x.iter().map(|v| v * v).sum();
    Ok(match id {
        Oracle::E1SpherePoint => {
            let r = x2.sqrt();
            let kr = k * r;
            let sinc = if kr < 1e-8 { 1.0 - kr * kr / 6.0 } else { kr.sin() / kr };
            Complex64::new(0.0, 2.0 * k * sinc * (-k * x2 / 2.0).exp())
        }
        Oracle::E1Flat => Complex64::new(k.powf(d / 2.0) * (-(k * k + k) * x2 / 2.0).exp(), 0.0),
        Oracle::E2Split => {
            let (m, r) = (dims.m, dims.r);
            let n1: f64 = x[..r].iter().map(|v| v * v).sum();
            let n2: f64 = x[r..m].iter().map(|v| v * v).sum();
            let n3: f64 = x[m..].iter().map(|v| v * v).sum();
            let mf = m as f64;
            let pref = k.powf(mf / 2.0) * (2.0 * PI).powf(mf / 2.0) * (1.0 + k).powf((r as f64 - mf) / 2.0);
            Complex64::new(pref * (-k * (n1 + n3) / 2.0 - k * k * n1 / 2.0 - k * n2 / (2.0 * (1.0 + k))).exp(), 0.0)
        }
        Oracle::E4Wkb => {
            let pref = k.powf(d / 2.0) * (2.0 * PI / (k + 1.0)).powf(d / 2.0);
            Complex64::new(-k / (2.0 * k + 2.0) * x2, k * x2 / 2.0).exp() * pref
        }
        Oracle::E5Gaussian => {
            let pref = k.powf(d / 2.0) * (2.0 * PI / (k + 1.0)).powf(d / 2.0);
            Complex64::new(-k * x2 / 2.0, k * k / (1.0 + k) * x2).exp() * pref
        }
    })
}

use OracleId as Oracle;

/// Closed-form `grad u_GB(x, 0)`.
pub fn closed_form_gradient<const D: usize>(id: OracleId, x: &RealVector<D>, k: f64, dims: OracleDims) -> Result<SVector<Complex64, D>> {
    let u = closed_form(id, x.as_slice(), k, dims)?;
    let g = |j: usize| -> Complex64 {
        let xj = x[j];
        match id {
            Oracle::E4Wkb => Complex64::new(-k / (k + 1.0) * xj, k * xj),
            Oracle::E5Gaussian => Complex64::new(-k * xj, 2.0 * k * k / (1.0 + k) * xj),
            Oracle::E1Flat => Complex64::new(-(k * k + k) * xj, 0.0),
            Oracle::E2Split => {
                if j < dims.r {
                    Complex64::new(-k * (1.0 + k) * xj, 0.0)
                } else if j < dims.m {
                    Complex64::new(-k / (1.0 + k) * xj, 0.0)
                } else {
                    Complex64::new(-k * xj, 0.0)
                }
            }
            Oracle::E1SpherePoint => {
                let r = x.norm();
                if r == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let kr = k * r;
                // d/dr log(sin(kr)/(kr) e^{-k r^2/2})
                let dlog = k / kr.tan() - 1.0 / r - k * r;
                Complex64::new(dlog * xj / r, 0.0)
            }
        }
    };
    Ok(SVector::from_fn(|j, _| g(j) * u))
}

fn gaussian_beam<const D: usize>(center: RealVector<D>, momentum: RealVector<D>, action: f64, hessian: Complex64, amplitude: f64) -> BeamSample<D> {
    BeamSample {
        phase: BeamPhase {
            action: Complex64::new(action, 0.0),
            momentum,
            hessian: ComplexSymMatrix::symmetrized(nalgebra::SMatrix::<Complex64, D, D>::identity() * hessian),
            center,
        },
        amplitude: Complex64::new(amplitude, 0.0),
        rates: None,
    }
}

fn only_initial(t: f64) -> Result<()> {
    if t != 0.0 {
        return Err(Error::InvalidInput("closed-form oracles only define initial data".into()));
    }
    Ok(())
}

/// Initial manifold whose superposition equals [`closed_form`].
///
/// Gaussian amplitudes are truncated to `|z_i| <= TRUNCATION`. The chart
/// defines data at `t = 0` only.
pub fn oracle_manifold<const D: usize>(id: OracleId, dims: OracleDims) -> Result<InitialManifold<D>> {
    oracle_manifold_truncated(id, dims, TRUNCATION)
}

/// [`oracle_manifold`] with Gaussian amplitudes cut at `|z_i| <= half_width`.
pub fn oracle_manifold_truncated<const D: usize>(id: OracleId, dims: OracleDims, half_width: f64) -> Result<InitialManifold<D>> {
    id.validate(dims)?;
    if !(half_width > 0.0) {
        return Err(Error::InvalidInput(format!("truncation must be positive, got {half_width}")));
    }
    if dims.d != D {
        return Err(Error::ShapeMismatch(format!("oracle dimension {} does not match D = {D}", dims.d)));
    }
    let tr = (-half_width, half_width);
    match id {
        Oracle::E1SpherePoint => {
            let bx = vec![(0.0, PI), (0.0, 2.0 * PI)];
            InitialManifold::new(
                bx,
                vec![1],
                move |z, t, _| {
                    only_initial(t)?;
                    let mut p = RealVector::<D>::zeros();
                    p[0] = z[0].sin() * z[1].cos();
                    p[1] = z[0].sin() * z[1].sin();
                    p[2] = z[0].cos();
                    Ok(Some(gaussian_beam(RealVector::zeros(), p, 0.0, Complex64::i(), 0.0).with_amplitude(Complex64::new(0.0, 1.0 / (2.0 * PI)))))
                },
                |z| z[0].sin().max(0.0),
            )
        }
        Oracle::E1Flat => InitialManifold::new(
            vec![tr; D],
            vec![],
            move |z, t, _| {
                only_initial(t)?;
                let p = RealVector::<D>::from_column_slice(z);
                let a = (-p.norm_squared() / 2.0).exp() / (2.0 * PI).powf(D as f64 / 2.0);
                Ok(Some(gaussian_beam(RealVector::zeros(), p, 0.0, Complex64::i(), a)))
            },
            |_| 1.0,
        ),
        Oracle::E2Split => {
            let (m, r) = (dims.m, dims.r);
            InitialManifold::new(
                vec![tr; m],
                vec![],
                move |z, t, _| {
                    only_initial(t)?;
                    let mut x0 = RealVector::<D>::zeros();
                    let mut p = RealVector::<D>::zeros();
                    for j in 0..r {
                        p[j] = z[j];
                    }
                    for j in r..m {
                        x0[j] = z[j];
                    }
                    let a = (-z.iter().map(|v| v * v).sum::<f64>() / 2.0).exp();
                    Ok(Some(gaussian_beam(x0, p, 0.0, Complex64::i(), a)))
                },
                |_| 1.0,
            )
        }
        Oracle::E4Wkb | Oracle::E5Gaussian => {
            let (s_scale, m_diag) = if id == Oracle::E4Wkb {
                (0.5, Complex64::new(1.0, 1.0))
            } else {
                (1.0, Complex64::i())
            };
            InitialManifold::new(
                vec![tr; D],
                vec![],
                move |z, t, _| {
                    only_initial(t)?;
                    let v = RealVector::<D>::from_column_slice(z);
                    let n2 = v.norm_squared();
                    Ok(Some(gaussian_beam(v, v, s_scale * n2, m_diag, (-n2 / 2.0).exp())))
                },
                |_| 1.0,
            )
        }
    }
}

trait WithAmplitude {
    fn with_amplitude(self, a: Complex64) -> Self;
}

impl<const D: usize> WithAmplitude for BeamSample<D> {
    fn with_amplitude(mut self, a: Complex64) -> Self {
        self.amplitude = a;
        self
    }
}
