//! First-order Gaussian beams for the constant-speed acoustic wave equation.
//!
//! A beam is carried by a Hamiltonian ray `(x(t), p(t))` together with the
//! action `S(t)` and the complex phase Hessian `M(t)`. The phase is
//!
//! ```text
//! phi(x, t) = S + p . (x - gamma) + 1/2 (x - gamma) . M (x - gamma),   gamma = x(t)
//! ```
//!
//! and `M` evolves under the matrix Riccati equation
//!
//! ```text
//! dM/dt = -H_xx - M H_px - H_xp M - M H_pp M.
//! ```
//!
//! Rays, actions and Hessians are integrated with classical fixed-step RK4.
//! Amplitudes are opaque here; each example supplies its own transport law.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealVector<const D: usize> = SVector<f64, D>;
pub type RealMatrix<const D: usize> = SMatrix<f64, D, D>;
pub type ComplexMatrix<const D: usize> = SMatrix<Complex64, D, D>;

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Rays whose momentum drops below this are rejected.
pub const MOMENTUM_GUARD: f64 = 1e-12;
/// Smallest admissible eigenvalue of `Im M` during propagation.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

/// A point `(x, p)` in phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint<const D: usize> {
    pub x: RealVector<D>,
    pub p: RealVector<D>,
}

impl<const D: usize> PhaseSpacePoint<D> {
    pub fn new(x: [f64; D], p: [f64; D]) -> Self {
        assert!((1..=3).contains(&D), "spatial dimension must be 1, 2 or 3");
        Self {
            x: RealVector::from(x),
            p: RealVector::from(p),
        }
    }

    pub fn from_vectors(x: RealVector<D>, p: RealVector<D>) -> Self {
        assert!((1..=3).contains(&D), "spatial dimension must be 1, 2 or 3");
        Self { x, p }
    }

    /// Euclidean distance in `R^{2d}`.
    pub fn distance(&self, other: &Self) -> f64 {
        ((self.x - other.x).norm_squared() + (self.p - other.p).norm_squared()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveMode {
    AcousticPlus,
    AcousticMinus,
}

impl WaveMode {
    pub fn sign(self) -> f64 {
        match self {
            WaveMode::AcousticPlus => 1.0,
            WaveMode::AcousticMinus => -1.0,
        }
    }
}

/// `H(x, p) = +-c |p|` with a constant sound speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub mode: WaveMode,
    pub speed: f64,
}

/// Value and first/second derivatives of the Hamiltonian at one point.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianDerivatives<const D: usize> {
    pub h: f64,
    pub dh_dx: RealVector<D>,
    pub dh_dp: RealVector<D>,
    pub d2h_xx: RealMatrix<D>,
    /// `(i, j) = d^2 H / dx_i dp_j`
    pub d2h_xp: RealMatrix<D>,
    pub d2h_pp: RealMatrix<D>,
}

impl HamiltonianModel {
    pub fn new(mode: WaveMode, speed: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::InvalidInput(format!("sound speed must be positive, got {speed}")));
        }
        Ok(Self { mode, speed })
    }

    pub fn plus(speed: f64) -> Self {
        Self::new(WaveMode::AcousticPlus, speed).expect("positive speed")
    }

    pub fn minus(speed: f64) -> Self {
        Self::new(WaveMode::AcousticMinus, speed).expect("positive speed")
    }

    pub fn value<const D: usize>(&self, point: &PhaseSpacePoint<D>) -> f64 {
        self.mode.sign() * self.speed * point.p.norm()
    }

    /// Exact derivatives of `+-c|p|`; undefined at `p = 0`.
    pub fn eval<const D: usize>(&self, point: &PhaseSpacePoint<D>) -> Result<HamiltonianDerivatives<D>> {
        let norm = point.p.norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroMomentum { norm });
        }
        let sc = self.mode.sign() * self.speed;
        let unit = point.p / norm;
        let projector = RealMatrix::<D>::identity() - unit * unit.transpose();
        Ok(HamiltonianDerivatives {
            h: sc * norm,
            dh_dx: RealVector::zeros(),
            dh_dp: unit * sc,
            d2h_xx: RealMatrix::zeros(),
            d2h_xp: RealMatrix::zeros(),
            d2h_pp: projector * (sc / norm),
        })
    }
}

/// Complex symmetric `d x d` matrix whose imaginary part is positive definite.
///
/// Construction symmetrizes the input, so `M = M^T` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSymMatrix<const D: usize> {
    entries: ComplexMatrix<D>,
}

impl<const D: usize> ComplexSymMatrix<D> {
    /// Symmetrizes `m` and checks that `Im M` is positive definite.
    pub fn new(m: ComplexMatrix<D>) -> Result<Self> {
        let out = Self::symmetrized(m);
        let min_eig = out.min_imag_eigenvalue();
        if !(min_eig > 0.0) {
            return Err(Error::HessianNotPositive { t: f64::NAN, min_eig });
        }
        Ok(out)
    }

    /// Symmetrizes without the positivity check. Used for intermediate RK stages.
    pub fn symmetrized(m: ComplexMatrix<D>) -> Self {
        Self {
            entries: (m + m.transpose()) * Complex64::new(0.5, 0.0),
        }
    }

    /// `a P + b (I - P)` where `P` projects onto `direction`.
    pub fn from_projections(direction: &RealVector<D>, along: Complex64, across: Complex64) -> Result<Self> {
        let unit = direction.normalize();
        let along_proj = (unit * unit.transpose()).map(|v| Complex64::new(v, 0.0));
        let across_proj = ComplexMatrix::<D>::identity() - along_proj;
        Self::new(along_proj * along + across_proj * across)
    }

    pub fn scaled_identity(value: Complex64) -> Result<Self> {
        Self::new(ComplexMatrix::<D>::identity() * value)
    }

    pub fn matrix(&self) -> &ComplexMatrix<D> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries[(r, c)]
    }

    pub fn imag_part(&self) -> RealMatrix<D> {
        self.entries.map(|z| z.im)
    }

    pub fn min_imag_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.imag_part())
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.entries - other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `y . M y`
    pub fn quadratic_form(&self, y: &RealVector<D>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..D {
            for j in 0..D {
                acc += self.entries[(i, j)] * (y[i] * y[j]);
            }
        }
        acc
    }

    /// `M y`
    pub fn apply(&self, y: &RealVector<D>) -> SVector<Complex64, D> {
        let mut out = SVector::<Complex64, D>::zeros();
        for i in 0..D {
            for j in 0..D {
                out[i] += self.entries[(i, j)] * y[j];
            }
        }
        out
    }
}

/// Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<const D: usize>(m: &RealMatrix<D>) -> Vec<f64> {
    let mut a = *m;
    for _sweep in 0..50 {
        let mut off = 0.0;
        for i in 0..D {
            for j in (i + 1)..D {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..D {
            for q in (p + 1)..D {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..D {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..D {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..D).map(|i| a[(i, i)]).collect()
}

/// Full beam data at one time.
#[derive(Debug, Clone, Copy)]
pub struct BeamState<const D: usize> {
    pub t: f64,
    pub ray: PhaseSpacePoint<D>,
    pub action: Complex64,
    pub hessian: ComplexSymMatrix<D>,
    pub amplitude: Complex64,
}

impl<const D: usize> BeamState<D> {
    pub fn phase(&self) -> BeamPhase<D> {
        BeamPhase {
            action: self.action,
            momentum: self.ray.p,
            hessian: self.hessian,
            center: self.ray.x,
        }
    }
}

/// Quadratic phase `S + p.(x - gamma) + 1/2 (x - gamma).M(x - gamma)`.
#[derive(Debug, Clone, Copy)]
pub struct BeamPhase<const D: usize> {
    pub action: Complex64,
    pub momentum: RealVector<D>,
    pub hessian: ComplexSymMatrix<D>,
    pub center: RealVector<D>,
}

impl<const D: usize> BeamPhase<D> {
    pub fn value(&self, x: &RealVector<D>) -> Complex64 {
        let y = x - self.center;
        self.action + self.momentum.dot(&y) + 0.5 * self.hessian.quadratic_form(&y)
    }

    /// `grad phi = p + M (x - gamma)`
    pub fn gradient(&self, x: &RealVector<D>) -> SVector<Complex64, D> {
        let y = x - self.center;
        self.hessian.apply(&y) + self.momentum.map(|v| Complex64::new(v, 0.0))
    }

    /// Lower bound `delta` in `Im phi >= Im S + delta |x - gamma|^2`.
    pub fn decay_rate(&self) -> f64 {
        0.5 * self.hessian.min_imag_eigenvalue()
    }
}

/// `A exp(i k phi(x))`
pub fn evaluate_beam<const D: usize>(phase: &BeamPhase<D>, amplitude: Complex64, x: &RealVector<D>, k: f64) -> Complex64 {
    amplitude * (Complex64::i() * k * phase.value(x)).exp()
}

/// One sample along a ray.
#[derive(Debug, Clone, Copy)]
pub struct RaySample<const D: usize> {
    pub t: f64,
    pub point: PhaseSpacePoint<D>,
    pub action: Complex64,
}

fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidInput("t_final must be finite".into()));
    }
    let n = (t_final.abs() / dt).ceil().max(1.0) as usize;
    Ok((n, t_final / n as f64))
}

#[derive(Clone, Copy)]
struct RayRate<const D: usize> {
    dx: RealVector<D>,
    dp: RealVector<D>,
    ds: f64,
}

fn ray_rate<const D: usize>(model: &HamiltonianModel, point: &PhaseSpacePoint<D>) -> Result<(RayRate<D>, HamiltonianDerivatives<D>)> {
    let hd = model.eval(point)?;
    Ok((
        RayRate {
            dx: hd.dh_dp,
            dp: -hd.dh_dx,
            ds: point.p.dot(&hd.dh_dp) - hd.h,
        },
        hd,
    ))
}

fn check_momentum<const D: usize>(t: f64, point: &PhaseSpacePoint<D>) -> Result<()> {
    let norm = point.p.norm();
    if norm < MOMENTUM_GUARD {
        return Err(Error::StepRejected { t, norm });
    }
    Ok(())
}

/// RK4 trajectory of `(x, p, S)` from `t = 0` to `t_final`.
pub fn propagate_ray<const D: usize>(
    model: &HamiltonianModel,
    start: &PhaseSpacePoint<D>,
    initial_action: Complex64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<RaySample<D>>> {
    let (n, h) = step_count(t_final, dt)?;
    check_momentum(0.0, start)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = RaySample {
        t: 0.0,
        point: *start,
        action: initial_action,
    };
    out.push(cur);
    for i in 0..n {
        let shift = |base: &PhaseSpacePoint<D>, r: &RayRate<D>, f: f64| {
            PhaseSpacePoint::from_vectors(base.x + r.dx * f, base.p + r.dp * f)
        };
        let (k1, _) = ray_rate(model, &cur.point)?;
        let (k2, _) = ray_rate(model, &shift(&cur.point, &k1, 0.5 * h))?;
        let (k3, _) = ray_rate(model, &shift(&cur.point, &k2, 0.5 * h))?;
        let (k4, _) = ray_rate(model, &shift(&cur.point, &k3, h))?;
        let x = cur.point.x + (k1.dx + k2.dx * 2.0 + k3.dx * 2.0 + k4.dx) * (h / 6.0);
        let p = cur.point.p + (k1.dp + k2.dp * 2.0 + k3.dp * 2.0 + k4.dp) * (h / 6.0);
        let ds = (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds) * (h / 6.0);
        let t = (i + 1) as f64 * h;
        cur = RaySample {
            t,
            point: PhaseSpacePoint::from_vectors(x, p),
            action: cur.action + ds,
        };
        check_momentum(t, &cur.point)?;
        out.push(cur);
    }
    Ok(out)
}

fn riccati_rate<const D: usize>(hd: &HamiltonianDerivatives<D>, m: &ComplexMatrix<D>) -> ComplexMatrix<D> {
    let c = |a: &RealMatrix<D>| a.map(|v| Complex64::new(v, 0.0));
    let hxx = c(&hd.d2h_xx);
    let hxp = c(&hd.d2h_xp);
    let hpx = c(&hd.d2h_xp.transpose());
    let hpp = c(&hd.d2h_pp);
    let rate = -hxx - m * hpx - hxp * m - m * hpp * m;
    *ComplexSymMatrix::symmetrized(rate).matrix()
}

/// Joint RK4 integration of ray, action and Hessian. Amplitude is copied through.
pub fn propagate_beam<const D: usize>(
    model: &HamiltonianModel,
    initial: &BeamState<D>,
    t_final: f64,
    dt: f64,
) -> Result<Vec<BeamState<D>>> {
    let (n, h) = step_count(t_final, dt)?;
    check_momentum(initial.t, &initial.ray)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(*initial);
    let mut cur = *initial;
    let shift = |base: &PhaseSpacePoint<D>, r: &RayRate<D>, f: f64| {
        PhaseSpacePoint::from_vectors(base.x + r.dx * f, base.p + r.dp * f)
    };
    let sym = |m: ComplexMatrix<D>| *ComplexSymMatrix::symmetrized(m).matrix();
    for i in 0..n {
        let m0 = *cur.hessian.matrix();
        let (r1, d1) = ray_rate(model, &cur.ray)?;
        let q1 = riccati_rate(&d1, &m0);
        let p2 = shift(&cur.ray, &r1, 0.5 * h);
        let m2 = sym(m0 + q1 * Complex64::new(0.5 * h, 0.0));
        let (r2, d2) = ray_rate(model, &p2)?;
        let q2 = riccati_rate(&d2, &m2);
        let p3 = shift(&cur.ray, &r2, 0.5 * h);
        let m3 = sym(m0 + q2 * Complex64::new(0.5 * h, 0.0));
        let (r3, d3) = ray_rate(model, &p3)?;
        let q3 = riccati_rate(&d3, &m3);
        let p4 = shift(&cur.ray, &r3, h);
        let m4 = sym(m0 + q3 * Complex64::new(h, 0.0));
        let (r4, d4) = ray_rate(model, &p4)?;
        let q4 = riccati_rate(&d4, &m4);

        let x = cur.ray.x + (r1.dx + r2.dx * 2.0 + r3.dx * 2.0 + r4.dx) * (h / 6.0);
        let p = cur.ray.p + (r1.dp + r2.dp * 2.0 + r3.dp * 2.0 + r4.dp) * (h / 6.0);
        let ds = (r1.ds + 2.0 * r2.ds + 2.0 * r3.ds + r4.ds) * (h / 6.0);
        let two = Complex64::new(2.0, 0.0);
        let m = m0 + (q1 + q2 * two + q3 * two + q4) * Complex64::new(h / 6.0, 0.0);
        let t = initial.t + (i + 1) as f64 * h;
        let hessian = ComplexSymMatrix::symmetrized(m);
        let min_eig = hessian.min_imag_eigenvalue();
        if !(min_eig >= POSITIVITY_FLOOR) {
            return Err(Error::HessianNotPositive { t, min_eig });
        }
        cur = BeamState {
            t,
            ray: PhaseSpacePoint::from_vectors(x, p),
            action: cur.action + ds,
            hessian,
            amplitude: cur.amplitude,
        };
        check_momentum(t, &cur.ray)?;
        out.push(cur);
    }
    Ok(out)
}

/// Hessian history `M(t)` along the ray launched from `start`.
///
/// The ray is integrated jointly so that every RK stage sees a consistent
/// `(x, p)`.
pub fn propagate_hessian<const D: usize>(
    model: &HamiltonianModel,
    start: &PhaseSpacePoint<D>,
    m0: &ComplexSymMatrix<D>,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, ComplexSymMatrix<D>)>> {
    let min_eig = m0.min_imag_eigenvalue();
    if !(min_eig > 0.0) {
        return Err(Error::HessianNotPositive { t: 0.0, min_eig });
    }
    let initial = BeamState {
        t: 0.0,
        ray: *start,
        action: Complex64::new(0.0, 0.0),
        hessian: *m0,
        amplitude: Complex64::new(1.0, 0.0),
    };
    Ok(propagate_beam(model, &initial, t_final, dt)?
        .into_iter()
        .map(|s| (s.t, s.hessian))
        .collect())
}

/// Phase-space separation ratios `|X(t; a) - X(t; b)| / |a - b|` over `times`.
///
/// Returns `(min, max)`.
pub fn non_squeezing_ratio<const D: usize>(
    model: &HamiltonianModel,
    a: &PhaseSpacePoint<D>,
    b: &PhaseSpacePoint<D>,
    times: &[f64],
) -> Result<(f64, f64)> {
    let initial = a.distance(b);
    if !(initial > 0.0) {
        return Err(Error::InvalidInput("non-squeezing ratio needs distinct start points".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &t in times {
        let (xa, xb) = if t == 0.0 {
            (*a, *b)
        } else {
            let ra = propagate_ray(model, a, Complex64::new(0.0, 0.0), t, DEFAULT_DT)?;
            let rb = propagate_ray(model, b, Complex64::new(0.0, 0.0), t, DEFAULT_DT)?;
            (ra.last().unwrap().point, rb.last().unwrap().point)
        };
        let ratio = xa.distance(&xb) / initial;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_momentum_derivatives() {
        let m = HamiltonianModel::plus(1.0);
        let d = m.eval(&PhaseSpacePoint::new([0.0, 0.0], [1.0, 0.0])).unwrap();
        assert_eq!(d.h, 1.0);
        assert_eq!(d.dh_dp, RealVector::from([1.0, 0.0]));
        assert_abs_diff_eq!(d.d2h_pp, RealMatrix::<2>::new(0.0, 0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn homogeneity_in_three_dimensions() {
        let m = HamiltonianModel::plus(1.0);
        let d = m.eval(&PhaseSpacePoint::new([0.0; 3], [0.0, 0.0, 2.0])).unwrap();
        assert_eq!(d.h, 2.0);
        assert_eq!(d.dh_dp, RealVector::from([0.0, 0.0, 1.0]));
    }

    #[test]
    fn projection_hessian_for_three_four_five() {
        let m = HamiltonianModel::plus(1.0);
        let d = m.eval(&PhaseSpacePoint::new([0.0, 0.0], [3.0, 4.0])).unwrap();
        assert_eq!(d.h, 5.0);
        let expect = RealMatrix::<2>::new(16.0 / 125.0, -12.0 / 125.0, -12.0 / 125.0, 9.0 / 125.0);
        assert_abs_diff_eq!(d.d2h_pp, expect, epsilon = 1e-15);
    }

    #[test]
    fn minus_mode_flips_sign() {
        let m = HamiltonianModel::minus(2.0);
        let d = m.eval(&PhaseSpacePoint::new([0.0, 0.0], [3.0, 4.0])).unwrap();
        assert_eq!(d.h, -10.0);
        assert_abs_diff_eq!(d.dh_dp, RealVector::from([-1.2, -1.6]), epsilon = 1e-15);
    }

    #[test]
    fn zero_momentum_is_rejected() {
        let m = HamiltonianModel::plus(1.0);
        assert!(matches!(
            m.eval(&PhaseSpacePoint::new([0.0, 0.0], [0.0, 0.0])),
            Err(Error::ZeroMomentum { .. })
        ));
        assert!(HamiltonianModel::new(WaveMode::AcousticPlus, 0.0).is_err());
    }

    #[test]
    fn straight_ray_keeps_action() {
        let m = HamiltonianModel::plus(1.0);
        let ray = propagate_ray(&m, &PhaseSpacePoint::new([0.0, 0.0], [1.0, 0.0]), c(0.3, 0.0), 2.0, 1e-3).unwrap();
        let last = ray.last().unwrap();
        assert_abs_diff_eq!(last.t, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(last.point.x, RealVector::from([2.0, 0.0]), epsilon = 1e-12);
        assert_abs_diff_eq!(last.point.p, RealVector::from([1.0, 0.0]), epsilon = 1e-12);
        assert_abs_diff_eq!(last.action.re, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn bad_step_is_rejected() {
        let m = HamiltonianModel::plus(1.0);
        let x = PhaseSpacePoint::new([0.0], [1.0]);
        assert!(propagate_ray(&m, &x, c(0.0, 0.0), 1.0, 0.0).is_err());
        assert!(propagate_ray(&m, &PhaseSpacePoint::new([0.0], [0.0]), c(0.0, 0.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn symmetrization_is_exact() {
        let raw = ComplexMatrix::<2>::new(c(0.0, 1.0), c(1.0, 0.2), c(3.0, 0.0), c(0.0, 2.0));
        let m = ComplexSymMatrix::new(raw).unwrap();
        assert_eq!(m.matrix()[(0, 1)], m.matrix()[(1, 0)]);
        assert_eq!(m.get(1, 0), c(2.0, 0.1));
    }

    #[test]
    fn indefinite_imaginary_part_is_rejected() {
        let raw = ComplexMatrix::<2>::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -0.5));
        assert!(ComplexSymMatrix::new(raw).is_err());
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let m = RealMatrix::<3>::new(2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0);
        let mut e = symmetric_eigenvalues(&m);
        e.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e[2], 5.0, epsilon = 1e-13);
    }

    #[test]
    fn on_ray_value_is_amplitude_times_action_phase() {
        let phase = BeamPhase {
            action: c(0.25, 0.0),
            momentum: RealVector::from([1.0, 0.0]),
            hessian: ComplexSymMatrix::scaled_identity(c(0.0, 1.0)).unwrap(),
            center: RealVector::from([0.5, -0.5]),
        };
        let a = c(0.3, -0.4);
        let v = evaluate_beam(&phase, a, &RealVector::from([0.5, -0.5]), 40.0);
        assert_abs_diff_eq!(v.norm(), a.norm(), epsilon = 1e-14);
        let expect = a * (Complex64::i() * 10.0).exp();
        assert_abs_diff_eq!(v.re, expect.re, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, expect.im, epsilon = 1e-14);
        // off the ray the magnitude decays like exp(-k delta |y|^2)
        let off = evaluate_beam(&phase, a, &RealVector::from([0.5, 0.5]), 40.0);
        assert_abs_diff_eq!(off.norm(), a.norm() * (-20.0f64).exp(), epsilon = 1e-20);
    }

    #[test]
    fn parallel_rays_do_not_squeeze() {
        let m = HamiltonianModel::plus(1.0);
        let a = PhaseSpacePoint::new([0.0, 0.0], [1.0, 0.0]);
        let b = PhaseSpacePoint::new([0.0, 1.0], [1.0, 0.0]);
        let (lo, hi) = non_squeezing_ratio(&m, &a, &b, &[0.0, 0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_rays_stay_comparable() {
        let m = HamiltonianModel::plus(1.0);
        let a = PhaseSpacePoint::new([0.0, 0.0], [1.0, 0.0]);
        let b = PhaseSpacePoint::new([0.0, 0.0], [0.0, 1.0]);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let (lo, hi) = non_squeezing_ratio(&m, &a, &b, &times).unwrap();
        // brute force: |X - X'|^2 = 2 + 2 t^2, |X0 - X0'|^2 = 2
        let brute: Vec<f64> = times.iter().map(|t| (1.0 + t * t).sqrt()).collect();
        assert_abs_diff_eq!(lo, brute[0], epsilon = 1e-12);
        assert_abs_diff_eq!(hi, brute[10], epsilon = 1e-12);
        assert!(lo >= 0.5 && hi <= 2.0);
        assert!(non_squeezing_ratio(&m, &a, &a, &times).is_err());
    }
}
