//! Pseudospectral reference solver for the 2D periodic wave equation.
//!
//! Grids are `K x K` on `[-L/2, L/2)^2` stored row-major: entry `i * K + j`
//! sits at `x = (-L/2 + i h, -L/2 + j h)`. Each Fourier mode is advanced
//! exactly in time.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Minimum grid points per wavelength accepted by [`check_resolution`].
pub const POINTS_PER_WAVELENGTH: f64 = 4.0;

const DUMP_MAGIC: &[u8; 8] = b"GBFIELD1";

/// Complex samples on the periodic `K x K` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField2D {
    pub grid: usize,
    pub box_side: f64,
    pub values: Vec<Complex64>,
}

impl GridField2D {
    pub fn new(grid: usize, box_side: f64, values: Vec<Complex64>) -> Result<Self> {
        if grid < 2 || !grid.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid size must be a power of two, got {grid}")));
        }
        if !(box_side > 0.0) {
            return Err(Error::InvalidInput("box side must be positive".into()));
        }
        if values.len() != grid * grid {
            return Err(Error::ShapeMismatch(format!("{} values for a {grid} x {grid} grid", values.len())));
        }
        Ok(Self { grid, box_side, values })
    }

    pub fn zeros(grid: usize, box_side: f64) -> Result<Self> {
        Self::new(grid, box_side, vec![Complex64::new(0.0, 0.0); grid * grid])
    }

    /// Samples `f(x1, x2)` on the grid.
    pub fn from_fn(grid: usize, box_side: f64, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<Self> {
        let mut out = Self::zeros(grid, box_side)?;
        let h = out.spacing();
        out.values.par_chunks_mut(grid).enumerate().for_each(|(i, row)| {
            let x1 = -box_side / 2.0 + i as f64 * h;
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x1, -box_side / 2.0 + j as f64 * h);
            }
        });
        Ok(out)
    }

    pub fn spacing(&self) -> f64 {
        self.box_side / self.grid as f64
    }

    /// Coordinate of index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.box_side / 2.0 + i as f64 * self.spacing()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.grid == other.grid && self.box_side == other.box_side
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch("grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `h^2 sum |f|^2`.
    pub fn l2_norm_squared(&self) -> f64 {
        let h = self.spacing();
        h * h * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// `u`, `u_t` and the time they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState2D {
    pub u: GridField2D,
    pub ut: GridField2D,
    pub t: f64,
}

impl WaveState2D {
    pub fn new(u: GridField2D, ut: GridField2D, t: f64) -> Result<Self> {
        if !u.same_shape(&ut) {
            return Err(Error::ShapeMismatch("u and u_t live on different grids".into()));
        }
        Ok(Self { u, ut, t })
    }

    pub fn grid(&self) -> usize {
        self.u.grid
    }

    pub fn box_side(&self) -> f64 {
        self.u.box_side
    }
}

/// Angular wavenumbers `(2 pi / L) {0, 1, ..., K/2 - 1, -K/2, ..., -1}`.
pub fn wavenumbers(grid: usize, box_side: f64) -> Vec<f64> {
    let half = grid as i64 / 2;
    (0..grid as i64)
        .map(|i| {
            let m = if i < half { i } else { i - grid as i64 };
            2.0 * PI / box_side * m as f64
        })
        .collect()
}

/// Smallest grid size accepted for frequency `k` on a box of side `L`.
pub fn required_grid(k: f64, box_side: f64) -> f64 {
    POINTS_PER_WAVELENGTH * k * box_side / (2.0 * PI)
}

/// Errors with `ResolutionTooLow` unless `K >= 4 k L / (2 pi)`.
pub fn check_resolution(k: f64, grid: usize, box_side: f64) -> Result<()> {
    let required = required_grid(k, box_side);
    if (grid as f64) < required {
        return Err(Error::ResolutionTooLow { k, grid, required });
    }
    Ok(())
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(grid: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
        }
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = data[i * n + j];
        }
    });
    out
}

fn fft_rows(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(n).for_each(|row| plan.process(row));
}

/// Unnormalized 2D transform in either direction.
fn fft2(values: &[Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    let mut a = values.to_vec();
    fft_rows(&mut a, n, plan);
    let mut b = transpose(&a, n);
    fft_rows(&mut b, n, plan);
    transpose(&b, n)
}

/// Forward DFT (unnormalized), mode `(a, b)` at `a * K + b`.
pub fn forward_dft(field: &GridField2D) -> Vec<Complex64> {
    let plans = Plans::new(field.grid);
    fft2(&field.values, field.grid, &plans.forward)
}

/// Inverse DFT scaled by `1 / K^2`.
pub fn inverse_dft(modes: &[Complex64], grid: usize, box_side: f64) -> Result<GridField2D> {
    let plans = Plans::new(grid);
    if modes.len() != grid * grid {
        return Err(Error::ShapeMismatch(format!("{} modes for a {grid} x {grid} grid", modes.len())));
    }
    let scale = 1.0 / (grid * grid) as f64;
    let mut v = fft2(modes, grid, &plans.inverse);
    v.par_iter_mut().for_each(|z| *z *= scale);
    GridField2D::new(grid, box_side, v)
}

/// Advances `state` to time `t` (either direction) mode by mode.
pub fn propagate(state: &WaveState2D, t: f64) -> WaveState2D {
    let n = state.grid();
    let l = state.box_side();
    let dt = t - state.t;
    let kap = wavenumbers(n, l);
    let plans = Plans::new(n);
    let mut u = fft2(&state.u.values, n, &plans.forward);
    let mut ut = fft2(&state.ut.values, n, &plans.forward);
    u.par_chunks_mut(n).zip(ut.par_chunks_mut(n)).enumerate().for_each(|(a, (ur, vr))| {
        for b in 0..n {
            let w = kap[a].hypot(kap[b]);
            let (u0, v0) = (ur[b], vr[b]);
            if w == 0.0 {
                ur[b] = u0 + v0 * dt;
                vr[b] = v0;
            } else {
                let (s, c) = (w * dt).sin_cos();
                ur[b] = u0 * c + v0 * (s / w);
                vr[b] = -u0 * (w * s) + v0 * c;
            }
        }
    });
    let scale = 1.0 / (n * n) as f64;
    let finish = |modes: Vec<Complex64>| {
        let mut v = fft2(&modes, n, &plans.inverse);
        v.par_iter_mut().for_each(|z| *z *= scale);
        GridField2D {
            grid: n,
            box_side: l,
            values: v,
        }
    };
    WaveState2D {
        u: finish(u),
        ut: finish(ut),
        t,
    }
}

/// [`propagate`] after checking the grid against frequency `k`.
pub fn propagate_checked(state: &WaveState2D, t: f64, k: f64) -> Result<WaveState2D> {
    check_resolution(k, state.grid(), state.box_side())?;
    if state.u.values.iter().chain(&state.ut.values).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidInput("state contains non-finite values".into()));
    }
    Ok(propagate(state, t))
}

/// `(d f / d x1, d f / d x2)` from `i kappa f_hat`.
pub fn spectral_gradient(f: &GridField2D) -> (GridField2D, GridField2D) {
    let n = f.grid;
    let kap = wavenumbers(n, f.box_side);
    let plans = Plans::new(n);
    let modes = fft2(&f.values, n, &plans.forward);
    let mut gx = modes.clone();
    let mut gy = modes;
    gx.par_chunks_mut(n).zip(gy.par_chunks_mut(n)).enumerate().for_each(|(a, (xr, yr))| {
        for b in 0..n {
            xr[b] *= Complex64::new(0.0, kap[a]);
            yr[b] *= Complex64::new(0.0, kap[b]);
        }
    });
    let scale = 1.0 / (n * n) as f64;
    let finish = |m: Vec<Complex64>| {
        let mut v = fft2(&m, n, &plans.inverse);
        v.par_iter_mut().for_each(|z| *z *= scale);
        GridField2D {
            grid: n,
            box_side: f.box_side,
            values: v,
        }
    };
    (finish(gx), finish(gy))
}

/// `(1/2) int |u_t|^2 / c^2 + |grad u|^2 dx` by a grid sum with spectral gradients.
pub fn energy_of_state(state: &WaveState2D, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("wave speed must be positive, got {c}")));
    }
    let (gx, gy) = spectral_gradient(&state.u);
    let h = state.u.spacing();
    let sum: f64 = state
        .ut
        .values
        .par_iter()
        .zip(gx.values.par_iter().zip(gy.values.par_iter()))
        .map(|(t, (x, y))| t.norm_sqr() / (c * c) + x.norm_sqr() + y.norm_sqr())
        .sum();
    Ok(0.5 * h * h * sum)
}

/// Energy norm of the difference of two states on the same grid.
pub fn energy_of_difference(a: &WaveState2D, b: &WaveState2D, c: f64) -> Result<f64> {
    if !a.u.same_shape(&b.u) {
        return Err(Error::ShapeMismatch("states live on different grids".into()));
    }
    let sub = |x: &GridField2D, y: &GridField2D| GridField2D {
        grid: x.grid,
        box_side: x.box_side,
        values: x.values.iter().zip(&y.values).map(|(p, q)| p - q).collect(),
    };
    let d = WaveState2D {
        u: sub(&a.u, &b.u),
        ut: sub(&a.ut, &b.ut),
        t: a.t,
    };
    Ok(energy_of_state(&d, c)?.sqrt())
}

/// Writes `magic, K (u64), L (f64), t (f64)` then `u` and `u_t` as
/// little-endian complex64 pairs.
pub fn write_state(path: &Path, state: &WaveState2D) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(state.grid() as u64).to_le_bytes())?;
    w.write_all(&state.box_side().to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    for v in state.u.values.iter().chain(&state.ut.values) {
        w.write_all(&(v.re as f32).to_le_bytes())?;
        w.write_all(&(v.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file produced by [`write_state`].
pub fn read_state(path: &Path) -> Result<WaveState2D> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::InvalidInput(format!("{} is not a field dump", path.display())));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let grid = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let box_side = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let t = f64::from_le_bytes(b8);
    if grid == 0 || grid > 1 << 15 {
        return Err(Error::InvalidInput(format!("implausible grid size {grid}")));
    }
    let mut read_field = || -> Result<Vec<Complex64>> {
        let mut raw = vec![0u8; grid * grid * 8];
        r.read_exact(&mut raw)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect())
    };
    let u = read_field()?;
    let ut = read_field()?;
    WaveState2D::new(GridField2D::new(grid, box_side, u)?, GridField2D::new(grid, box_side, ut)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_ordering() {
        let k = wavenumbers(8, 2.0 * PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn non_power_of_two_is_rejected() {
        assert!(GridField2D::zeros(12, 1.0).is_err());
        assert!(GridField2D::new(4, 1.0, vec![Complex64::new(0.0, 0.0); 15]).is_err());
    }

    #[test]
    fn resolution_guard() {
        assert!(check_resolution(320.0, 1024, 4.0).is_ok());
        assert!(check_resolution(160.0, 512, 4.0).is_ok());
        assert!(matches!(check_resolution(320.0, 512, 4.0), Err(Error::ResolutionTooLow { .. })));
    }
}
