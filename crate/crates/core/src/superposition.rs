//! Phase-space superpositions `u_GB(x, t) = k^{m/2} int_Sigma w(z) A(t; z) exp(i k phi(x, t; z)) dz`.
//!
//! The manifold is sampled once per refinement level on a composite tensor
//! Gauss-Legendre grid. Every target is then summed independently (pairwise,
//! in node order), so results do not depend on the thread count.

use std::sync::Arc;

use nalgebra::SVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::beam::{BeamPhase, ComplexMatrix, RealVector};
use crate::error::{Error, Result};
use crate::quadrature::{CompositeRule, PairwiseSum, QuadratureSpec};

/// Nodes with `k Im phi` above this are skipped; their weight is below `e^-40`.
pub const CULL_EXPONENT: f64 = 40.0;

/// Time derivatives of the beam data at one node.
#[derive(Debug, Clone, Copy)]
pub struct BeamRates<const D: usize> {
    pub action: Complex64,
    pub center: RealVector<D>,
    pub momentum: RealVector<D>,
    pub hessian: ComplexMatrix<D>,
    pub amplitude: Complex64,
}

/// Beam phase and amplitude at one manifold node and one time.
#[derive(Debug, Clone, Copy)]
pub struct BeamSample<const D: usize> {
    pub phase: BeamPhase<D>,
    pub amplitude: Complex64,
    pub rates: Option<BeamRates<D>>,
}

impl<const D: usize> BeamSample<D> {
    /// `d phi / dt = S' - p.gamma' + p'.y - gamma'.M y + 1/2 y.M' y`
    pub fn phase_rate(&self, x: &RealVector<D>) -> Option<Complex64> {
        let r = self.rates.as_ref()?;
        let y = x - self.phase.center;
        let my = self.phase.hessian.apply(&y);
        let mut gm = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..D {
            gm += my[i] * r.center[i];
            for j in 0..D {
                q += r.hessian[(i, j)] * (y[i] * y[j]);
            }
        }
        Some(r.action - self.phase.momentum.dot(&r.center) + r.momentum.dot(&y) - gm + 0.5 * q)
    }
}

/// A parameterized family of beams over a box `Sigma` in `R^m`.
pub trait BeamFamily<const D: usize>: Sync {
    fn param_box(&self) -> Vec<(f64, f64)>;

    fn dim(&self) -> usize {
        self.param_box().len()
    }

    /// Jacobian factor of the chart; must be non-negative.
    fn weight(&self, z: &[f64]) -> f64;

    /// Beam data at `z` and time `t`; `None` where the amplitude vanishes.
    fn sample(&self, z: &[f64], t: f64, with_rates: bool) -> Result<Option<BeamSample<D>>>;
}

type ChartFn<const D: usize> = dyn Fn(&[f64], f64, bool) -> Result<Option<BeamSample<D>>> + Send + Sync;
type WeightFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Chart `z -> (x0, p0, S0, M0, A0)` with its weight, optionally carried in time.
///
/// `beams(z, t, rates)` returns the beam at time `t`; at `t = 0` it is the
/// initial chart.
#[derive(Clone)]
pub struct InitialManifold<const D: usize> {
    pub dim_m: usize,
    pub param_box: Vec<(f64, f64)>,
    pub periodic_axes: Vec<usize>,
    beams: Arc<ChartFn<D>>,
    weight: Arc<WeightFn>,
}

impl<const D: usize> std::fmt::Debug for InitialManifold<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialManifold")
            .field("d", &D)
            .field("dim_m", &self.dim_m)
            .field("param_box", &self.param_box)
            .field("periodic_axes", &self.periodic_axes)
            .finish()
    }
}

impl<const D: usize> InitialManifold<D> {
    pub fn new<B, W>(param_box: Vec<(f64, f64)>, periodic_axes: Vec<usize>, beams: B, weight: W) -> Result<Self>
    where
        B: Fn(&[f64], f64, bool) -> Result<Option<BeamSample<D>>> + Send + Sync + 'static,
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let dim_m = param_box.len();
        if !(1..=2 * D).contains(&dim_m) {
            return Err(Error::InvalidInput(format!("manifold dimension {dim_m} outside 1..={}", 2 * D)));
        }
        if param_box.iter().any(|&(a, b)| !(b > a)) {
            return Err(Error::InvalidInput("parameter box must have positive extent".into()));
        }
        if periodic_axes.iter().any(|&a| a >= dim_m) {
            return Err(Error::InvalidInput("periodic axis out of range".into()));
        }
        Ok(Self {
            dim_m,
            param_box,
            periodic_axes,
            beams: Arc::new(beams),
            weight: Arc::new(weight),
        })
    }

    /// Wraps any family as a manifold.
    pub fn from_family<F>(family: F, periodic_axes: Vec<usize>) -> Result<Self>
    where
        F: BeamFamily<D> + Send + 'static,
    {
        let family = Arc::new(family);
        let f2 = Arc::clone(&family);
        Self::new(
            family.param_box(),
            periodic_axes,
            move |z, t, r| family.sample(z, t, r),
            move |z| f2.weight(z),
        )
    }

    /// Initial data at `z`.
    pub fn initial(&self, z: &[f64]) -> Result<Option<BeamSample<D>>> {
        (self.beams)(z, 0.0, false)
    }

    /// Sum of two manifolds over the same box: amplitudes add node by node.
    ///
    /// Both charts must share the phase; only the amplitude channel is summed.
    pub fn with_amplitudes_summed(&self, other: &Self) -> Result<Self> {
        if self.param_box != other.param_box {
            return Err(Error::ShapeMismatch("manifolds live on different parameter boxes".into()));
        }
        let a = Arc::clone(&self.beams);
        let b = Arc::clone(&other.beams);
        Self::new(
            self.param_box.clone(),
            self.periodic_axes.clone(),
            move |z, t, r| {
                let sa = a(z, t, r)?;
                let sb = b(z, t, r)?;
                Ok(match (sa, sb) {
                    (None, None) => None,
                    (Some(s), None) | (None, Some(s)) => Some(s),
                    (Some(mut s), Some(o)) => {
                        s.amplitude += o.amplitude;
                        if let (Some(rs), Some(ro)) = (s.rates.as_mut(), o.rates.as_ref()) {
                            rs.amplitude += ro.amplitude;
                        }
                        Some(s)
                    }
                })
            },
            {
                let w = Arc::clone(&self.weight);
                move |z| w(z)
            },
        )
    }
}

impl<const D: usize> BeamFamily<D> for InitialManifold<D> {
    fn param_box(&self) -> Vec<(f64, f64)> {
        self.param_box.clone()
    }

    fn weight(&self, z: &[f64]) -> f64 {
        (self.weight)(z)
    }

    fn sample(&self, z: &[f64], t: f64, with_rates: bool) -> Result<Option<BeamSample<D>>> {
        (self.beams)(z, t, with_rates)
    }
}

/// Which channels to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Want {
    pub value: bool,
    pub dt: bool,
    pub grad: bool,
}

impl Want {
    pub const VALUE: Want = Want {
        value: true,
        dt: false,
        grad: false,
    };
    pub const VALUE_DT: Want = Want {
        value: true,
        dt: true,
        grad: false,
    };
    pub const ALL: Want = Want {
        value: true,
        dt: true,
        grad: true,
    };
}

/// Superposition values on a target list.
#[derive(Debug, Clone)]
pub struct SuperpositionResult<const D: usize> {
    pub values: Vec<Complex64>,
    pub dt_values: Option<Vec<Complex64>>,
    pub grad_values: Option<Vec<SVector<Complex64, D>>>,
    /// Largest per-target refinement estimate; `None` for a fixed rule.
    pub quad_error_estimate: Option<f64>,
    /// Deepest refinement level any target needed.
    pub refinements: usize,
}

#[derive(Clone, Copy)]
struct Node<const D: usize> {
    sample: BeamSample<D>,
    weight: f64,
}

struct Cell {
    start: usize,
    end: usize,
    center: Vec<f64>,
    radius: f64,
    min_decay: f64,
    min_im_action: f64,
}

struct NodeSet<const D: usize> {
    nodes: Vec<Node<D>>,
    cells: Vec<Cell>,
}

fn build_nodes<const D: usize, F: BeamFamily<D> + ?Sized>(
    family: &F,
    bounds: &[(f64, f64)],
    spec: &QuadratureSpec,
    t: f64,
    with_rates: bool,
) -> Result<NodeSet<D>> {
    let rules = bounds
        .iter()
        .zip(spec.panels.iter().zip(&spec.order))
        .map(|(&(lo, hi), (&p, &o))| CompositeRule::new(lo, hi, p, o))
        .collect::<Result<Vec<_>>>()?;
    let m = bounds.len();
    let cell_count: usize = spec.panels.iter().product();
    let per_cell: usize = spec.order.iter().product();

    let build_cell = |c: usize| -> Result<(Vec<Node<D>>, Option<(Vec<f64>, f64, f64, f64)>)> {
        let mut panel = vec![0usize; m];
        let mut rest = c;
        for a in (0..m).rev() {
            panel[a] = rest % spec.panels[a];
            rest /= spec.panels[a];
        }
        let mut out = Vec::new();
        let mut z = vec![0.0; m];
        for j in 0..per_cell {
            let mut rest = j;
            let mut w = 1.0;
            for a in (0..m).rev() {
                let o = spec.order[a];
                let idx = panel[a] * o + rest % o;
                rest /= o;
                z[a] = rules[a].nodes[idx];
                w *= rules[a].weights[idx];
            }
            let jac = family.weight(&z);
            if !(jac >= 0.0) {
                return Err(Error::ChartFailure {
                    z: z.clone(),
                    reason: format!("negative or undefined weight {jac}"),
                });
            }
            if jac == 0.0 {
                continue;
            }
            let sample = match family.sample(&z, t, with_rates) {
                Ok(Some(s)) => s,
                Ok(None) => continue,
                Err(e) => {
                    return Err(Error::ChartFailure {
                        z: z.clone(),
                        reason: e.to_string(),
                    })
                }
            };
            if sample.phase.momentum.norm() == 0.0 {
                return Err(Error::ChartFailure {
                    z: z.clone(),
                    reason: "zero momentum".into(),
                });
            }
            out.push(Node { sample, weight: w * jac });
        }
        if out.is_empty() {
            return Ok((out, None));
        }
        let mut center = vec![0.0; D];
        for n in &out {
            for (c, g) in center.iter_mut().zip(n.sample.phase.center.iter()) {
                *c += g;
            }
        }
        center.iter_mut().for_each(|c| *c /= out.len() as f64);
        let mut radius = 0.0f64;
        let mut min_decay = f64::INFINITY;
        let mut min_im = f64::INFINITY;
        for n in &out {
            let d2: f64 = center.iter().zip(n.sample.phase.center.iter()).map(|(c, g)| (c - g) * (c - g)).sum();
            radius = radius.max(d2.sqrt());
            min_decay = min_decay.min(n.sample.phase.decay_rate());
            min_im = min_im.min(n.sample.phase.action.im);
        }
        Ok((out, Some((center, radius, min_decay.max(0.0), min_im))))
    };

    let per: Vec<_> = (0..cell_count).into_par_iter().map(build_cell).collect::<Result<Vec<_>>>()?;
    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    for (ns, bound) in per {
        if let Some((center, radius, min_decay, min_im_action)) = bound {
            let start = nodes.len();
            nodes.extend(ns);
            cells.push(Cell {
                start,
                end: nodes.len(),
                center,
                radius,
                min_decay,
                min_im_action,
            });
        }
    }
    Ok(NodeSet { nodes, cells })
}

struct TargetSums<const D: usize> {
    value: Complex64,
    dt: Complex64,
    grad: SVector<Complex64, D>,
}

fn sum_target<const D: usize>(set: &NodeSet<D>, x: &RealVector<D>, k: f64, want: Want) -> TargetSums<D> {
    let ik = Complex64::new(0.0, k);
    let mut sv = PairwiseSum::new();
    let mut sd = PairwiseSum::new();
    let mut sg: [PairwiseSum; D] = std::array::from_fn(|_| PairwiseSum::new());
    for cell in &set.cells {
        let d2: f64 = cell.center.iter().zip(x.iter()).map(|(c, xi)| (c - xi) * (c - xi)).sum();
        let gap = (d2.sqrt() - cell.radius).max(0.0);
        if k * (cell.min_im_action + cell.min_decay * gap * gap) > CULL_EXPONENT {
            continue;
        }
        for node in &set.nodes[cell.start..cell.end] {
            let ph = &node.sample.phase;
            let phi = ph.value(x);
            if k * phi.im > CULL_EXPONENT {
                continue;
            }
            let e = (ik * phi).exp() * node.weight;
            let a = node.sample.amplitude;
            if want.value {
                sv.push(a * e);
            }
            if want.dt {
                let rate = node.sample.phase_rate(x).unwrap_or_default();
                let da = node.sample.rates.map(|r| r.amplitude).unwrap_or_default();
                sd.push((da + ik * rate * a) * e);
            }
            if want.grad {
                let g = ph.gradient(x);
                for i in 0..D {
                    sg[i].push(ik * g[i] * a * e);
                }
            }
        }
    }
    TargetSums {
        value: sv.total(),
        dt: sd.total(),
        grad: SVector::from_fn(|i, _| sg[i].total()),
    }
}

/// Evaluates the superposition and the requested derivatives at each target.
///
/// With `quad.max_refinements == 0` the base rule is used as is. Otherwise each
/// target is compared between consecutive panel-doubling levels (derivative
/// channels divided by `k`) until the difference is within `quad.abs_tol`.
pub fn integrate_superposition<const D: usize, F: BeamFamily<D> + ?Sized>(
    family: &F,
    t: f64,
    k: f64,
    targets: &[RealVector<D>],
    quad: &QuadratureSpec,
    want: Want,
) -> Result<SuperpositionResult<D>> {
    if !(k >= 1.0) {
        return Err(Error::InvalidInput(format!("k must be at least 1, got {k}")));
    }
    quad.validate()?;
    let bounds = family.param_box();
    if bounds.len() != quad.axes() {
        return Err(Error::ShapeMismatch(format!(
            "manifold has {} parameters but quadrature has {} axes",
            bounds.len(),
            quad.axes()
        )));
    }
    let m = bounds.len();
    let prefactor = k.powf(m as f64 / 2.0);
    let distance = |a: &TargetSums<D>, b: &TargetSums<D>| -> f64 {
        let mut d = 0.0f64;
        if want.value {
            d = d.max((a.value - b.value).norm() * prefactor);
        }
        if want.dt {
            d = d.max((a.dt - b.dt).norm() * prefactor / k);
        }
        if want.grad {
            d = d.max((a.grad - b.grad).iter().map(|z| z.norm()).fold(0.0, f64::max) * prefactor / k);
        }
        d
    };

    let base = build_nodes(family, &bounds, quad, t, want.dt)?;
    let mut current: Vec<TargetSums<D>> = targets.par_iter().map(|x| sum_target(&base, x, k, want)).collect();
    drop(base);
    let mut estimates: Vec<Option<f64>> = vec![None; targets.len()];
    let mut depth = vec![0usize; targets.len()];
    let mut pending: Vec<usize> = if quad.max_refinements > 0 { (0..targets.len()).collect() } else { Vec::new() };
    let mut last_failure = f64::INFINITY;
    for l in 1..=quad.max_refinements {
        if pending.is_empty() {
            break;
        }
        let set = build_nodes(family, &bounds, &quad.refined(l), t, want.dt)?;
        let finer: Vec<TargetSums<D>> = pending.par_iter().map(|&i| sum_target(&set, &targets[i], k, want)).collect();
        let mut still = Vec::new();
        last_failure = 0.0;
        for (&i, f) in pending.iter().zip(finer) {
            let d = distance(&current[i], &f);
            current[i] = f;
            estimates[i] = Some(d);
            depth[i] = l;
            if d > quad.abs_tol {
                last_failure = last_failure.max(d);
                still.push(i);
            }
        }
        pending = still;
    }
    if !pending.is_empty() {
        return Err(Error::NonConverged {
            estimate: last_failure,
            tolerance: quad.abs_tol,
        });
    }
    let est = estimates.iter().flatten().copied().reduce(f64::max);
    let deepest = depth.iter().copied().max().unwrap_or(0);
    let scale = Complex64::new(prefactor, 0.0);
    Ok(SuperpositionResult {
        values: current.iter().map(|s| s.value * scale).collect(),
        dt_values: want.dt.then(|| current.iter().map(|s| s.dt * scale).collect()),
        grad_values: want.grad.then(|| current.iter().map(|s| s.grad * scale).collect()),
        quad_error_estimate: est,
        refinements: deepest,
    })
}
