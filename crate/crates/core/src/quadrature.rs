//! Composite tensor Gauss-Legendre quadrature with panel-doubling error control.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Nodes are Newton-refined roots of `P_n`; weights `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre_nodes(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(2..=64).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels and Gauss order per axis plus the refinement budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub panels: Vec<usize>,
    pub order: Vec<usize>,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_refinements")]
    pub max_refinements: usize,
}

fn default_abs_tol() -> f64 {
    1e-8
}

fn default_max_refinements() -> usize {
    3
}

impl QuadratureSpec {
    pub fn new(panels: Vec<usize>, order: Vec<usize>, abs_tol: f64, max_refinements: usize) -> Result<Self> {
        let spec = Self {
            panels,
            order,
            abs_tol,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same panels and order on every axis.
    pub fn uniform(axes: usize, panels: usize, order: usize) -> Self {
        Self {
            panels: vec![panels; axes],
            order: vec![order; axes],
            abs_tol: default_abs_tol(),
            max_refinements: default_max_refinements(),
        }
    }

    pub fn with_tolerance(mut self, abs_tol: f64, max_refinements: usize) -> Self {
        self.abs_tol = abs_tol;
        self.max_refinements = max_refinements;
        self
    }

    pub fn axes(&self) -> usize {
        self.panels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels.is_empty() || self.panels.len() != self.order.len() {
            return Err(Error::InvalidInput("quadrature panels/order must be non-empty and of equal length".into()));
        }
        if self.panels.iter().any(|&p| p == 0) {
            return Err(Error::InvalidInput("every axis needs at least one panel".into()));
        }
        if let Some(&o) = self.order.iter().find(|&&o| !(2..=64).contains(&o)) {
            return Err(Error::UnsupportedOrder(o));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("abs_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn refined(&self, level: usize) -> Self {
        let mut out = self.clone();
        for p in &mut out.panels {
            *p <<= level;
        }
        out
    }

    /// Raises the panel count on `axis` to at least `min_panels`.
    pub fn with_min_panels(&self, axis: usize, min_panels: usize) -> Self {
        let mut out = self.clone();
        out.panels[axis] = out.panels[axis].max(min_panels);
        out
    }
}

/// Nodes and weights of a composite rule on one interval.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Result<Self> {
        let (x, w) = gauss_legendre_nodes(order)?;
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let half = 0.5 * width;
            let mid = a + half;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor product of per-axis composite rules.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub axes: Vec<CompositeRule>,
}

impl TensorRule {
    pub fn new(bounds: &[(f64, f64)], spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if bounds.len() != spec.axes() {
            return Err(Error::ShapeMismatch(format!(
                "{} integration axes but quadrature spec has {}",
                bounds.len(),
                spec.axes()
            )));
        }
        let axes = bounds
            .iter()
            .zip(spec.panels.iter().zip(&spec.order))
            .map(|(&(lo, hi), (&p, &o))| CompositeRule::new(lo, hi, p, o))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(CompositeRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `index` in row-major order (last axis fastest), writing into `z`.
    pub fn node(&self, index: usize, z: &mut [f64]) -> f64 {
        let mut rest = index;
        let mut w = 1.0;
        for (axis, rule) in self.axes.iter().enumerate().rev() {
            let i = rest % rule.len();
            rest /= rule.len();
            z[axis] = rule.nodes[i];
            w *= rule.weights[i];
        }
        w
    }
}

/// Cascade (pairwise) summation with `O(log n)` state.
///
/// The reduction tree depends only on the number of pushed terms, so results
/// are reproducible for a fixed input sequence.
#[derive(Debug, Clone, Default)]
pub struct PairwiseSum {
    levels: Vec<Option<Complex64>>,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self { levels: Vec::new() }
    }

    pub fn push(&mut self, value: Complex64) {
        let mut carry = value;
        for slot in self.levels.iter_mut() {
            match slot.take() {
                Some(v) => carry += v,
                None => {
                    *slot = Some(carry);
                    return;
                }
            }
        }
        self.levels.push(Some(carry));
    }

    pub fn total(&self) -> Complex64 {
        self.levels.iter().flatten().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    }
}

pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// A converged integral and its refinement history.
#[derive(Debug, Clone)]
pub struct Integral<const N: usize> {
    pub values: [Complex64; N],
    pub error_estimate: f64,
    pub refinements: usize,
    pub estimates: Vec<f64>,
}

/// Integrates a vector-valued function over a box with panel doubling.
///
/// Each level doubles the panels on every axis; the difference between two
/// consecutive levels (max over components, each divided by `scales[i]`) is the
/// error estimate. Returns the finer value once the estimate is below
/// `spec.abs_tol`.
pub fn integrate_box<const N: usize, F>(f: F, bounds: &[(f64, f64)], spec: &QuadratureSpec, scales: [f64; N]) -> Result<Integral<N>>
where
    F: Fn(&[f64]) -> [Complex64; N],
{
    let eval = |s: &QuadratureSpec| -> Result<[Complex64; N]> {
        let rule = TensorRule::new(bounds, s)?;
        let mut acc: [PairwiseSum; N] = std::array::from_fn(|_| PairwiseSum::new());
        let mut z = vec![0.0; bounds.len()];
        for i in 0..rule.len() {
            let w = rule.node(i, &mut z);
            let v = f(&z);
            for (a, vi) in acc.iter_mut().zip(v) {
                a.push(vi * w);
            }
        }
        Ok(std::array::from_fn(|i| acc[i].total()))
    };
    let mut prev = eval(spec)?;
    let mut estimates = Vec::new();
    for level in 1..=spec.max_refinements.max(1) {
        let cur = eval(&spec.refined(level))?;
        let est = prev
            .iter()
            .zip(&cur)
            .zip(&scales)
            .map(|((a, b), s)| (a - b).norm() / s)
            .fold(0.0, f64::max);
        estimates.push(est);
        if est <= spec.abs_tol {
            return Ok(Integral {
                values: cur,
                error_estimate: est,
                refinements: level,
                estimates,
            });
        }
        prev = cur;
    }
    Err(Error::NonConverged {
        estimate: *estimates.last().unwrap(),
        tolerance: spec.abs_tol,
    })
}
