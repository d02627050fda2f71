//! Experiment configuration, validation and named presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::{OracleDims, OracleId};
use crate::error::{Error, Result};
use crate::metrics::{DenominatorKind, NormKind};
use crate::quadrature::QuadratureSpec;
use crate::spectral::check_resolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleKind {
    Spherical,
    Radial3d,
    Annulus,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpec {
    pub kind: NormKind,
    pub denominator: DenominatorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub size: usize,
    #[serde(default = "default_side")]
    pub side: f64,
}

fn default_side() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub panels: Vec<usize>,
    pub order: Vec<usize>,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default)]
    pub max_refinements: usize,
}

fn default_tol() -> f64 {
    1e-8
}

impl QuadratureConfig {
    pub fn spec(&self) -> Result<QuadratureSpec> {
        QuadratureSpec::new(self.panels.clone(), self.order.clone(), self.abs_tol, self.max_refinements)
    }
}

/// Radial measure used for the energy norm of radially symmetric fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RadialMeasure {
    /// `4 pi r^2 dr`, the energy over the ball.
    #[default]
    Ball,
    /// `dr` along a ray.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radial3dParams {
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default)]
    pub measure: RadialMeasure,
}

fn default_r0() -> f64 {
    0.1
}

fn default_r1() -> f64 {
    1.0
}

impl Default for Radial3dParams {
    fn default() -> Self {
        Self { r0: 0.1, r1: 1.0, measure: RadialMeasure::Ball }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusParams {
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default = "default_s1")]
    pub s1: f64,
    #[serde(default)]
    pub include_plus_branch: bool,
}

fn default_s0() -> f64 {
    0.25
}

fn default_s1() -> f64 {
    0.75
}

impl Default for AnnulusParams {
    fn default() -> Self {
        Self { s0: 0.25, s1: 0.75, include_plus_branch: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub id: OracleId,
    pub d: usize,
    pub m: usize,
    #[serde(default)]
    pub r: usize,
    /// Also measure the predicted-growth norm of `u_GB` on the sample box.
    #[serde(default)]
    pub scaling: bool,
}

impl OracleParams {
    pub fn dims(&self) -> OracleDims {
        OracleDims { d: self.d, m: self.m, r: self.r }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub example: ExampleKind,
    pub k_values: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub radial3d: Radial3dParams,
    #[serde(default)]
    pub annulus: AnnulusParams,
    #[serde(default)]
    pub oracle: Option<OracleParams>,
    /// Record `sup |u_GB|` per `(k, t)` and the growth exponents between `k` and `2k`.
    #[serde(default)]
    pub sup_rates: bool,
    /// Dump beam and reference grid states.
    #[serde(default)]
    pub emit_fields: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| bad(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(bad("name must not be empty"));
        }
        if self.k_values.is_empty() {
            return Err(bad("k_values must not be empty"));
        }
        if self.k_values.iter().any(|k| !(k.is_finite() && *k >= 1.0)) {
            return Err(bad("every k must be finite and at least 1"));
        }
        if self.k_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("k_values must be strictly ascending"));
        }
        if self.times.is_empty() {
            return Err(bad("times must not be empty"));
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(bad("times must be finite and non-negative"));
        }
        if let Some(q) = &self.quadrature {
            q.spec().map_err(|e| bad(format!("quadrature: {e}")))?;
        }
        let mut seen = Vec::new();
        for n in &self.norms {
            if seen.contains(&n.kind) {
                return Err(bad(format!("norm {:?} listed twice", n.kind)));
            }
            seen.push(n.kind);
            if !self.allowed_norms().contains(&(n.kind, n.denominator)) {
                return Err(bad(format!(
                    "norm {:?} with denominator {:?} is not available for {:?}",
                    n.kind, n.denominator, self.example
                )));
            }
        }
        match self.example {
            ExampleKind::Radial3d => {
                if self.times.iter().any(|t| *t <= 0.0) {
                    return Err(bad("radial3d times must be positive"));
                }
                let p = self.radial3d;
                if !(0.0 < p.r0 && p.r0 < p.r1) {
                    return Err(bad("radial3d needs 0 < r0 < r1"));
                }
                self.expect_axes(2)?;
            }
            ExampleKind::Spherical => self.expect_axes(1)?,
            ExampleKind::Annulus => {
                if self.k_values.iter().any(|k| k.fract() != 0.0) {
                    return Err(bad("annulus k must be an integer"));
                }
                let p = self.annulus;
                if !(0.0 < p.s0 && p.s0 < p.s1 && p.s1 < 1.0) {
                    return Err(bad("annulus needs 0 < s0 < s1 < 1"));
                }
                if !self.norms.is_empty() || self.sup_rates || self.emit_fields {
                    let g = self.grid.as_ref().ok_or_else(|| bad("annulus runs need a grid"))?;
                    if !g.size.is_power_of_two() || g.size < 2 {
                        return Err(bad("grid size must be a power of two"));
                    }
                    if !(g.side > 0.0 && g.side.is_finite()) {
                        return Err(bad("grid side must be positive"));
                    }
                    let kmax = *self.k_values.last().unwrap();
                    check_resolution(kmax, g.size, g.side).map_err(|e| bad(e.to_string()))?;
                }
                self.expect_axes(2)?;
            }
            ExampleKind::Oracle => {
                let o = self.oracle.as_ref().ok_or_else(|| bad("oracle runs need an [oracle] table"))?;
                o.id.validate(o.dims()).map_err(|e| bad(e.to_string()))?;
                if self.times.iter().any(|t| *t != 0.0) {
                    return Err(bad("oracles are initial-data checks: times must be [0.0]"));
                }
                if o.scaling && !matches!(o.id, OracleId::E4Wkb | OracleId::E5Gaussian) {
                    return Err(bad("scaling norms are available for e4-wkb and e5-gaussian only"));
                }
                self.expect_axes(o.m)?;
            }
        }
        if self.sup_rates && self.example != ExampleKind::Annulus {
            return Err(bad("sup_rates is only available for the annulus"));
        }
        if self.emit_fields && self.example != ExampleKind::Annulus {
            return Err(bad("emit_fields is only available for the annulus"));
        }
        Ok(())
    }

    fn expect_axes(&self, axes: usize) -> Result<()> {
        match &self.quadrature {
            Some(q) if q.panels.len() != axes => Err(bad(format!("quadrature must have {axes} axes for {:?}", self.example))),
            _ => Ok(()),
        }
    }

    /// `(norm, denominator)` pairs each example can report.
    pub fn allowed_norms(&self) -> Vec<(NormKind, DenominatorKind)> {
        use DenominatorKind as Dn;
        use NormKind as N;
        match self.example {
            ExampleKind::Spherical => vec![(N::Energy, Dn::Absolute), (N::Energy, Dn::UgbEnergy), (N::Point, Dn::UGbAtT)],
            ExampleKind::Radial3d => vec![(N::Energy, Dn::UgbEnergy), (N::Point, Dn::UGbAtT)],
            ExampleKind::Annulus => vec![(N::Energy, Dn::UgbEnergy), (N::Linf, Dn::UAt0), (N::L2, Dn::UAt0)],
            ExampleKind::Oracle => vec![(N::Linf, Dn::UAt0)],
        }
    }

    /// Output directory: the configured one or `results/<name>`.
    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("results").join(&self.name))
    }
}

pub const PRESETS: [&str; 8] = [
    "table1",
    "table2",
    "table3",
    "table4",
    "fig1-qualitative",
    "sharpness",
    "oracle-e4-scaling",
    "oracle-e5-scaling",
];

fn norm(kind: NormKind, denominator: DenominatorKind) -> NormSpec {
    NormSpec { kind, denominator }
}

fn base(name: &str, example: ExampleKind, k_values: Vec<f64>, times: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        example,
        k_values,
        times,
        norms: Vec::new(),
        grid: None,
        quadrature: None,
        radial3d: Radial3dParams::default(),
        annulus: AnnulusParams::default(),
        oracle: None,
        sup_rates: false,
        emit_fields: false,
        output: None,
    }
}

/// Named configuration reproducing one of the reference studies.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    use DenominatorKind as Dn;
    use NormKind as N;
    let cfg = match name {
        "table1" => {
            let mut c = base(name, ExampleKind::Radial3d, vec![320.0, 640.0], vec![0.4, 0.55, 0.7]);
            c.norms = vec![norm(N::Point, Dn::UGbAtT)];
            c
        }
        "table2" => {
            let mut c = base(name, ExampleKind::Radial3d, vec![320.0, 640.0], vec![0.4, 0.5]);
            c.norms = vec![norm(N::Energy, Dn::UgbEnergy)];
            c
        }
        "table3" | "table4" => {
            let mut c = base(name, ExampleKind::Annulus, vec![80.0, 160.0], vec![0.15, 0.3, 0.8]);
            c.norms = if name == "table3" {
                vec![norm(N::Linf, Dn::UAt0)]
            } else {
                vec![norm(N::Energy, Dn::UgbEnergy)]
            };
            c.grid = Some(GridConfig { size: 512, side: 4.0 });
            c
        }
        "fig1-qualitative" => {
            let mut c = base(name, ExampleKind::Annulus, vec![160.0, 320.0], vec![0.0, 0.15, 0.42, 0.45, 0.5, 0.8]);
            c.grid = Some(GridConfig { size: 1024, side: 4.0 });
            c.sup_rates = true;
            c
        }
        "sharpness" => {
            let mut c = base(name, ExampleKind::Spherical, vec![80.0, 160.0, 320.0, 640.0], vec![0.5]);
            c.norms = vec![norm(N::Energy, Dn::Absolute)];
            c
        }
        "oracle-e4-scaling" | "oracle-e5-scaling" => {
            let id = if name == "oracle-e4-scaling" { OracleId::E4Wkb } else { OracleId::E5Gaussian };
            let mut c = base(name, ExampleKind::Oracle, vec![16.0, 32.0, 64.0, 128.0], vec![0.0]);
            c.norms = vec![norm(N::Linf, Dn::UAt0)];
            c.oracle = Some(OracleParams { id, d: 2, m: 2, r: 0, scaling: true });
            c
        }
        other => return Err(bad(format!("unknown preset '{other}' (known: {})", PRESETS.join(", ")))),
    };
    cfg.validate()?;
    Ok(cfg)
}
