//! Experiment pipelines and the on-disk run layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExampleKind, ExperimentConfig, RadialMeasure};
use crate::analytic::oracles::{closed_form, oracle_manifold_truncated, ScalingNorm, TRUNCATION};
use crate::analytic::{AnnulusExample, OracleDims, OracleId, Radial3dExample, SphericalExample};
use crate::beam::RealVector;
use crate::error::{Error, Result};
use crate::metrics::{eoc, rate_fit, sup_norm_rate, DenominatorKind, EocTable, ErrorRecord, NormKind};
use crate::quadrature::{CompositeRule, QuadratureSpec};
use crate::spectral::{propagate_checked, write_state, GridField2D, WaveState2D};
use crate::superposition::{integrate_superposition, Want};

/// Bookkeeping for one `(k, t)` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub label: String,
    pub k: f64,
    pub t: f64,
    pub max_refinements: usize,
    pub quad_error_estimate: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupRecord {
    pub k: f64,
    pub t: f64,
    pub sup: f64,
}

/// `log2` growth of `sup|u(t)| / sup|u(0)|` from `k` to `k2 = 2k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRecord {
    pub t: f64,
    pub k: f64,
    pub k2: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub k: f64,
    pub norm: ScalingNorm,
    pub value: f64,
    pub predicted_exponent: f64,
}

/// Least-squares slope of `log(quantity)` against `log k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitRecord {
    pub quantity: String,
    pub t: f64,
    pub slope: f64,
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub records: Vec<ErrorRecord>,
    pub sups: Vec<SupRecord>,
    pub betas: Vec<BetaRecord>,
    pub scaling: Vec<ScalingRecord>,
    pub fits: Vec<RateFitRecord>,
    pub provenance: Vec<Provenance>,
}

impl RunResults {
    /// Convergence table for one norm.
    pub fn table(&self, kind: NormKind) -> Result<EocTable> {
        let recs: Vec<ErrorRecord> = self.records.iter().filter(|r| r.norm_kind == kind).copied().collect();
        EocTable::from_records(&recs)
    }

    pub fn norms(&self) -> Vec<NormKind> {
        let mut out = Vec::new();
        for r in &self.records {
            if !out.contains(&r.norm_kind) {
                out.push(r.norm_kind);
            }
        }
        out
    }

    pub fn error(&self, kind: NormKind, t: f64, k: f64) -> Option<f64> {
        self.records.iter().find(|r| r.norm_kind == kind && r.t == t && r.k == k).map(|r| r.error)
    }

    pub fn beta(&self, t: f64) -> Option<f64> {
        self.betas.iter().find(|b| b.t == t).map(|b| b.beta)
    }

    pub fn fit(&self, quantity: &str) -> Option<&RateFitRecord> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub version: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub provenance: Vec<Provenance>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Recompute even when a complete run with the same config exists.
    pub force: bool,
    /// Overrides the configured output directory.
    pub output_dir: Option<PathBuf>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILURE_MARKER: &str = "FAILED";

/// Runs an experiment, writing tables and a manifest into the output directory.
///
/// A complete run with an identical config is returned as is unless
/// `force` is set. On failure the partial results, the manifest and a
/// `FAILED` marker holding the error are written before the error is returned.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    config.validate()?;
    let dir = opts.output_dir.clone().unwrap_or_else(|| config.output_dir());
    std::fs::create_dir_all(&dir)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    if !opts.force {
        if let Ok(text) = std::fs::read_to_string(&manifest_path) {
            if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
                if m.status == RunStatus::Complete && m.config == *config {
                    log::info!("{} is up to date in {}", config.name, dir.display());
                    return Ok(m);
                }
            }
        }
    }
    let marker = dir.join(FAILURE_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker)?;
    }
    let start = Instant::now();
    let fields = config.emit_fields.then(|| dir.join("fields"));
    let mut results = RunResults::default();
    let outcome = evaluate_into(config, &mut results, fields.as_deref());
    let mut outputs = write_outputs(config, &results, &dir)?;
    if let Some(f) = &fields {
        if f.exists() {
            outputs.push("fields/".to_string());
        }
    }
    let manifest = RunManifest {
        name: config.name.clone(),
        status: if outcome.is_ok() { RunStatus::Complete } else { RunStatus::Failed },
        error: outcome.as_ref().err().map(|e| e.to_string()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        outputs,
        provenance: results.provenance.clone(),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    match outcome {
        Ok(()) => Ok(manifest),
        Err(e) => {
            std::fs::write(&marker, format!("{e}\n"))?;
            Err(e)
        }
    }
}

/// Computes all results for `config` in memory.
pub fn evaluate(config: &ExperimentConfig) -> Result<RunResults> {
    let mut out = RunResults::default();
    evaluate_into(config, &mut out, None)?;
    Ok(out)
}

/// Like [`evaluate`], keeping whatever was computed before a failure in `out`.
pub fn evaluate_into(config: &ExperimentConfig, out: &mut RunResults, fields_dir: Option<&Path>) -> Result<()> {
    config.validate()?;
    match config.example {
        ExampleKind::Radial3d => run_radial3d(config, out)?,
        ExampleKind::Spherical => run_spherical(config, out)?,
        ExampleKind::Annulus => run_annulus(config, out, fields_dir)?,
        ExampleKind::Oracle => run_oracle(config, out)?,
    }
    add_error_fits(config, out);
    Ok(())
}

fn write_outputs(config: &ExperimentConfig, results: &RunResults, dir: &Path) -> Result<Vec<String>> {
    let mut outputs = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        std::fs::write(dir.join(name), text)?;
        outputs.push(name.to_string());
        Ok(())
    };
    put("config.toml", config.to_toml_string()?)?;
    for kind in results.norms() {
        let table = results.table(kind)?;
        put(&format!("errors_{}.csv", norm_name(kind)), table.to_csv_string()?)?;
    }
    put("records.json", serde_json::to_string_pretty(&results.records)?)?;
    if !results.sups.is_empty() {
        put("sups.csv", csv_of(&results.sups)?)?;
    }
    if !results.betas.is_empty() {
        put("sup_rates.csv", csv_of(&results.betas)?)?;
    }
    if !results.scaling.is_empty() {
        put("scaling.csv", csv_of(&results.scaling)?)?;
    }
    if !results.fits.is_empty() {
        put("fits.csv", csv_of(&results.fits)?)?;
    }
    Ok(outputs)
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn norm_name(kind: NormKind) -> &'static str {
    match kind {
        NormKind::Energy => "energy",
        NormKind::Linf => "linf",
        NormKind::L2 => "l2",
        NormKind::Point => "point",
    }
}

fn add_error_fits(config: &ExperimentConfig, out: &mut RunResults) {
    if config.k_values.len() < 2 || config.example == ExampleKind::Oracle {
        return;
    }
    for kind in out.norms() {
        for &t in &config.times {
            let pts: Vec<(f64, f64)> = out
                .records
                .iter()
                .filter(|r| r.norm_kind == kind && r.t == t && r.error > 0.0)
                .map(|r| (r.k, r.error))
                .collect();
            if pts.len() >= 2 {
                if let Ok(slope) = rate_fit(&pts) {
                    out.fits.push(RateFitRecord {
                        quantity: format!("error_{}", norm_name(kind)),
                        t,
                        slope,
                        predicted: None,
                    });
                }
            }
        }
    }
}

fn provenance(label: &str, k: f64, t: f64, quad: &QuadratureSpec, est: Option<f64>, start: Instant) -> Provenance {
    let p = Provenance {
        label: label.to_string(),
        k,
        t,
        max_refinements: quad.max_refinements,
        quad_error_estimate: est,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    log::info!("{label}: k = {k}, t = {t} ({:.1} s)", p.wall_seconds);
    p
}

fn relative(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Energy errors of the radial 3D example over `r in [0, r1 + t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEnergyErrors {
    /// Relative to `||u_GB||_E` with the ball measure `4 pi r^2 dr`.
    pub ball: f64,
    /// Same ratio with the line measure `dr`.
    pub line: f64,
}

/// Default `(s, v)` rule for the radial 3D reduced integral.
pub fn radial3d_default_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(vec![80, 80], vec![5, 5], 1e-8, 0).expect("valid rule")
}

/// Relative energy errors of `u_GB` against the exact radial 3D solution.
///
/// The `r` rule has `floor(k R / 2)` panels of order 5 on `[0, R]` with
/// `R = r1 + t`; each radius raises the `v` panels to `ceil(k r / 3)`.
pub fn radial3d_energy_errors(ex: &Radial3dExample, t: f64, base: &QuadratureSpec) -> Result<RadialEnergyErrors> {
    let r_max = ex.r1 + t;
    let panels = ((ex.k * r_max / 2.0) as usize).max(1);
    let rule = CompositeRule::new(0.0, r_max, panels, 5)?;
    let terms: Vec<(f64, f64, f64, f64)> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&r, &w)| {
            let q = ex.panels_for_radius(r, base);
            let g = ex.superposition_jet(r, t, &q)?;
            let e = ex.exact_jet(r, t);
            let diff = (g.ut - e.ut).norm_sqr() + (g.ur - e.ur).norm_sqr();
            let den = g.ut.norm_sqr() + g.ur.norm_sqr();
            Ok((w * r * r * diff, w * r * r * den, w * diff, w * den))
        })
        .collect::<Result<_>>()?;
    let sum = |f: fn(&(f64, f64, f64, f64)) -> f64| terms.iter().map(f).sum::<f64>();
    Ok(RadialEnergyErrors {
        ball: relative(sum(|v| v.0).sqrt(), sum(|v| v.1).sqrt())?,
        line: relative(sum(|v| v.2).sqrt(), sum(|v| v.3).sqrt())?,
    })
}

fn quad_or(config: &ExperimentConfig, default: QuadratureSpec) -> Result<QuadratureSpec> {
    match &config.quadrature {
        Some(q) => q.spec(),
        None => Ok(default),
    }
}

fn run_radial3d(config: &ExperimentConfig, out: &mut RunResults) -> Result<()> {
    let p = config.radial3d;
    let base = quad_or(config, radial3d_default_quadrature())?;
    for &k in &config.k_values {
        let ex = Radial3dExample::new(k, p.r0, p.r1)?;
        for &t in &config.times {
            for n in &config.norms {
                let start = Instant::now();
                let error = match n.kind {
                    NormKind::Point => {
                        let g = ex.superposition(0.0, t, &base)?;
                        relative((ex.exact(0.0, t) - g).norm(), g.norm())?
                    }
                    NormKind::Energy => {
                        let e = radial3d_energy_errors(&ex, t, &base)?;
                        match p.measure {
                            RadialMeasure::Ball => e.ball,
                            RadialMeasure::Line => e.line,
                        }
                    }
                    other => return Err(Error::Config(format!("norm {other:?} is not available for radial3d"))),
                };
                out.records.push(ErrorRecord::new(t, k, n.kind, error, n.denominator)?);
                out.provenance.push(provenance(&format!("radial3d/{}", norm_name(n.kind)), k, t, &base, None, start));
            }
        }
    }
    Ok(())
}

/// Default `s` rule for the spherical reduced integral.
pub fn spherical_default_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(vec![40], vec![8], 1e-8, 0).expect("valid rule")
}

/// Energy of `u_GB - u` and of `u_GB` over the ball `|x| <= t + 12 / sqrt(k)`.
///
/// Returns `(||u_GB - u||_E, ||u_GB||_E)`.
pub fn spherical_energy_norms(ex: &SphericalExample, t: f64, base: &QuadratureSpec) -> Result<(f64, f64)> {
    let k = ex.k;
    let r_max = t + 12.0 / k.sqrt();
    let rule = CompositeRule::new(0.0, r_max, (k * r_max / 2.0) as usize + 20, 6)?;
    let terms: Vec<(f64, f64)> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&r, &w)| {
            let q = base.with_min_panels(0, (k * r / 2.0) as usize);
            let g = ex.superposition_jet(r, t, &q)?;
            let e = ex.exact_jet(r, t);
            let diff = (g.ut - e.ut).norm_sqr() + (g.ur - e.ur).norm_sqr();
            let den = g.ut.norm_sqr() + g.ur.norm_sqr();
            let m = 4.0 * std::f64::consts::PI * r * r * w / 2.0;
            Ok((m * diff, m * den))
        })
        .collect::<Result<_>>()?;
    let a: f64 = terms.iter().map(|v| v.0).sum();
    let b: f64 = terms.iter().map(|v| v.1).sum();
    Ok((a.sqrt(), b.sqrt()))
}

fn run_spherical(config: &ExperimentConfig, out: &mut RunResults) -> Result<()> {
    let base = quad_or(config, spherical_default_quadrature())?;
    for &k in &config.k_values {
        let ex = SphericalExample::new(k)?;
        for &t in &config.times {
            for n in &config.norms {
                let start = Instant::now();
                let error = match (n.kind, n.denominator) {
                    (NormKind::Point, _) => {
                        let g = ex.superposition(0.0, t, &base)?;
                        relative((ex.exact(0.0, t) - g).norm(), g.norm())?
                    }
                    (NormKind::Energy, DenominatorKind::Absolute) => spherical_energy_norms(&ex, t, &base)?.0,
                    (NormKind::Energy, _) => {
                        let (a, b) = spherical_energy_norms(&ex, t, &base)?;
                        relative(a, b)?
                    }
                    (other, _) => return Err(Error::Config(format!("norm {other:?} is not available for spherical"))),
                };
                out.records.push(ErrorRecord::new(t, k, n.kind, error, n.denominator)?);
                out.provenance.push(provenance(&format!("spherical/{}", norm_name(n.kind)), k, t, &base, None, start));
            }
        }
    }
    Ok(())
}

/// Default annulus rule: the example's base rule used as a fixed rule.
pub fn annulus_default_quadrature(ex: &AnnulusExample) -> QuadratureSpec {
    let mut q = ex.default_quadrature();
    q.max_refinements = 0;
    q
}

/// `u_GB` and `d_t u_GB` on the periodic grid as a wave state.
pub fn annulus_state(ex: &AnnulusExample, grid: usize, t: f64, quad: &QuadratureSpec) -> Result<(WaveState2D, Option<f64>)> {
    let g = ex.grid_fields(grid, t, quad, Want::VALUE_DT)?;
    let ut = g.ut.ok_or_else(|| Error::InvalidInput("time derivative missing".into()))?;
    let state = WaveState2D::new(GridField2D::new(grid, ex.box_side, g.u)?, GridField2D::new(grid, ex.box_side, ut)?, t)?;
    Ok((state, g.quad_error_estimate))
}

fn field_name(kind: &str, k: f64, t: f64) -> String {
    format!("{kind}_k{k}_t{t}.bin")
}

fn run_annulus(config: &ExperimentConfig, out: &mut RunResults, fields_dir: Option<&Path>) -> Result<()> {
    let p = config.annulus;
    let need_fields = !config.norms.is_empty() || fields_dir.is_some();
    let mut sups: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let key = |k: f64, t: f64| (k.to_bits(), t.to_bits());
    if let Some(d) = fields_dir {
        std::fs::create_dir_all(d)?;
    }
    for &k in &config.k_values {
        let grid = config.grid.clone().ok_or_else(|| Error::Config("annulus runs need a grid".into()))?;
        let ex = AnnulusExample::new(k, p.s0, p.s1, grid.side, p.include_plus_branch)?;
        let quad = quad_or(config, annulus_default_quadrature(&ex))?;
        let mut state0 = None;
        if need_fields {
            let start = Instant::now();
            let (s0, est) = annulus_state(&ex, grid.size, 0.0, &quad)?;
            out.provenance.push(provenance("annulus/fields", k, 0.0, &quad, est, start));
            if let Some(d) = fields_dir {
                write_state(&d.join(field_name("gb", k, 0.0)), &s0)?;
            }
            state0 = Some(s0);
        }
        if config.sup_rates {
            let sup0 = match &state0 {
                Some(s) => s.u.max_abs(),
                None => {
                    let start = Instant::now();
                    let v = ex.grid_sup_norm(grid.size, 0.0, &quad)?;
                    out.provenance.push(provenance("annulus/sup", k, 0.0, &quad, None, start));
                    v
                }
            };
            sups.insert(key(k, 0.0), sup0);
            out.sups.push(SupRecord { k, t: 0.0, sup: sup0 });
        }
        for &t in config.times.iter().filter(|t| **t > 0.0) {
            let mut sup = None;
            if let Some(s0) = &state0 {
                let start = Instant::now();
                let (gb, est) = annulus_state(&ex, grid.size, t, &quad)?;
                let reference = propagate_checked(s0, t, k)?;
                for n in &config.norms {
                    let error = match n.kind {
                        NormKind::Energy => crate::metrics::relative_energy_error(&gb, &reference, &gb, 1.0)?,
                        NormKind::Linf => relative(reference.u.max_abs_diff(&gb.u)?, s0.u.max_abs())?,
                        NormKind::L2 => {
                            let diff: f64 = reference.u.values.iter().zip(&gb.u.values).map(|(a, b)| (a - b).norm_sqr()).sum();
                            let den: f64 = s0.u.values.iter().map(|v| v.norm_sqr()).sum();
                            relative(diff.sqrt(), den.sqrt())?
                        }
                        NormKind::Point => return Err(Error::Config("point norm is not available for the annulus".into())),
                    };
                    out.records.push(ErrorRecord::new(t, k, n.kind, error, n.denominator)?);
                }
                if let Some(d) = fields_dir {
                    write_state(&d.join(field_name("gb", k, t)), &gb)?;
                    write_state(&d.join(field_name("ref", k, t)), &reference)?;
                }
                sup = Some(gb.u.max_abs());
                out.provenance.push(provenance("annulus/errors", k, t, &quad, est, start));
            }
            if config.sup_rates {
                let v = match sup {
                    Some(v) => v,
                    None => {
                        let start = Instant::now();
                        let v = ex.grid_sup_norm(grid.size, t, &quad)?;
                        out.provenance.push(provenance("annulus/sup", k, t, &quad, None, start));
                        v
                    }
                };
                sups.insert(key(k, t), v);
                out.sups.push(SupRecord { k, t, sup: v });
            }
        }
    }
    if config.sup_rates {
        for w in config.k_values.windows(2).filter(|w| w[1] == 2.0 * w[0]) {
            let (k, k2) = (w[0], w[1]);
            for &t in config.times.iter().filter(|t| **t > 0.0) {
                let beta = sup_norm_rate(sups[&key(k, t)], sups[&key(k, 0.0)], sups[&key(k2, t)], sups[&key(k2, 0.0)])?;
                out.betas.push(BetaRecord { t, k, k2, beta });
            }
        }
    }
    Ok(())
}

/// Half-width of the sample box `[-R, R]^d` holding the oracle's mass.
pub fn oracle_sample_radius(id: OracleId, k: f64) -> f64 {
    match id {
        OracleId::E5Gaussian => 7.0 / k.sqrt(),
        OracleId::E4Wkb => 6.0,
        OracleId::E1Flat => 6.0 / k,
        OracleId::E1SpherePoint | OracleId::E2Split => 6.0 / k.sqrt(),
    }
}

/// Truncation half-width and parameter rule resolving the oracle integrand
/// for targets inside `[-R, R]^d`.
///
/// Beams centred at the parameter are localised within `sqrt(80 / k)` of the
/// target; the linear phase `k z . x` needs panels no wider than `3 / (k R)`.
pub fn oracle_engine_rule(id: OracleId, dims: OracleDims, k: f64, radius: f64) -> Result<(f64, QuadratureSpec)> {
    let even = |n: f64| {
        let n = n.ceil() as usize;
        (n + n % 2).max(2)
    };
    let local = 2.0 / k.sqrt();
    let wave = 3.0 / (k * radius);
    let (half, h) = match id {
        OracleId::E4Wkb => ((radius + (80.0 / k).sqrt() + 0.5).min(TRUNCATION), local),
        OracleId::E5Gaussian => ((radius + (80.0 / k).sqrt() + 0.5).min(TRUNCATION), local.min(wave)),
        OracleId::E2Split => (TRUNCATION, local.min(wave)),
        OracleId::E1Flat => (TRUNCATION, wave.min(0.5)),
        OracleId::E1SpherePoint => {
            let h = wave.min(0.25);
            let spec = QuadratureSpec::new(vec![even(std::f64::consts::PI / h), even(2.0 * std::f64::consts::PI / h)], vec![8, 8], 1e-8, 0)?;
            return Ok((TRUNCATION, spec));
        }
    };
    let n = even(2.0 * half / h);
    Ok((half, QuadratureSpec::new(vec![n; dims.m], vec![8; dims.m], 1e-8, 0)?))
}

/// Sample nodes and weights: `panels x order` Gauss nodes per axis on `[-R, R]`.
fn oracle_sample_rule(dims: OracleDims, radius: f64) -> Result<CompositeRule> {
    let (panels, order) = if dims.d == 3 { (2, 6) } else { (4, 8) };
    CompositeRule::new(-radius, radius, panels, order)
}

/// One oracle evaluation: error against the closed form and the scaling norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub linf_error: f64,
    pub scaling: Option<(ScalingNorm, f64)>,
}

/// Engine values on the sample box compared with the closed form.
pub fn oracle_evaluate(id: OracleId, dims: OracleDims, k: f64, scaling: bool) -> Result<OracleOutcome> {
    match dims.d {
        1 => oracle_evaluate_d::<1>(id, dims, k, scaling),
        2 => oracle_evaluate_d::<2>(id, dims, k, scaling),
        3 => oracle_evaluate_d::<3>(id, dims, k, scaling),
        d => Err(Error::InvalidInput(format!("unsupported dimension {d}"))),
    }
}

fn oracle_evaluate_d<const D: usize>(id: OracleId, dims: OracleDims, k: f64, scaling: bool) -> Result<OracleOutcome> {
    let radius = oracle_sample_radius(id, k);
    let (half, quad) = oracle_engine_rule(id, dims, k, radius)?;
    let manifold = oracle_manifold_truncated::<D>(id, dims, half)?;
    let axis = oracle_sample_rule(dims, radius)?;
    let n = axis.len();
    let total = n.pow(D as u32);
    let mut targets = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = RealVector::<D>::zeros();
        let mut w = 1.0;
        for j in 0..D {
            x[j] = axis.nodes[rest % n];
            w *= axis.weights[rest % n];
            rest /= n;
        }
        targets.push(x);
        weights.push(w);
    }
    let norm = scaling.then(|| id.scaling_exponent(dims).0);
    let want = Want {
        value: true,
        dt: false,
        grad: norm == Some(ScalingNorm::GradientL2),
    };
    let res = integrate_superposition(&manifold, 0.0, k, &targets, &quad, want)?;
    let mut diff = 0.0f64;
    let mut peak = 0.0f64;
    for (x, v) in targets.iter().zip(&res.values) {
        let c = closed_form(id, x.as_slice(), k, dims)?;
        diff = diff.max((v - c).norm());
        peak = peak.max(c.norm());
    }
    let scaling = match norm {
        None => None,
        Some(ScalingNorm::L2) => Some((ScalingNorm::L2, weighted_norm(&weights, res.values.iter().map(|v| v.norm_sqr())))),
        Some(ScalingNorm::GradientL2) => {
            let g = res.grad_values.as_ref().ok_or_else(|| Error::InvalidInput("gradient missing".into()))?;
            Some((ScalingNorm::GradientL2, weighted_norm(&weights, g.iter().map(|v| v.iter().map(|c| c.norm_sqr()).sum()))))
        }
        Some(ScalingNorm::Energy) => return Err(Error::Config("energy scaling needs time derivatives of the data".into())),
    };
    Ok(OracleOutcome {
        linf_error: relative(diff, peak)?,
        scaling,
    })
}

fn weighted_norm(weights: &[f64], squares: impl Iterator<Item = f64>) -> f64 {
    weights.iter().zip(squares).map(|(w, s)| w * s).sum::<f64>().sqrt()
}

fn run_oracle(config: &ExperimentConfig, out: &mut RunResults) -> Result<()> {
    let o = config.oracle.ok_or_else(|| Error::Config("oracle runs need an [oracle] table".into()))?;
    let dims = o.dims();
    let (norm, predicted) = o.id.scaling_exponent(dims);
    for &k in &config.k_values {
        let start = Instant::now();
        let outcome = oracle_evaluate(o.id, dims, k, o.scaling)?;
        for n in &config.norms {
            out.records.push(ErrorRecord::new(0.0, k, n.kind, outcome.linf_error, n.denominator)?);
        }
        if let Some((norm, value)) = outcome.scaling {
            out.scaling.push(ScalingRecord { k, norm, value, predicted_exponent: predicted });
        }
        let quad = oracle_engine_rule(o.id, dims, k, oracle_sample_radius(o.id, k))?.1;
        out.provenance.push(provenance("oracle", k, 0.0, &quad, None, start));
    }
    if out.scaling.len() >= 2 {
        let pts: Vec<(f64, f64)> = out.scaling.iter().map(|s| (s.k, s.value)).collect();
        out.fits.push(RateFitRecord {
            quantity: format!("scaling_{}", serde_json::to_value(norm)?.as_str().unwrap_or("norm")),
            t: 0.0,
            slope: rate_fit(&pts)?,
            predicted: Some(predicted),
        });
    }
    Ok(())
}

/// Orders between neighbouring `k` for one norm and time, in ladder order.
pub fn orders(results: &RunResults, kind: NormKind, t: f64, ks: &[f64]) -> Vec<Option<f64>> {
    ks.windows(2)
        .map(|w| match (results.error(kind, t, w[0]), results.error(kind, t, w[1])) {
            (Some(a), Some(b)) if w[1] == 2.0 * w[0] => eoc(a, b).ok(),
            _ => None,
        })
        .collect()
}
