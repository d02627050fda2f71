//! Norms, relative errors, convergence orders and rate fits.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_box, QuadratureSpec};
use crate::spectral::{energy_of_difference, energy_of_state, WaveState2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Energy,
    Linf,
    L2,
    Point,
}

/// What an error was divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorKind {
    /// The superposition at the same time.
    UGbAtT,
    /// The data at `t = 0`.
    UAt0,
    /// Energy norm of the superposition at the same time.
    UgbEnergy,
    Absolute,
}

/// `log2(e_k / e_2k)`.
pub fn eoc(e_k: f64, e_2k: f64) -> Result<f64> {
    if !(e_k > 0.0 && e_2k > 0.0) {
        return Err(Error::NonPositiveError(e_k, e_2k));
    }
    Ok((e_k / e_2k).log2())
}

/// Least-squares slope of `log(value)` against `log(k)`.
pub fn rate_fit(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit("need at least two samples".into()));
    }
    if let Some(&(k, v)) = samples.iter().find(|&&(k, v)| !(k > 0.0 && v > 0.0)) {
        return Err(Error::NonPositiveError(k, v));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all k are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Norm of sampled values: `Linf` is the max modulus, `L2` is
/// `(h^d sum |v|^2)^{1/2}`, `Point` needs exactly one value.
pub fn sample_norm(values: &[Complex64], kind: NormKind, spacing: f64, dim: usize) -> Result<f64> {
    match kind {
        NormKind::Linf => Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max)),
        NormKind::L2 => Ok((spacing.powi(dim as i32) * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()),
        NormKind::Point => match values {
            [v] => Ok(v.norm()),
            _ => Err(Error::ShapeMismatch(format!("point norm needs one value, got {}", values.len()))),
        },
        NormKind::Energy => Err(Error::InvalidInput("energy norms need states; use relative_energy_error".into())),
    }
}

/// `|approx - reference| / |denominator|` in the given norm.
pub fn relative_error(
    approx: &[Complex64],
    reference: &[Complex64],
    kind: NormKind,
    denominator: &[Complex64],
    spacing: f64,
    dim: usize,
) -> Result<f64> {
    if approx.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!("{} approximate vs {} reference values", approx.len(), reference.len())));
    }
    let diff: Vec<Complex64> = approx.iter().zip(reference).map(|(a, b)| a - b).collect();
    let num = sample_norm(&diff, kind, spacing, dim)?;
    let den = sample_norm(denominator, kind, spacing, dim)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// `||approx - reference||_E / ||denominator||_E` for grid states.
pub fn relative_energy_error(approx: &WaveState2D, reference: &WaveState2D, denominator: &WaveState2D, c: f64) -> Result<f64> {
    let num = energy_of_difference(approx, reference, c)?;
    let den = energy_of_state(denominator, c)?.sqrt();
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// `(1/2 int_0^{r_max} (|u_t|^2 + |u_r|^2) |S^{d-1}| r^{d-1} dr)^{1/2}` for a
/// radial field in `d` dimensions. `jet(r)` returns `(u_t, u_r)`.
pub fn radial_energy_norm_dim<F>(jet: F, r_max: f64, dim: usize, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<(Complex64, Complex64)>,
{
    if !(r_max > 0.0) {
        return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
    }
    let surface = match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        d => return Err(Error::InvalidInput(format!("unsupported dimension {d}"))),
    };
    let failure = std::cell::RefCell::new(None);
    let integrand = |z: &[f64]| {
        let r = z[0];
        match jet(r) {
            Ok((ut, ur)) => [Complex64::new((ut.norm_sqr() + ur.norm_sqr()) * r.powi(dim as i32 - 1), 0.0)],
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [Complex64::new(0.0, 0.0)]
            }
        }
    };
    let total = if quad.max_refinements == 0 {
        let rule = crate::quadrature::TensorRule::new(&[(0.0, r_max)], quad)?;
        let mut acc = crate::quadrature::PairwiseSum::new();
        let mut z = [0.0];
        for i in 0..rule.len() {
            let w = rule.node(i, &mut z);
            acc.push(integrand(&z)[0] * w);
        }
        acc.total().re
    } else {
        integrate_box(integrand, &[(0.0, r_max)], quad, [1.0])?.values[0].re
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((0.5 * surface * total).sqrt())
}

/// Three-dimensional [`radial_energy_norm_dim`].
pub fn radial_energy_norm<F>(jet: F, r_max: f64, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<(Complex64, Complex64)>,
{
    radial_energy_norm_dim(jet, r_max, 3, quad)
}

/// Growth exponent between `k` and `2k` of `sup|u_k(t)| / sup|u_k(0)|`.
pub fn sup_norm_rate(sup_t_k: f64, sup_0_k: f64, sup_t_2k: f64, sup_0_2k: f64) -> Result<f64> {
    if [sup_t_k, sup_0_k, sup_t_2k, sup_0_2k].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::NonPositiveError(sup_t_k.min(sup_0_k), sup_t_2k.min(sup_0_2k)));
    }
    Ok(((sup_t_2k / sup_0_2k) / (sup_t_k / sup_0_k)).log2())
}

/// One error value with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub t: f64,
    pub k: f64,
    pub norm_kind: NormKind,
    pub error: f64,
    pub denominator_kind: DenominatorKind,
}

impl ErrorRecord {
    pub fn new(t: f64, k: f64, norm_kind: NormKind, error: f64, denominator_kind: DenominatorKind) -> Result<Self> {
        if !(error.is_finite() && error >= 0.0) {
            return Err(Error::InvalidInput(format!("error must be finite and non-negative, got {error}")));
        }
        Ok(Self {
            t,
            k,
            norm_kind,
            error,
            denominator_kind,
        })
    }
}

/// Errors at one time across the k-ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EocRow {
    pub t: f64,
    /// One entry per `EocTable::ks`.
    pub errors: Vec<Option<f64>>,
    /// `orders[i]` links `ks[i]` and `ks[i + 1]` when the latter is `2 ks[i]`.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EocTable {
    pub norm_kind: NormKind,
    pub denominator_kind: DenominatorKind,
    pub ks: Vec<f64>,
    pub rows: Vec<EocRow>,
    pub records: Vec<ErrorRecord>,
}

impl EocTable {
    /// Groups records by time; all must share norm and denominator kinds.
    pub fn from_records(records: &[ErrorRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::InvalidInput("no error records".into()))?;
        for r in records {
            if r.denominator_kind != first.denominator_kind {
                return Err(Error::MixedDenominator(format!("{:?}", first.denominator_kind), format!("{:?}", r.denominator_kind)));
            }
            if r.norm_kind != first.norm_kind {
                return Err(Error::InvalidInput(format!("mixed norms {:?} and {:?}", first.norm_kind, r.norm_kind)));
            }
        }
        let mut ks: Vec<f64> = records.iter().map(|r| r.k).collect();
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        let mut ts: Vec<f64> = records.iter().map(|r| r.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut rows = Vec::with_capacity(ts.len());
        for &t in &ts {
            let mut errors = vec![None; ks.len()];
            for r in records.iter().filter(|r| r.t == t) {
                let i = ks.iter().position(|&k| k == r.k).expect("k collected above");
                if errors[i].is_some() {
                    return Err(Error::InvalidInput(format!("duplicate record at t = {t}, k = {}", r.k)));
                }
                errors[i] = Some(r.error);
            }
            let mut orders = vec![None; ks.len().saturating_sub(1)];
            for i in 0..orders.len() {
                if ks[i + 1] == 2.0 * ks[i] {
                    if let (Some(a), Some(b)) = (errors[i], errors[i + 1]) {
                        orders[i] = eoc(a, b).ok();
                    }
                }
            }
            rows.push(EocRow { t, errors, orders });
        }
        Ok(Self {
            norm_kind: first.norm_kind,
            denominator_kind: first.denominator_kind,
            ks,
            rows,
            records: records.to_vec(),
        })
    }

    /// True when some pair of neighbouring `k` can carry an order column.
    fn order_column(&self, i: usize) -> bool {
        self.ks[i + 1] == 2.0 * self.ks[i]
    }

    /// Error at `(t, k)` if recorded.
    pub fn error(&self, t: f64, k: f64) -> Option<f64> {
        let i = self.ks.iter().position(|&x| x == k)?;
        self.rows.iter().find(|r| r.t == t)?.errors[i]
    }

    /// Order between `k` and `2k` at `t` if both errors exist.
    pub fn order(&self, t: f64, k: f64) -> Option<f64> {
        let i = self.ks.iter().position(|&x| x == k)?;
        self.rows.iter().find(|r| r.t == t)?.orders.get(i).copied().flatten()
    }

    /// CSV with columns `t, e_k1, e_k2, eoc_k1_k2, e_k3, eoc_k2_k3, ...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for (i, k) in self.ks.iter().enumerate() {
            header.push(format!("error_k{k}"));
            if i > 0 && self.order_column(i - 1) {
                header.push(format!("order_k{}_k{k}", self.ks[i - 1]));
            }
        }
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![format!("{}", row.t)];
            for i in 0..self.ks.len() {
                rec.push(fmt(row.errors[i]));
                if i > 0 && self.order_column(i - 1) {
                    rec.push(row.orders[i - 1].map(|x| format!("{x:.4}")).unwrap_or_default());
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// JSON list of records.
    pub fn records_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records)?)
    }
}
