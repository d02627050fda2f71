//! Worked examples: exact solutions, beam charts and reduced integrals.

pub mod annulus;
pub mod oracles;
pub mod radial3d;
pub mod spherical;

use serde::{Deserialize, Serialize};

pub use annulus::AnnulusExample;
pub use oracles::{OracleDims, OracleId};
pub use radial3d::{Branch, Radial3dExample};
pub use spherical::{RadialJet, SphericalExample};

use crate::error::{Error, Result};
use crate::superposition::InitialManifold;

/// Example selector for [`manifold_from_example`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExampleSpec {
    Spherical { k: f64 },
    Radial3d { k: f64, r0: f64, r1: f64 },
    Annulus(AnnulusExample),
    Oracle { id: OracleId, dims: OracleDims },
}

impl ExampleSpec {
    /// Parses `spherical`, `radial3d`, `annulus` or an oracle id, with default
    /// parameters for the given `k` and dimension `d` (oracles only).
    pub fn by_name(name: &str, k: f64, d: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "spherical" | "sphere" => Ok(Self::Spherical { k }),
            "radial3d" | "radial" => Ok(Self::Radial3d { k, r0: 0.1, r1: 1.0 }),
            "annulus" => Ok(Self::Annulus(AnnulusExample::standard(k)?)),
            other => {
                let id: OracleId = other.parse()?;
                let dims = match id {
                    OracleId::E1SpherePoint => OracleDims { d: 3, m: 2, r: 0 },
                    OracleId::E2Split => OracleDims { d, m: d, r: 1 },
                    _ => OracleDims { d, m: d, r: 0 },
                };
                Ok(Self::Oracle { id, dims })
            }
        }
    }
}

/// Initial manifold of any supported spatial dimension.
#[derive(Debug, Clone)]
pub enum AnyManifold {
    D1(InitialManifold<1>),
    D2(InitialManifold<2>),
    D3(InitialManifold<3>),
}

impl AnyManifold {
    pub fn spatial_dim(&self) -> usize {
        match self {
            Self::D1(_) => 1,
            Self::D2(_) => 2,
            Self::D3(_) => 3,
        }
    }

    pub fn dim_m(&self) -> usize {
        match self {
            Self::D1(m) => m.dim_m,
            Self::D2(m) => m.dim_m,
            Self::D3(m) => m.dim_m,
        }
    }

    pub fn param_box(&self) -> &[(f64, f64)] {
        match self {
            Self::D1(m) => &m.param_box,
            Self::D2(m) => &m.param_box,
            Self::D3(m) => &m.param_box,
        }
    }
}

/// Beam chart of an example.
///
/// Spherical: directions `(rho, varphi)` with weight `sin rho`. Radial 3D: the
/// minus family over `(s, rho, varphi)` with weight `s^2 sin rho`. Annulus:
/// `(theta, s)` on `[0, 2 pi] x [0, 1]` with weight `1 - s`, extended to
/// `s in [1, 2]` for the plus branch when requested.
pub fn manifold_from_example(spec: &ExampleSpec) -> Result<AnyManifold> {
    Ok(match *spec {
        ExampleSpec::Spherical { k } => {
            AnyManifold::D3(InitialManifold::from_family(SphericalExample::new(k)?.family(), vec![1])?)
        }
        ExampleSpec::Radial3d { k, r0, r1 } => {
            let ex = Radial3dExample::new(k, r0, r1)?;
            AnyManifold::D3(InitialManifold::from_family(ex.family(Branch::Minus), vec![2])?)
        }
        ExampleSpec::Annulus(ex) => {
            let ex = AnnulusExample::new(ex.k, ex.s0, ex.s1, ex.box_side, ex.include_plus_branch)?;
            if ex.include_plus_branch {
                // s in [1, 2] carries the plus branch at s - 1; both amplitudes
                // vanish near s = 1 so the seam is harmless.
                let minus = ex.family();
                let plus = annulus::AnnulusFamily::plus(ex);
                AnyManifold::D2(InitialManifold::new(
                    vec![(0.0, 2.0 * std::f64::consts::PI), (0.0, 2.0)],
                    vec![0],
                    move |z, t, r| {
                        use crate::superposition::BeamFamily;
                        if z[1] < 1.0 {
                            minus.sample(z, t, r)
                        } else {
                            plus.sample(&[z[0], z[1] - 1.0], t, r)
                        }
                    },
                    |z| if z[1] < 1.0 { 1.0 - z[1] } else { 2.0 - z[1] },
                )?)
            } else {
                AnyManifold::D2(InitialManifold::from_family(ex.family(), vec![0])?)
            }
        }
        ExampleSpec::Oracle { id, dims } => match dims.d {
            1 => AnyManifold::D1(oracles::oracle_manifold(id, dims)?),
            2 => AnyManifold::D2(oracles::oracle_manifold(id, dims)?),
            3 => AnyManifold::D3(oracles::oracle_manifold(id, dims)?),
            d => return Err(Error::InvalidInput(format!("unsupported dimension {d}"))),
        },
    })
}
