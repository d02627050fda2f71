//! Configured convergence studies, their on-disk results and self-checks.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{
    preset, AnnulusParams, ExampleKind, ExperimentConfig, GridConfig, NormSpec, OracleParams, QuadratureConfig, Radial3dParams,
    RadialMeasure, PRESETS,
};
pub use run::{evaluate, run, RunManifest, RunOptions, RunResults, RunStatus};
pub use verify::{verify, CheckOutcome, Suite};
