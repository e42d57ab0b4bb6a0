//! Parameter sweeps, rate and trace reports, and their CSV/SVG outputs for
//! the driven two-qubit model in `floquet-qubits`.

pub mod config;
pub mod grid;
pub mod output;
pub mod point;
pub mod provenance;
pub mod reports;

pub use config::{Axis, AxisName, ConfigError, RawConfig, RunConfig};
pub use grid::{sweep, SweepResult};
pub use point::{run_point, PointRecord};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "FLOQUET_SWEEP_WORKERS";
