//! File formats, sweep driver and command-line support for [`hankelnet_core`].

pub mod config;
pub mod io;
pub mod sweep;

pub use config::{IntegrandKind, SweepConfig};
pub use sweep::{run_sweep, write_sweep, SummaryRow, SweepResult};

/// Version line including the checksum of the bundled Sobol' direction numbers.
pub fn version_string() -> String {
    format!("{} (sobol-table sha256 {})", env!("CARGO_PKG_VERSION"), hankelnet_core::sobol_table_checksum())
}
