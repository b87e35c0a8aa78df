//! Configuration, seeded sweeps, downlink spectral efficiency and CSV output
//! behind the `hybrid-est` command line tool.

pub mod config;
pub mod output;
pub mod precoder;
pub mod sweep;

pub use config::{CovarianceModel, MethodSpec, SweepConfig};
pub use output::{format_number, write_covest_csv, write_design_csv, write_sweep_csv};
pub use precoder::{matched_filter, phased_zf_precoder, sum_spectral_efficiency, HybridPrecoder};
pub use sweep::{run_covest, run_design, run_mse_sweep, run_se_sweep, RunOptions, SweepRecord};
