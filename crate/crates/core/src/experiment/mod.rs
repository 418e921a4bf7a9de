//! Seeded Monte Carlo experiments: PAPR CCDF, error rates versus SNR and
//! Doppler, and PAPR scaling with the grid size.
//!
//! Runners are pure functions of an [`ExperimentConfig`]. Frames are
//! processed in parallel and merged by frame index; CSV rendering writes to
//! any [`std::io::Write`], so the library never touches the filesystem.

mod config;
pub mod csv;
mod run;
mod transmit;

pub use config::{ExperimentConfig, Method, ProfileKind, SweepAxis};
pub use run::{
    draw_info, run_ccdf, run_doppler_sweep, run_error_rate, run_error_rate_grid, run_scaling_table,
    CcdfRun, ErrorRateRow, ErrorRateRun, MethodCcdf, ScalingRow,
};
pub use transmit::{Transmitted, Transmitter};
