//! Fixtures shared by the criterion benchmarks.

use otfs_core::experiment::{draw_info, ExperimentConfig};
use otfs_core::{FrameParams, InfoVector};

/// Grid with 15 kHz spacing.
pub fn grid(m: usize, n: usize) -> FrameParams {
    FrameParams::new(m, n, 15e3).expect("valid grid")
}

/// Deterministic random frame `frame` on an `m x n` grid with a `D`-PSK alphabet.
pub fn info_frame(m: usize, n: usize, order: usize, frame: usize) -> InfoVector {
    let cfg = ExperimentConfig {
        m,
        n,
        modulation: order,
        ..Default::default()
    };
    draw_info(&cfg, frame).expect("valid frame")
}
