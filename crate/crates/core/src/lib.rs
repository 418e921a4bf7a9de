//! Link-level OTFS simulation with amplitude-precoding PAPR reduction.
//!
//! The crate covers the whole transmit/channel/receive chain for an OTFS
//! system with a rectangular transmit pulse:
//!
//! - [`frame`]: grid parameters, PSK alphabets, bit mapping and phase detection.
//! - [`modem`]: the delay-Doppler to time-domain transform and its inverse.
//! - [`papr`]: per-frame PAPR and empirical CCDF estimation.
//! - [`precoder`]: greedy two-ring amplitude precoding and an exhaustive oracle.
//! - [`baselines`]: μ-law companding, iterative clipping and filtering, DFT spreading.
//! - [`channel`]: tapped-delay-line doubly-dispersive channel and AWGN.
//! - [`receiver`]: MMSE equalization and error counting.
//! - [`experiment`]: seeded Monte Carlo runners and CSV rendering.

pub mod baselines;
pub mod channel;
mod error;
pub mod experiment;
pub mod frame;
pub mod linalg;
pub mod modem;
pub mod papr;
pub mod precoder;
pub mod receiver;
pub mod rng;

pub use error::{Error, Result};
pub use frame::{FrameParams, InfoVector, PrecodedVector, PskAlphabet, TimeDomainFrame};
pub use modem::Modem;
pub use num_complex::Complex64;
pub use papr::{papr, CcdfCurve, PaprSample};
pub use precoder::{GreedyConfig, GreedyPrecoder, PrecodeResult};
