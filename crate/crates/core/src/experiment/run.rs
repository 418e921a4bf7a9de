use rand::Rng;
use rayon::prelude::*;

use crate::channel::{add_awgn, calibrate_noise, sample_channel, ChannelRealization};
use crate::error::{Error, Result};
use crate::frame::{bits_to_indices, InfoVector};
use crate::papr::{ccdf, default_thresholds, papr, papr_at_ccdf, CcdfCurve};
use crate::receiver::{count_errors, dd_noise_variance, ErrorCounts, TimeDomainMmse};
use crate::rng::{frame_rng, Purpose};

use super::config::{ExperimentConfig, Method, SweepAxis};
use super::transmit::Transmitter;

/// PAPR statistics of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodCcdf {
    pub method: Method,
    /// Per-frame PAPR in dB, in frame order.
    pub samples_db: Vec<f64>,
    pub curve: CcdfCurve,
    pub papr_at_0p5: f64,
    pub papr_at_0p1: f64,
    /// Mean number of committed greedy flips per frame (proposed method only).
    pub mean_flips: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfRun {
    pub methods: Vec<MethodCcdf>,
}

impl CcdfRun {
    pub fn get(&self, method: Method) -> Option<&MethodCcdf> {
        self.methods.iter().find(|m| m.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateRow {
    pub method: Method,
    pub snr_db: f64,
    pub nu_max_hz: f64,
    /// Frames that entered the statistics.
    pub frames: u64,
    pub counts: ErrorCounts,
    /// Frames dropped because the equalizer could not be solved.
    pub solver_failures: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateRun {
    /// Ordered by method, then Doppler, then SNR.
    pub rows: Vec<ErrorRateRow>,
}

impl ErrorRateRun {
    pub fn find(&self, method: Method, snr_db: f64, nu_max_hz: f64) -> Option<&ErrorRateRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.snr_db == snr_db && r.nu_max_hz == nu_max_hz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub m: usize,
    pub n: usize,
    pub method: Method,
    pub papr_db_at_0p1: f64,
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

fn transmitters(cfg: &ExperimentConfig) -> Result<Vec<Transmitter>> {
    cfg.methods
        .iter()
        .map(|&m| Transmitter::new(m, cfg))
        .collect()
}

/// Uniform random information vector of frame `frame`.
pub fn draw_info(cfg: &ExperimentConfig, frame: usize) -> Result<InfoVector> {
    let alphabet = cfg.alphabet()?;
    let nbits = cfg.params()?.len() * alphabet.bits_per_symbol()?;
    let mut rng = frame_rng(cfg.seed, frame as u64, Purpose::Bits);
    let bits: Vec<bool> = (0..nbits).map(|_| rng.random()).collect();
    InfoVector::from_indices(&bits_to_indices(&bits, &alphabet)?, alphabet)
}

/// PAPR of `frames` random frames for every configured method.
pub fn run_ccdf(cfg: &ExperimentConfig) -> Result<CcdfRun> {
    cfg.validate()?;
    let txs = transmitters(cfg)?;
    let per_frame: Vec<Result<Vec<(f64, usize)>>> = with_workers(cfg.workers, || {
        (0..cfg.frames)
            .into_par_iter()
            .map(|f| {
                let u = draw_info(cfg, f)?;
                txs.iter()
                    .map(|t| {
                        let tx = t.transmit(&u)?;
                        Ok((papr(&tx.samples)?.db, tx.flips))
                    })
                    .collect()
            })
            .collect()
    })?;
    let per_frame = per_frame.into_iter().collect::<Result<Vec<_>>>()?;
    let thresholds = default_thresholds();
    let methods = txs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let samples_db: Vec<f64> = per_frame.iter().map(|row| row[i].0).collect();
            let flips: usize = per_frame.iter().map(|row| row[i].1).sum();
            Ok(MethodCcdf {
                method: t.method(),
                curve: ccdf(&samples_db, &thresholds)?,
                papr_at_0p5: papr_at_ccdf(&samples_db, 0.5)?,
                papr_at_0p1: papr_at_ccdf(&samples_db, 0.1)?,
                mean_flips: flips as f64 / cfg.frames as f64,
                samples_db,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdfRun { methods })
}

/// Error counts of one frame indexed `[method][nu][snr]`; `None` marks an
/// equalizer failure.
type FrameCounts = Vec<Vec<Vec<Option<ErrorCounts>>>>;

fn error_rate_frame(
    cfg: &ExperimentConfig,
    txs: &[Transmitter],
    snrs: &[f64],
    nus: &[f64],
    frame: usize,
) -> Result<FrameCounts> {
    let params = cfg.params()?;
    let profile = cfg.path_profile()?;
    let order = cfg.modulation;
    let es = cfg.symbol_energy();
    let u = draw_info(cfg, frame)?;
    let truth = u.indices();
    let sent = txs
        .iter()
        .map(|t| t.transmit(&u))
        .collect::<Result<Vec<_>>>()?;

    let mut out: FrameCounts = vec![vec![vec![None; snrs.len()]; nus.len()]; txs.len()];
    for (ni, &nu) in nus.iter().enumerate() {
        let channel = match &profile {
            Some(p) => sample_channel(
                p,
                nu,
                &params,
                &mut frame_rng(cfg.seed, frame as u64, Purpose::Channel),
            )?,
            None => ChannelRealization::identity(),
        };
        let taps = channel.taps(&params);
        let mmse = TimeDomainMmse::new(taps.clone());
        for (mi, (t, tx)) in txs.iter().zip(&sent).enumerate() {
            let r = taps.apply(&tx.samples);
            for (si, &snr) in snrs.iter().enumerate() {
                let sigma2 = calibrate_noise(snr, &r)?;
                let mut noise_rng = frame_rng(
                    cfg.seed,
                    frame as u64,
                    Purpose::Noise {
                        nu_idx: ni,
                        snr_idx: si,
                    },
                );
                let noisy = add_awgn(&r, sigma2, &mut noise_rng)?;
                let z = match mmse.equalize(&noisy, dd_noise_variance(sigma2, &params), es) {
                    Ok(z) => z,
                    Err(Error::SolverFailure(_)) => continue,
                    Err(e) => return Err(e),
                };
                let estimates = t.recover(&z, tx)?;
                let detected: Vec<usize> =
                    estimates.iter().map(|&x| u.alphabet().detect(x)).collect();
                out[mi][ni][si] = Some(count_errors(&detected, &truth, order)?);
            }
        }
    }
    Ok(out)
}

/// Symbol and bit error rates for every method over the SNR × Doppler grid.
///
/// Each frame is precoded once; for every Doppler value the channel is
/// redrawn from the same stream, so only the path Doppler shifts differ
/// across the grid. Noise is calibrated to the received power of each
/// method.
pub fn run_error_rate_grid(
    cfg: &ExperimentConfig,
    snrs: &[f64],
    nus: &[f64],
) -> Result<ErrorRateRun> {
    cfg.validate()?;
    if snrs.is_empty() || nus.is_empty() {
        return Err(Error::Parameter(
            "error-rate sweep needs at least one SNR and one Doppler value".into(),
        ));
    }
    let txs = transmitters(cfg)?;
    let per_frame: Vec<Result<FrameCounts>> = with_workers(cfg.workers, || {
        (0..cfg.frames)
            .into_par_iter()
            .map(|f| error_rate_frame(cfg, &txs, snrs, nus, f))
            .collect()
    })?;
    let mut rows = Vec::with_capacity(txs.len() * snrs.len() * nus.len());
    let per_frame = per_frame.into_iter().collect::<Result<Vec<_>>>()?;
    for (mi, t) in txs.iter().enumerate() {
        for (ni, &nu) in nus.iter().enumerate() {
            for (si, &snr) in snrs.iter().enumerate() {
                let mut row = ErrorRateRow {
                    method: t.method(),
                    snr_db: snr,
                    nu_max_hz: nu,
                    frames: 0,
                    counts: ErrorCounts::default(),
                    solver_failures: 0,
                };
                for frame in &per_frame {
                    match frame[mi][ni][si] {
                        Some(c) => {
                            row.frames += 1;
                            row.counts += c;
                        }
                        None => row.solver_failures += 1,
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(ErrorRateRun { rows })
}

/// Error rates over `snr_db` at the single Doppler value `nu_max_hz`.
pub fn run_error_rate(cfg: &ExperimentConfig) -> Result<ErrorRateRun> {
    run_error_rate_grid(cfg, &cfg.snr_db, &[cfg.nu_max_hz])
}

/// Error rates at `sweep_snr_db` over `nu_max_list`.
pub fn run_doppler_sweep(cfg: &ExperimentConfig) -> Result<ErrorRateRun> {
    run_error_rate_grid(cfg, &[cfg.sweep_snr_db], &cfg.nu_max_list)
}

/// PAPR at CCDF 0.1 for every method while one grid dimension sweeps.
pub fn run_scaling_table(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    if cfg.sweep_values.is_empty() {
        return Err(Error::Parameter(
            "scaling table needs at least one sweep value".into(),
        ));
    }
    let mut rows = Vec::new();
    for &v in &cfg.sweep_values {
        let sized = match cfg.sweep_axis {
            SweepAxis::M => cfg.with_grid(v, cfg.n),
            SweepAxis::N => cfg.with_grid(cfg.m, v),
        };
        let run = run_ccdf(&sized)?;
        rows.extend(run.methods.iter().map(|mc| ScalingRow {
            m: sized.m,
            n: sized.n,
            method: mc.method,
            papr_db_at_0p1: mc.papr_at_0p1,
        }));
    }
    Ok(rows)
}
