//! Comparison PAPR methods: μ-law companding, iterative clipping and
//! filtering (ICF), and DFT spreading of the delay-Doppler symbols.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::frame::{FrameParams, TimeDomainFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompandingConfig {
    pub mu: f64,
}

impl Default for CompandingConfig {
    fn default() -> Self {
        Self { mu: 4.0 }
    }
}

impl CompandingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Parameter(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

fn with_magnitude(z: Complex64, magnitude: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * (magnitude / r)
    }
}

/// `|out| = V ln(1 + μ|s|/V) / ln(1 + μ)`, phase preserved.
pub fn mu_compand(
    s: &[Complex64],
    cfg: &CompandingConfig,
    peak_ref: f64,
) -> Result<TimeDomainFrame> {
    cfg.validate()?;
    let peak = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(peak_ref.is_finite() && peak_ref > 0.0) || peak_ref < peak {
        return Err(Error::Parameter(format!(
            "peak reference {peak_ref} must be positive and at least the frame peak {peak}"
        )));
    }
    let denom = cfg.mu.ln_1p();
    Ok(TimeDomainFrame(
        s.iter()
            .map(|&z| with_magnitude(z, peak_ref * (cfg.mu * z.norm() / peak_ref).ln_1p() / denom))
            .collect(),
    ))
}

/// Result of [`mu_expand`]: the restored frame and how many samples had to
/// be clipped to the peak reference first.
#[derive(Debug, Clone, PartialEq)]
pub struct Expanded {
    pub frame: TimeDomainFrame,
    pub clipped: usize,
}

/// Inverse of [`mu_compand`]. Magnitudes above `V` (possible after noise)
/// are clipped to `V` and counted.
pub fn mu_expand(s: &[Complex64], cfg: &CompandingConfig, peak_ref: f64) -> Result<Expanded> {
    cfg.validate()?;
    if !(peak_ref.is_finite() && peak_ref > 0.0) {
        return Err(Error::Parameter(format!(
            "peak reference must be positive, got {peak_ref}"
        )));
    }
    let log_mu = cfg.mu.ln_1p();
    let mut clipped = 0;
    let frame = s
        .iter()
        .map(|&z| {
            let mut r = z.norm();
            if r > peak_ref {
                clipped += 1;
                r = peak_ref;
            }
            with_magnitude(z, peak_ref / cfg.mu * (r / peak_ref * log_mu).exp_m1())
        })
        .collect();
    Ok(Expanded {
        frame: TimeDomainFrame(frame),
        clipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcfConfig {
    /// Clipping level above the oversampled RMS, in dB.
    pub clip_ratio_db: f64,
    pub iterations: usize,
    pub oversample_factor: usize,
}

impl Default for IcfConfig {
    fn default() -> Self {
        Self {
            clip_ratio_db: 4.0,
            iterations: 3,
            oversample_factor: 4,
        }
    }
}

impl IcfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Parameter("ICF needs at least one iteration".into()));
        }
        if self.oversample_factor < 2 {
            return Err(Error::Parameter(
                "ICF oversample factor must be at least 2".into(),
            ));
        }
        if !self.clip_ratio_db.is_finite() {
            return Err(Error::Parameter("ICF clip ratio must be finite".into()));
        }
        Ok(())
    }
}

/// Iterative clipping and filtering on an oversampled grid.
///
/// The critically sampled frame is a bijective image of the symbols, so
/// clipping noise can only be filtered after interpolation: each round
/// interpolates by spectrum zero-padding, clips magnitudes at
/// `rms · 10^{clip_ratio_db / 20}` and removes every out-of-band bin.
#[derive(Clone)]
pub struct Icf {
    cfg: IcfConfig,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_os: Arc<dyn Fft<f64>>,
    inv_os: Arc<dyn Fft<f64>>,
}

impl Icf {
    pub fn new(cfg: IcfConfig, params: &FrameParams) -> Result<Self> {
        cfg.validate()?;
        let len = params.len();
        let mut planner = FftPlanner::new();
        Ok(Self {
            cfg,
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            fwd_os: planner.plan_fft_forward(len * cfg.oversample_factor),
            inv_os: planner.plan_fft_inverse(len * cfg.oversample_factor),
        })
    }

    pub fn apply(&self, s: &[Complex64]) -> Result<TimeDomainFrame> {
        check_len("ICF input", s.len(), self.len)?;
        let n = self.len;
        let big = n * self.cfg.oversample_factor;
        // bins [0, half) are non-negative frequencies, [half, n) negative
        let half = n.div_ceil(2);
        let gain = 10f64.powf(self.cfg.clip_ratio_db / 20.0);

        let mut spectrum = s.to_vec();
        self.fwd.process(&mut spectrum);
        let mut wide = vec![Complex64::new(0.0, 0.0); big];
        for _ in 0..self.cfg.iterations {
            wide.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            wide[..half].copy_from_slice(&spectrum[..half]);
            wide[big - (n - half)..].copy_from_slice(&spectrum[half..]);
            self.inv_os.process(&mut wide);
            // wide[L i] == s[i] after this scaling
            let scale = 1.0 / n as f64;
            wide.iter_mut().for_each(|z| *z *= scale);

            let rms = (wide.iter().map(|z| z.norm_sqr()).sum::<f64>() / big as f64).sqrt();
            let level = rms * gain;
            for z in wide.iter_mut() {
                if z.norm() > level {
                    *z = with_magnitude(*z, level);
                }
            }

            self.fwd_os.process(&mut wide);
            let back = 1.0 / self.cfg.oversample_factor as f64;
            spectrum[..half].copy_from_slice(&wide[..half]);
            spectrum[half..].copy_from_slice(&wide[big - (n - half)..]);
            spectrum.iter_mut().for_each(|z| *z *= back);
        }
        self.inv.process(&mut spectrum);
        let scale = 1.0 / n as f64;
        Ok(TimeDomainFrame(
            spectrum.into_iter().map(|z| z * scale).collect(),
        ))
    }
}

/// One-shot ICF; plans transforms on every call.
pub fn icf(s: &[Complex64], cfg: &IcfConfig, params: &FrameParams) -> Result<TimeDomainFrame> {
    Icf::new(*cfg, params)?.apply(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadAxis {
    /// Spread the `M` delay bins of every Doppler row.
    #[default]
    Delay,
    /// Spread the `N` Doppler bins of every delay column.
    Doppler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DftSpreadConfig {
    pub axis: SpreadAxis,
    /// Number of equal, contiguous sub-blocks the axis is split into; each
    /// sub-block gets its own unitary DFT. 1 spreads the whole axis.
    pub blocks: usize,
}

impl Default for DftSpreadConfig {
    fn default() -> Self {
        Self {
            axis: SpreadAxis::Delay,
            blocks: 1,
        }
    }
}

impl DftSpreadConfig {
    pub fn block_len(&self, params: &FrameParams) -> Result<usize> {
        let axis_len = match self.axis {
            SpreadAxis::Delay => params.m(),
            SpreadAxis::Doppler => params.n(),
        };
        if self.blocks == 0 || axis_len % self.blocks != 0 {
            return Err(Error::Parameter(format!(
                "{} spreading blocks do not divide an axis of length {axis_len}",
                self.blocks
            )));
        }
        Ok(axis_len / self.blocks)
    }
}

/// Unitary DFT spreading of delay-Doppler symbols and its inverse.
#[derive(Clone)]
pub struct DftSpreader {
    cfg: DftSpreadConfig,
    params: FrameParams,
    block: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl DftSpreader {
    pub fn new(cfg: DftSpreadConfig, params: &FrameParams) -> Result<Self> {
        let block = cfg.block_len(params)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            cfg,
            params: *params,
            block,
            fwd: planner.plan_fft_forward(block),
            inv: planner.plan_fft_inverse(block),
        })
    }

    pub fn spread(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.run(u, &self.fwd)
    }

    pub fn despread(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.run(y, &self.inv)
    }

    fn run(&self, input: &[Complex64], fft: &Arc<dyn Fft<f64>>) -> Result<Vec<Complex64>> {
        check_len("symbol vector", input.len(), self.params.len())?;
        let (m, n) = (self.params.m(), self.params.n());
        let norm = 1.0 / (self.block as f64).sqrt();
        let mut out = input.to_vec();
        match self.cfg.axis {
            SpreadAxis::Delay => {
                // rows are contiguous already
                fft.process(&mut out);
            }
            SpreadAxis::Doppler => {
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for l in 0..m {
                    for k in 0..n {
                        col[k] = out[k * m + l];
                    }
                    fft.process(&mut col);
                    for k in 0..n {
                        out[k * m + l] = col[k];
                    }
                }
            }
        }
        out.iter_mut().for_each(|z| *z *= norm);
        Ok(out)
    }
}

/// One-shot DFT spreading; plans transforms on every call.
pub fn dft_spread(
    u: &[Complex64],
    cfg: &DftSpreadConfig,
    params: &FrameParams,
) -> Result<Vec<Complex64>> {
    DftSpreader::new(*cfg, params)?.spread(u)
}

pub fn dft_despread(
    y: &[Complex64],
    cfg: &DftSpreadConfig,
    params: &FrameParams,
) -> Result<Vec<Complex64>> {
    DftSpreader::new(*cfg, params)?.despread(y)
}
