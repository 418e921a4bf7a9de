//! Doubly-dispersive tapped-delay-line channel.
//!
//! Each path `i` has a complex gain `h_i`, an integer delay of `l_i`
//! samples and a Doppler shift `ν_i`. Within one frame the received samples
//! are
//!
//! ```text
//! r[n] = Σ_i h_i e^{j 2π ν_i (n - l_i) Ts} s[(n - l_i) mod MN]
//! ```
//!
//! i.e. delays wrap around the frame and the Doppler phase is referenced to
//! the delayed sample.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::frame::{FrameParams, TimeDomainFrame};
use crate::modem::Modem;

/// Relative power-delay profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathProfile {
    pub delays_ns: Vec<f64>,
    pub powers_db: Vec<f64>,
}

impl PathProfile {
    pub fn new(delays_ns: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        let profile = Self {
            delays_ns,
            powers_db,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays_ns.is_empty() || self.delays_ns.len() != self.powers_db.len() {
            return Err(Error::Parameter(format!(
                "profile needs equal, non-zero numbers of delays ({}) and powers ({})",
                self.delays_ns.len(),
                self.powers_db.len()
            )));
        }
        if self.delays_ns.iter().any(|d| !d.is_finite() || *d < 0.0)
            || self.delays_ns.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::Parameter(
                "profile delays must be non-negative and ascending".into(),
            ));
        }
        if self.powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("profile powers must be finite".into()));
        }
        Ok(())
    }

    /// 3GPP Extended Typical Urban, nine paths.
    pub fn etu() -> Self {
        Self {
            delays_ns: vec![
                0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0,
            ],
            powers_db: vec![-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0],
        }
    }

    /// One zero-delay path.
    pub fn single_path() -> Self {
        Self {
            delays_ns: vec![0.0],
            powers_db: vec![0.0],
        }
    }

    /// Per-path variances normalized to sum to one.
    pub fn variances(&self) -> Vec<f64> {
        let linear: Vec<f64> = self
            .powers_db
            .iter()
            .map(|p| 10f64.powf(p / 10.0))
            .collect();
        let total: f64 = linear.iter().sum();
        linear.into_iter().map(|v| v / total).collect()
    }

    /// Delays rounded to the nearest sample at rate `M Δf`.
    pub fn delay_taps(&self, params: &FrameParams) -> Vec<usize> {
        let rate = params.m() as f64 * params.delta_f();
        self.delays_ns
            .iter()
            .map(|d| (d * 1e-9 * rate).round() as usize)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub delay_tap: usize,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<Path>,
}

impl ChannelRealization {
    /// Unit gain, no delay, no Doppler.
    pub fn identity() -> Self {
        Self {
            paths: vec![Path {
                gain: Complex64::new(1.0, 0.0),
                delay_tap: 0,
                doppler_hz: 0.0,
            }],
        }
    }

    /// Sparse time-domain matrix of this realization.
    pub fn taps(&self, params: &FrameParams) -> TapMatrix {
        TapMatrix::new(self, params)
    }

    /// Copy with every gain multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            paths: self
                .paths
                .iter()
                .map(|p| Path {
                    gain: p.gain * factor,
                    ..*p
                })
                .collect(),
        }
    }
}

/// Draws Rayleigh gains, uniform angles of arrival and rounded delay taps.
///
/// Per path the draws are: real and imaginary gain parts, then the angle.
/// The angle is drawn even when `nu_max = 0` so that a fixed RNG stream
/// yields the same gains for every Doppler setting.
pub fn sample_channel<R: Rng + ?Sized>(
    profile: &PathProfile,
    nu_max: f64,
    params: &FrameParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    profile.validate()?;
    if !(nu_max.is_finite() && nu_max >= 0.0) {
        return Err(Error::Parameter(format!(
            "nu_max must be non-negative, got {nu_max}"
        )));
    }
    let taps = profile.delay_taps(params);
    let paths = profile
        .variances()
        .into_iter()
        .zip(taps)
        .map(|(var, delay_tap)| {
            let sd = (var / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let theta = rng.random::<f64>() * TAU;
            Path {
                gain: Complex64::new(re * sd, im * sd),
                delay_tap,
                doppler_hz: nu_max * theta.cos(),
            }
        })
        .collect();
    Ok(ChannelRealization { paths })
}

/// Time-domain channel matrix stored by diagonal: `r[n] = Σ_d c_d[n] s[(n - d) mod MN]`
/// with one coefficient sequence per distinct delay tap.
#[derive(Debug, Clone, PartialEq)]
pub struct TapMatrix {
    len: usize,
    taps: Vec<(usize, Vec<Complex64>)>,
}

impl TapMatrix {
    pub fn new(ch: &ChannelRealization, params: &FrameParams) -> Self {
        let len = params.len();
        let ts = params.sample_period();
        let mut taps: Vec<(usize, Vec<Complex64>)> = Vec::new();
        for path in &ch.paths {
            let d = path.delay_tap;
            let slot = match taps.iter().position(|(tap, _)| *tap == d) {
                Some(i) => i,
                None => {
                    taps.push((d, vec![Complex64::new(0.0, 0.0); len]));
                    taps.len() - 1
                }
            };
            let coeffs = &mut taps[slot].1;
            for (n, c) in coeffs.iter_mut().enumerate() {
                let phase = TAU * path.doppler_hz * (n as f64 - d as f64) * ts;
                *c += path.gain * Complex64::from_polar(1.0, phase);
            }
        }
        taps.sort_by_key(|(d, _)| *d);
        Self { len, taps }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(delay, coefficients)` pairs in ascending delay order.
    pub fn taps(&self) -> &[(usize, Vec<Complex64>)] {
        &self.taps
    }

    pub fn apply(&self, s: &[Complex64]) -> Vec<Complex64> {
        let len = self.len;
        let mut r = vec![Complex64::new(0.0, 0.0); len];
        for (d, coeffs) in &self.taps {
            for n in 0..len {
                r[n] += coeffs[n] * s[(n + len - d % len) % len];
            }
        }
        r
    }

    /// `H^H r`.
    pub fn apply_adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        let len = self.len;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (d, coeffs) in &self.taps {
            for n in 0..len {
                out[(n + len - d % len) % len] += coeffs[n].conj() * r[n];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let len = self.len;
        let mut h = DMatrix::zeros(len, len);
        for (d, coeffs) in &self.taps {
            for n in 0..len {
                h[(n, (n + len - d % len) % len)] += coeffs[n];
            }
        }
        h
    }
}

pub fn apply_channel(
    s: &[Complex64],
    ch: &ChannelRealization,
    params: &FrameParams,
) -> Result<TimeDomainFrame> {
    check_len("transmit frame", s.len(), params.len())?;
    Ok(TimeDomainFrame(ch.taps(params).apply(s)))
}

/// `H_eff = (1/N)(F_N ⊗ I_M) H_TD (F_N^H ⊗ I_M)`, built column by column
/// from the modem and the channel so that
/// `demodulate(apply_channel(modulate(x))) = H_eff x`.
pub fn effective_dd_matrix(
    ch: &ChannelRealization,
    params: &FrameParams,
) -> Result<DMatrix<Complex64>> {
    let len = params.len();
    let modem = Modem::new(*params);
    let taps = ch.taps(params);
    let mut h = DMatrix::zeros(len, len);
    let mut e = vec![Complex64::new(0.0, 0.0); len];
    for j in 0..len {
        e[j] = Complex64::new(1.0, 0.0);
        let col = modem.demodulate(&taps.apply(&modem.modulate(&e)?))?;
        h.set_column(j, &nalgebra::DVector::from_vec(col));
        e[j] = Complex64::new(0.0, 0.0);
    }
    Ok(h)
}

/// Adds circularly-symmetric complex Gaussian noise of variance `sigma2`.
/// Always consumes `2 MN` normal draws.
pub fn add_awgn<R: Rng + ?Sized>(
    r: &[Complex64],
    sigma2: f64,
    rng: &mut R,
) -> Result<TimeDomainFrame> {
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::Parameter(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    let sd = (sigma2 / 2.0).sqrt();
    Ok(TimeDomainFrame(
        r.iter()
            .map(|&z| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                z + Complex64::new(re * sd, im * sd)
            })
            .collect(),
    ))
}

/// Per-sample noise variance giving `snr_db` relative to the mean received
/// sample power of `r`. An infinite SNR gives zero noise.
pub fn calibrate_noise(snr_db: f64, r: &[Complex64]) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::Parameter("SNR must not be NaN".into()));
    }
    let energy: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 || r.is_empty() {
        return Err(Error::Parameter(
            "cannot calibrate noise on an all-zero frame".into(),
        ));
    }
    let power = energy / r.len() as f64;
    Ok(power / 10f64.powf(snr_db / 10.0))
}
