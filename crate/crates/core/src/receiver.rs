//! MMSE equalization in the delay-Doppler domain, phase detection and error
//! counting.
//!
//! Two equalizer routes are provided. [`mmse_equalize`] works on the dense
//! effective matrix `H_eff` exactly as written. [`TimeDomainMmse`] solves the
//! same problem in the time domain: `H_eff = U H_TD U^H` with the unitary
//! `U = (F_N ⊗ I_M)/√N`, so
//!
//! ```text
//! (H_eff^H H_eff + αI)^{-1} H_eff^H y = demodulate((H_TD^H H_TD + αI)^{-1} H_TD^H r)
//! ```
//!
//! and `H_TD^H H_TD` is a periodic band matrix whose width is the delay
//! spread in samples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::TapMatrix;
use crate::error::{check_len, Error, Result};
use crate::frame::{gray_encode, FrameParams};
use crate::linalg::EnvelopeMatrix;

/// DD-domain noise variance after [`crate::Modem::demodulate`]: the map
/// `(1/N)(F_N ⊗ I_M)` scales white noise of variance `σ²` to `σ²/N`.
pub fn dd_noise_variance(sigma2_td: f64, params: &FrameParams) -> f64 {
    sigma2_td / params.n() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerInput {
    pub y: Vec<Complex64>,
    pub h_eff: DMatrix<Complex64>,
    pub sigma2_dd: f64,
    /// Symbol energy assumed by the regularizer.
    pub es: f64,
}

impl EqualizerInput {
    fn regularization(&self) -> Result<f64> {
        regularization(self.sigma2_dd, self.es)
    }
}

fn regularization(sigma2_dd: f64, es: f64) -> Result<f64> {
    if !(sigma2_dd.is_finite() && sigma2_dd >= 0.0) {
        return Err(Error::Parameter(format!(
            "noise variance must be non-negative, got {sigma2_dd}"
        )));
    }
    if !(es.is_finite() && es > 0.0) {
        return Err(Error::Parameter(format!(
            "symbol energy must be positive, got {es}"
        )));
    }
    Ok(sigma2_dd / es)
}

/// `x̂ = (H^H H + (σ²/Es) I)^{-1} H^H y` by Cholesky, falling back to LU
/// when the normal matrix is numerically indefinite.
pub fn mmse_equalize(input: &EqualizerInput) -> Result<Vec<Complex64>> {
    let h = &input.h_eff;
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Parameter(format!(
            "H_eff must be square, got {}x{}",
            n,
            h.ncols()
        )));
    }
    check_len("observation", input.y.len(), n)?;
    let alpha = input.regularization()?;
    let hh = h.adjoint();
    let mut normal = &hh * h;
    for i in 0..n {
        normal[(i, i)] += Complex64::new(alpha, 0.0);
    }
    let rhs = &hh * DVector::from_column_slice(&input.y);
    let x = match normal.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => normal
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolverFailure("singular MMSE normal matrix".into()))?,
    };
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SolverFailure("non-finite MMSE solution".into()));
    }
    Ok(x.as_slice().to_vec())
}

/// MMSE equalizer on the sparse time-domain channel. Precomputes the Gram
/// matrix once per channel; each call only shifts its diagonal and factors.
#[derive(Debug, Clone)]
pub struct TimeDomainMmse {
    taps: TapMatrix,
    gram: EnvelopeMatrix,
}

impl TimeDomainMmse {
    pub fn new(taps: TapMatrix) -> Self {
        let len = taps.len();
        // nonzeros of row n of H_TD: column (n - d) mod len for every tap d
        let cols = |n: usize| -> Vec<(usize, Complex64)> {
            taps.taps()
                .iter()
                .map(|(d, coeffs)| ((n + len - d % len) % len, coeffs[n]))
                .collect()
        };
        let mut first: Vec<usize> = (0..len).collect();
        for n in 0..len {
            let entries = cols(n);
            for &(a, _) in &entries {
                for &(b, _) in &entries {
                    if b <= a {
                        first[a] = first[a].min(b);
                    }
                }
            }
        }
        let mut gram = EnvelopeMatrix::zeros(first);
        for n in 0..len {
            let entries = cols(n);
            for &(a, va) in &entries {
                for &(b, vb) in &entries {
                    if b <= a {
                        gram.add(a, b, va.conj() * vb);
                    }
                }
            }
        }
        Self { taps, gram }
    }

    /// Time-domain estimate `z = (H^H H + αI)^{-1} H^H r` with
    /// `α = sigma2_dd / es`. The DD-domain MMSE estimate is `demodulate(z)`.
    pub fn equalize(&self, r: &[Complex64], sigma2_dd: f64, es: f64) -> Result<Vec<Complex64>> {
        check_len("received frame", r.len(), self.taps.len())?;
        let alpha = regularization(sigma2_dd, es)?;
        let mut normal = self.gram.clone();
        normal.shift_diagonal(alpha);
        let z = match normal.cholesky() {
            Ok(chol) => chol.solve(&self.taps.apply_adjoint(r)),
            Err(_) => self.dense_fallback(r, alpha)?,
        };
        if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::SolverFailure("non-finite MMSE solution".into()));
        }
        Ok(z)
    }
}

impl TimeDomainMmse {
    /// Dense LU when the banded Cholesky breaks down. Without regularization
    /// this solves `H z = r` directly instead of the squared normal system.
    fn dense_fallback(&self, r: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
        let h = self.taps.to_dense();
        let rhs = DVector::from_column_slice(r);
        let solved = if alpha == 0.0 {
            h.lu().solve(&rhs)
        } else {
            let hh = h.adjoint();
            let mut normal = &hh * h;
            for i in 0..normal.nrows() {
                normal[(i, i)] += Complex64::new(alpha, 0.0);
            }
            normal.lu().solve(&(hh * rhs))
        };
        solved
            .map(|z| z.as_slice().to_vec())
            .ok_or_else(|| Error::SolverFailure("singular time-domain channel".into()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

impl ErrorCounts {
    pub fn ser(&self) -> f64 {
        ratio(self.symbol_errors, self.symbols)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.symbols += rhs.symbols;
        self.symbol_errors += rhs.symbol_errors;
        self.bits += rhs.bits;
        self.bit_errors += rhs.bit_errors;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Symbol errors by index comparison; bit errors through the Gray labels.
pub fn count_errors(detected: &[usize], truth: &[usize], order: usize) -> Result<ErrorCounts> {
    check_len("detected indices", detected.len(), truth.len())?;
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::UnsupportedModulation(order));
    }
    let bps = order.trailing_zeros() as u64;
    let mut counts = ErrorCounts {
        symbols: truth.len() as u64,
        bits: truth.len() as u64 * bps,
        ..ErrorCounts::default()
    };
    for (&d, &t) in detected.iter().zip(truth) {
        if d != t {
            counts.symbol_errors += 1;
            counts.bit_errors +=
                (gray_encode(d % order) ^ gray_encode(t % order)).count_ones() as u64;
        }
    }
    Ok(counts)
}
