//! Delay-Doppler to time-domain conversion for a rectangular transmit pulse.
//!
//! With the rectangular pulse and sampling at the bandwidth `M Δf`, the
//! ISFFT followed by the Heisenberg transform collapses to
//! `s = (F_N^H ⊗ I_M) x`, where `F_N[p, q] = e^{+j 2π p q / N}`. Each delay
//! bin `l` therefore sees an independent `N`-point DFT across its Doppler
//! bins:
//!
//! ```text
//! s[n M + l] = Σ_k x[k M + l] e^{-j 2π n k / N}
//! ```
//!
//! [`Modem`] evaluates this with FFTs. The continuous-time construction
//! (TF grid, Heisenberg sum, pulse) is kept in [`oracle`] for validation.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Result};
use crate::frame::{FrameParams, TimeDomainFrame};

/// Planned transforms for one grid size. Immutable once built; share it
/// freely across threads.
#[derive(Clone)]
pub struct Modem {
    params: FrameParams,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Modem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modem")
            .field("params", &self.params)
            .finish()
    }
}

impl Modem {
    pub fn new(params: FrameParams) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            params,
            forward: planner.plan_fft_forward(params.n()),
            inverse: planner.plan_fft_inverse(params.n()),
        }
    }

    pub fn params(&self) -> &FrameParams {
        &self.params
    }

    /// `s = (F_N^H ⊗ I_M) x`.
    pub fn modulate(&self, x: &[Complex64]) -> Result<TimeDomainFrame> {
        check_len("symbol vector", x.len(), self.params.len())?;
        Ok(TimeDomainFrame(self.per_delay_bin(x, &self.forward, 1.0)))
    }

    /// `y = (1/N)(F_N ⊗ I_M) r`, the exact inverse of [`Modem::modulate`].
    pub fn demodulate(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("received frame", r.len(), self.params.len())?;
        Ok(self.per_delay_bin(r, &self.inverse, 1.0 / self.params.n() as f64))
    }

    fn per_delay_bin(
        &self,
        input: &[Complex64],
        fft: &Arc<dyn Fft<f64>>,
        scale: f64,
    ) -> Vec<Complex64> {
        let (m, n) = (self.params.m(), self.params.n());
        // gather into delay-major order so each delay bin is one contiguous
        // length-N chunk, transform all chunks in one call, then scatter back
        let mut work = vec![Complex64::new(0.0, 0.0); m * n];
        for k in 0..n {
            for l in 0..m {
                work[l * n + k] = input[k * m + l];
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut work, &mut scratch);
        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for l in 0..m {
            for k in 0..n {
                out[k * m + l] = work[l * n + k] * scale;
            }
        }
        out
    }
}

/// Convenience wrapper that plans transforms on every call.
pub fn modulate(x: &[Complex64], params: &FrameParams) -> Result<TimeDomainFrame> {
    Modem::new(*params).modulate(x)
}

/// Convenience wrapper that plans transforms on every call.
pub fn demodulate(r: &[Complex64], params: &FrameParams) -> Result<Vec<Complex64>> {
    Modem::new(*params).demodulate(r)
}

/// Unnormalized DFT matrix with `F[p, q] = e^{+j 2π p q / n}`.
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |p, q| unit_phase(p * q, n))
}

/// Dense `(F_N^H ⊗ I_M)`. Only meant for small grids and tests.
pub fn transmit_matrix(params: &FrameParams) -> DMatrix<Complex64> {
    let f_h = dft_matrix(params.n()).adjoint();
    f_h.kronecker(&DMatrix::<Complex64>::identity(params.m(), params.m()))
}

/// `e^{+j 2π num / den}` with the numerator reduced first.
pub(crate) fn unit_phase(num: usize, den: usize) -> Complex64 {
    let r = num % den;
    Complex64::from_polar(1.0, TAU * r as f64 / den as f64)
}

/// Time-frequency grid `X[n, m]`, `N` rows by `M` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TfGrid {
    n: usize,
    m: usize,
    data: Vec<Complex64>,
}

impl TfGrid {
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.data[n * self.m + m]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

/// Direct evaluation of the ISFFT and the Heisenberg transform. Quadratic
/// cost; for validating [`Modem`] only.
pub mod oracle {
    use super::*;

    /// `X[n,m] = Σ_k Σ_l x[k,l] e^{-j2π(ml/M - nk/N)}`.
    pub fn isfft(x: &[Complex64], params: &FrameParams) -> Result<TfGrid> {
        check_len("symbol vector", x.len(), params.len())?;
        let (m_bins, n_bins) = (params.m(), params.n());
        let mut data = vec![Complex64::new(0.0, 0.0); m_bins * n_bins];
        for n in 0..n_bins {
            for m in 0..m_bins {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n_bins {
                    let doppler = unit_phase(n * k, n_bins);
                    for l in 0..m_bins {
                        acc += x[k * m_bins + l] * doppler * unit_phase(m * l, m_bins).conj();
                    }
                }
                data[n * m_bins + m] = acc;
            }
        }
        Ok(TfGrid {
            n: n_bins,
            m: m_bins,
            data,
        })
    }

    /// Samples `s(t) = Σ_n Σ_m X[n,m] g(t - nT) e^{j2π m Δf (t - nT)}` with
    /// the rectangular pulse `g(t) = 1/√T` on `[0, T)`, at
    /// `t = i / (L M Δf)` for `i = 0 .. L M N`.
    pub fn heisenberg(
        grid: &TfGrid,
        params: &FrameParams,
        oversample: usize,
    ) -> Result<Vec<Complex64>> {
        if oversample == 0 {
            return Err(crate::Error::Parameter(
                "oversample factor must be at least 1".into(),
            ));
        }
        let (n_bins, m_bins) = grid.dims();
        let per_slot = oversample * m_bins;
        let amp = 1.0 / params.symbol_time().sqrt();
        let mut out = Vec::with_capacity(per_slot * n_bins);
        for i in 0..per_slot * n_bins {
            // only the pulse of slot n = floor(t / T) is non-zero at t
            let slot = i / per_slot;
            let offset = i % per_slot; // (t - nT) Δf = offset / (L M)
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..m_bins {
                acc += grid.get(slot, m) * unit_phase(m * offset, per_slot);
            }
            out.push(acc * amp);
        }
        Ok(out)
    }

    /// ISFFT followed by the sampled Heisenberg transform.
    pub fn modulate_oracle(
        x: &[Complex64],
        params: &FrameParams,
        oversample: usize,
    ) -> Result<Vec<Complex64>> {
        heisenberg(&isfft(x, params)?, params, oversample)
    }

    /// Reorders critically sampled oracle output onto the [`Modem`] sample
    /// order. The continuous-time sum runs the Doppler DFT with the opposite
    /// sign, which reverses the slot index `n -> -n mod N` within every delay
    /// bin. PAPR is unaffected.
    pub fn align_to_modem(samples: &[Complex64], params: &FrameParams) -> Result<Vec<Complex64>> {
        check_len("oracle samples", samples.len(), params.len())?;
        let (m, n) = (params.m(), params.n());
        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for slot in 0..n {
            let mirrored = (n - slot) % n;
            out[mirrored * m..(mirrored + 1) * m]
                .copy_from_slice(&samples[slot * m..(slot + 1) * m]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(m: usize, n: usize) -> FrameParams {
        FrameParams::new(m, n, 15e3).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let scale = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
    }

    #[test]
    fn single_sample_is_identity() {
        let x = vec![c(0.3, -1.2)];
        assert_eq!(modulate(&x, &params(1, 1)).unwrap().0, x);
    }

    #[test]
    fn constant_pair_becomes_impulse() {
        let a = 1.7;
        let s = modulate(&[c(a, 0.0), c(a, 0.0)], &params(1, 2)).unwrap();
        assert!(close(&s, &[c(2.0 * a, 0.0), c(0.0, 0.0)], 1e-15));
        let back = demodulate(&s, &params(1, 2)).unwrap();
        assert!(close(&back, &[c(a, 0.0), c(a, 0.0)], 1e-15));
    }

    #[test]
    fn two_by_two_constant_frame() {
        // (F_2^H ⊗ I_2)(1,1,1,1): rows are [1 0 1 0; 0 1 0 1; 1 0 -1 0; 0 1 0 -1]
        let a = 1.0;
        let s = modulate(&[c(a, 0.0); 4], &params(2, 2)).unwrap();
        let dense = transmit_matrix(&params(2, 2)) * nalgebra::DVector::from_element(4, c(a, 0.0));
        assert!(close(&s, dense.as_slice(), 1e-15));
        assert!(close(
            &s,
            &[c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            1e-15
        ));
    }

    #[test]
    fn demodulate_zero_and_length_errors() {
        let p = params(4, 2);
        assert!(demodulate(&[c(0.0, 0.0); 8], &p)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
        assert!(modulate(&[c(0.0, 0.0); 7], &p).is_err());
        assert!(demodulate(&[c(0.0, 0.0); 9], &p).is_err());
    }

    #[test]
    fn dft_matrix_convention() {
        let f = dft_matrix(5);
        assert!((f[(1, 1)] - Complex64::from_polar(1.0, TAU / 5.0)).norm() < 1e-15);
        let g = f.adjoint() * &f;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 5.0 } else { 0.0 };
                assert!((g[(i, j)] - c(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn oracle_zero_and_single_pulse() {
        let p = params(2, 2);
        assert!(oracle::modulate_oracle(&[c(0.0, 0.0); 4], &p, 3)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
        let one = params(1, 1);
        let s = oracle::modulate_oracle(&[c(1.0, 0.0)], &one, 8).unwrap();
        let first = s[0].norm();
        assert!(s.iter().all(|z| (z.norm() - first).abs() < 1e-12));
        assert!(oracle::modulate_oracle(&[c(1.0, 0.0)], &one, 0).is_err());
    }

    proptest! {
        #[test]
        fn linearity(seed in any::<u64>(), alpha_re in -2.0f64..2.0, beta_im in -2.0f64..2.0) {
            let p = params(3, 5);
            let mut st = seed;
            let mut next = || { st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((st >> 11) as f64 / (1u64 << 53) as f64) - 0.5 };
            let x: Vec<_> = (0..15).map(|_| c(next(), next())).collect();
            let y: Vec<_> = (0..15).map(|_| c(next(), next())).collect();
            let (a, b) = (c(alpha_re, 0.3), c(0.1, beta_im));
            let modem = Modem::new(p);
            let combo: Vec<_> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = modem.modulate(&combo).unwrap();
            let sx = modem.modulate(&x).unwrap();
            let sy = modem.modulate(&y).unwrap();
            let rhs: Vec<_> = sx.iter().zip(sy.iter()).map(|(u, v)| a * u + b * v).collect();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }
}
