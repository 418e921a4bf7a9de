//! Peak-to-average power ratio of a frame and empirical CCDFs over frame
//! ensembles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::FrameParams;
use crate::modem::oracle;

/// PAPR of one frame, linear and in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprSample {
    pub linear: f64,
    pub db: f64,
}

impl PaprSample {
    pub fn from_linear(linear: f64) -> Self {
        Self {
            linear,
            db: 10.0 * linear.log10(),
        }
    }
}

/// `MN max|s[n]|² / Σ|s[n]|²` over the critically sampled frame.
pub fn papr(s: &[Complex64]) -> Result<PaprSample> {
    let (peak, energy) = peak_and_energy(s);
    if energy == 0.0 {
        return Err(Error::UndefinedPapr);
    }
    Ok(PaprSample::from_linear(s.len() as f64 * peak / energy))
}

pub(crate) fn peak_and_energy(s: &[Complex64]) -> (f64, f64) {
    s.iter().fold((0.0f64, 0.0f64), |(peak, energy), z| {
        let p = z.norm_sqr();
        (peak.max(p), energy + p)
    })
}

/// PAPR of the continuous-time waveform sampled `oversample` times faster
/// than the critical rate. Diagnostic only.
pub fn papr_oversampled(
    x: &[Complex64],
    params: &FrameParams,
    oversample: usize,
) -> Result<PaprSample> {
    papr(&oracle::modulate_oracle(x, params, oversample)?)
}

/// Empirical CCDF sampled on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub probabilities: Vec<f64>,
}

/// Default grid: 0 to 13 dB in 0.1 dB steps.
pub fn default_thresholds() -> Vec<f64> {
    (0..=130).map(|i| i as f64 / 10.0).collect()
}

/// `P(PAPR > threshold)` for every threshold, estimated by counting.
pub fn ccdf(samples_db: &[f64], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    if samples_db.is_empty() {
        return Err(Error::Parameter("CCDF needs at least one sample".into()));
    }
    let sorted = sorted(samples_db);
    let total = sorted.len() as f64;
    let mut grid = thresholds_db.to_vec();
    grid.sort_by(f64::total_cmp);
    let probabilities = grid
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&s| s <= t);
            (sorted.len() - at_or_below) as f64 / total
        })
        .collect();
    Ok(CcdfCurve {
        thresholds_db: grid,
        probabilities,
    })
}

/// Threshold (dB) at which the empirical CCDF equals `target`.
///
/// The empirical curve is the polyline through `(s_(1), 1)` and
/// `(s_(i), (F - i) / F)` for the ascending samples `s_(1) ≤ … ≤ s_(F)`;
/// the readout interpolates linearly in dB between adjacent points.
pub fn papr_at_ccdf(samples_db: &[f64], target: f64) -> Result<f64> {
    if samples_db.is_empty() {
        return Err(Error::Parameter(
            "CCDF readout needs at least one sample".into(),
        ));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Parameter(format!(
            "CCDF target {target} outside [0, 1]"
        )));
    }
    let sorted = sorted(samples_db);
    let f = sorted.len() as f64;
    let mut prev = (sorted[0], 1.0);
    for (i, &s) in sorted.iter().enumerate() {
        let point = (s, (f - (i + 1) as f64) / f);
        if point.1 <= target {
            if point.1 == target || prev.1 == point.1 {
                return Ok(point.0);
            }
            let w = (prev.1 - target) / (prev.1 - point.1);
            return Ok(prev.0 + w * (point.0 - prev.0));
        }
        prev = point;
    }
    Ok(sorted[sorted.len() - 1])
}

/// Merges sample batches into one ascending sequence. The result does not
/// depend on batch order.
pub fn merge_batches<I, B>(batches: I) -> Vec<f64>
where
    I: IntoIterator<Item = B>,
    B: AsRef<[f64]>,
{
    let mut all: Vec<f64> = batches
        .into_iter()
        .flat_map(|b| b.as_ref().to_vec())
        .collect();
    all.sort_by(f64::total_cmp);
    all
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{FrameParams, PskAlphabet};
    use crate::modem::modulate;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_modulus_is_zero_db() {
        let s: Vec<_> = (0..16)
            .map(|i| Complex64::from_polar(0.4, i as f64))
            .collect();
        let p = papr(&s).unwrap();
        assert!((p.linear - 1.0).abs() < 1e-14);
        assert!(p.db.abs() < 1e-12);
    }

    #[test]
    fn half_empty_frame() {
        let p = papr(&[c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(p.linear, 2.0);
        assert!((p.db - 3.0103).abs() < 1e-4);
    }

    #[test]
    fn all_ones_bpsk_frame() {
        let params = FrameParams::new(16, 16, 15e3).unwrap();
        let u = vec![PskAlphabet::bpsk().symbol(0); 256];
        let p = papr(&modulate(&u, &params).unwrap()).unwrap();
        assert!((p.linear - 16.0).abs() < 1e-12);
        assert!((p.db - 12.0412).abs() < 1e-4);
    }

    #[test]
    fn zero_frame_is_an_error() {
        assert_eq!(papr(&[c(0.0, 0.0); 3]), Err(Error::UndefinedPapr));
    }

    #[test]
    fn ccdf_counts() {
        let samples = [0.0, 3.01, 6.02];
        let curve = ccdf(&samples, &[-1.0, 1.5, 7.0]).unwrap();
        assert_eq!(curve.probabilities, vec![1.0, 2.0 / 3.0, 0.0]);
        assert!(ccdf(&[], &[0.0]).is_err());
    }

    #[test]
    fn ccdf_grid_is_non_increasing() {
        let samples: Vec<f64> = (0..200)
            .map(|i| (i as f64 * 0.37).sin() * 4.0 + 6.0)
            .collect();
        let curve = ccdf(&samples, &default_thresholds()).unwrap();
        assert_eq!(curve.thresholds_db.len(), 131);
        assert!(curve.probabilities.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn readout_single_sample_is_step() {
        for target in [0.0, 0.1, 0.5, 1.0] {
            assert_eq!(papr_at_ccdf(&[4.2], target).unwrap(), 4.2);
        }
    }

    #[test]
    fn readout_interpolates() {
        // points: (1,1) (1,0.75) (2,0.5) (3,0.25) (4,0)
        let samples = [4.0, 2.0, 1.0, 3.0];
        assert_eq!(papr_at_ccdf(&samples, 0.5).unwrap(), 2.0);
        assert!((papr_at_ccdf(&samples, 0.6).unwrap() - 1.6).abs() < 1e-12);
        assert!((papr_at_ccdf(&samples, 0.1).unwrap() - 3.6).abs() < 1e-12);
        // a thousand samples: CCDF 0.1 lands exactly on the 900th order statistic
        let many: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(papr_at_ccdf(&many, 0.1).unwrap(), 900.0);
        assert_eq!(papr_at_ccdf(&many, 0.5).unwrap(), 500.0);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = merge_batches([vec![3.0, 1.0], vec![2.0]]);
        let b = merge_batches([vec![2.0], vec![1.0, 3.0]]);
        assert_eq!(a, b);
        assert_eq!(a, vec![1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn scale_phase_permutation_invariance(
            vals in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..40),
            scale in 0.01f64..100.0,
            phase in 0.0f64..6.3,
            rot in 0usize..40,
        ) {
            let s: Vec<_> = vals.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assume!(s.iter().any(|z| z.norm() > 1e-3));
            let base = papr(&s).unwrap().linear;
            let k = Complex64::from_polar(scale, phase);
            let scaled: Vec<_> = s.iter().map(|z| z * k).collect();
            prop_assert!((papr(&scaled).unwrap().linear - base).abs() <= 1e-12 * base);
            let mut permuted = s.clone();
            permuted.rotate_left(rot % s.len());
            permuted.reverse();
            prop_assert!((papr(&permuted).unwrap().linear - base).abs() <= 1e-12 * base);
            prop_assert!(base >= 1.0 - 1e-12 && base <= s.len() as f64 + 1e-12);
        }
    }

    #[test]
    fn single_nonzero_sample_hits_upper_bound() {
        let mut s = vec![c(0.0, 0.0); 12];
        s[5] = c(0.0, -3.0);
        assert_eq!(papr(&s).unwrap().linear, 12.0);
    }
}
