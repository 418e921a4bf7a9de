//! Two-ring amplitude precoding for PAPR reduction.
//!
//! Every information symbol `u[i]` may be sent as `u[i]` or `2 u[i]`; the
//! phase, which carries the information, never changes. Among the `2^{MN}`
//! resulting frames the precoder looks for one with small PAPR.
//!
//! [`GreedyPrecoder`] runs the iterative single-flip search: each pass
//! evaluates every one-symbol amplitude toggle of the current best frame and
//! commits the single best toggle if it strictly lowers the PAPR.
//! [`brute_force_precode`] enumerates the whole set and is only usable for
//! `MN <= 20`.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::frame::{FrameParams, InfoVector, PrecodedVector};
use crate::modem::Modem;
use crate::papr::{papr, PaprSample};

/// Largest `MN` accepted by [`brute_force_precode`].
pub const BRUTE_FORCE_MAX_LEN: usize = 20;

const RING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    max_iter: usize,
}

impl GreedyConfig {
    pub fn new(max_iter: usize) -> Result<Self> {
        if max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(Self { max_iter })
    }

    /// No iteration cap: stop only when no single toggle improves the PAPR.
    /// Always terminates since the PAPR strictly decreases over a finite set.
    pub fn until_converged() -> Self {
        Self {
            max_iter: usize::MAX,
        }
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self { max_iter: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeResult {
    pub x_star: PrecodedVector,
    pub papr_star: PaprSample,
    /// Loop passes executed, including a final pass that found no improvement.
    pub iterations_used: usize,
    /// Index toggled by each committed pass, in order.
    pub flips: Vec<usize>,
    /// Linear PAPR before any flip followed by the value after each commit.
    pub trajectory: Vec<f64>,
}

/// Ring of `z` relative to amplitude `a`: 1 for `A`, 2 for `2A`.
fn ring(z: Complex64, a: f64, index: usize) -> Result<u32> {
    let r = z.norm() / a;
    if (r - 1.0).abs() <= RING_TOLERANCE {
        Ok(1)
    } else if (r - 2.0).abs() <= RING_TOLERANCE {
        Ok(2)
    } else {
        Err(Error::CorruptedState {
            index,
            magnitude: z.norm(),
            amplitude: a,
        })
    }
}

/// Toggle factor `2^{3 - 2|x|/A}`: 2 on the inner ring, 1/2 on the outer.
fn toggle_factor(z: Complex64, a: f64, index: usize) -> Result<f64> {
    let level = ring(z, a, index)? as i32;
    Ok(2f64.powi(3 - 2 * level))
}

/// Copy of `x` with the amplitude of element `t` toggled between `A` and `2A`.
pub fn candidate_flip(x: &PrecodedVector, t: usize, amplitude: f64) -> Result<PrecodedVector> {
    if t >= x.len() {
        return Err(Error::Parameter(format!(
            "flip index {t} out of range for length {}",
            x.len()
        )));
    }
    let factor = toggle_factor(x[t], amplitude, t)?;
    let mut out = x.clone();
    out.as_mut_slice()[t] *= factor;
    Ok(out)
}

/// Reusable greedy precoder for one grid size.
#[derive(Debug, Clone)]
pub struct GreedyPrecoder {
    modem: Modem,
    /// `e^{-j 2π r / N}` for `r = 0 .. N`.
    twiddles: Vec<Complex64>,
}

impl GreedyPrecoder {
    pub fn new(params: FrameParams) -> Self {
        let n = params.n();
        let twiddles = (0..n)
            .map(|r| crate::modem::unit_phase(r, n).conj())
            .collect();
        Self {
            modem: Modem::new(params),
            twiddles,
        }
    }

    pub fn modem(&self) -> &Modem {
        &self.modem
    }

    /// Greedy single-flip search. Ties between equally good toggles go to
    /// the lowest index; the improvement test is a strict comparison on the
    /// computed values.
    pub fn precode(&self, u: &InfoVector, cfg: &GreedyConfig) -> Result<PrecodeResult> {
        let params = *self.modem.params();
        check_len("information vector", u.len(), params.len())?;
        let a = u.alphabet().amplitude();
        let (m, n) = (params.m(), params.n());
        let mn = params.len();
        let mn_f = mn as f64;

        let mut x = PrecodedVector::from_info(u);
        let mut s = self.modem.modulate(&x)?.into_inner();
        let mut p_star = papr(&s)?.linear;
        let mut trajectory = vec![p_star];
        let mut flips = Vec::new();
        let mut iterations = 0;

        let mut col_peak = vec![0.0; m];
        let mut col_energy = vec![0.0; m];
        let mut deltas = vec![Complex64::new(0.0, 0.0); mn];

        loop {
            // per delay-bin statistics of the current frame; a toggle of
            // symbol (k, l) only moves the N samples of delay bin l
            for l in 0..m {
                let (mut peak, mut energy) = (0.0f64, 0.0f64);
                for slot in 0..n {
                    let p = s[slot * m + l].norm_sqr();
                    peak = peak.max(p);
                    energy += p;
                }
                col_peak[l] = peak;
                col_energy[l] = energy;
            }
            let total: f64 = col_energy.iter().sum();
            let (first, second) = top_two(&col_peak);
            for (t, d) in deltas.iter_mut().enumerate() {
                *d = x[t] * (toggle_factor(x[t], a, t)? - 1.0);
            }

            let mut best = (f64::INFINITY, usize::MAX);
            for t in 0..mn {
                let (k, l) = (t / m, t % m);
                let delta = deltas[t];
                let others_peak = if l == first.1 { second } else { first.0 };
                let others_energy = total - col_energy[l];
                // Parseval bound on the candidate energy, used only to skip
                // candidates that cannot beat the best one found so far
                let energy_bound =
                    total + n as f64 * (delta + x[t]).norm_sqr() - n as f64 * x[t].norm_sqr();
                let cutoff = best.0 * energy_bound * (1.0 + 1e-9) / mn_f;
                if others_peak > cutoff {
                    continue;
                }
                let mut peak = others_peak;
                let mut energy = 0.0;
                let mut pruned = false;
                for slot in 0..n {
                    let v = s[slot * m + l] + delta * self.twiddles[(slot * k) % n];
                    let p = v.norm_sqr();
                    if p > peak {
                        peak = p;
                        if peak > cutoff {
                            pruned = true;
                            break;
                        }
                    }
                    energy += p;
                }
                if pruned {
                    continue;
                }
                let candidate = mn_f * peak / (others_energy + energy);
                if candidate < best.0 {
                    best = (candidate, t);
                }
            }
            iterations += 1;

            if best.0 < p_star {
                let t = best.1;
                let factor = toggle_factor(x[t], a, t)?;
                x.as_mut_slice()[t] *= factor;
                s = self.modem.modulate(&x)?.into_inner();
                p_star = papr(&s)?.linear;
                flips.push(t);
                trajectory.push(p_star);
            } else {
                break;
            }
            if iterations >= cfg.max_iter {
                break;
            }
        }

        Ok(PrecodeResult {
            x_star: x,
            papr_star: PaprSample::from_linear(p_star),
            iterations_used: iterations,
            flips,
            trajectory,
        })
    }
}

/// Largest and second-largest values with the index of the largest.
fn top_two(values: &[f64]) -> ((f64, usize), f64) {
    let mut first = (f64::NEG_INFINITY, usize::MAX);
    let mut second = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > first.0 {
            second = first.0;
            first = (v, i);
        } else if v > second {
            second = v;
        }
    }
    // a single delay bin has no "other" bins
    (first, second.max(0.0))
}

/// One-shot greedy precoding; plans transforms on every call.
pub fn greedy_precode(
    u: &InfoVector,
    params: &FrameParams,
    cfg: &GreedyConfig,
) -> Result<PrecodeResult> {
    GreedyPrecoder::new(*params).precode(u, cfg)
}

/// Exhaustive minimum-PAPR precoding over all `2^{MN}` amplitude patterns.
///
/// Bit `i` of the enumeration counter selects `2 u[i]`; ties keep the
/// lowest counter.
pub fn brute_force_precode(
    u: &InfoVector,
    params: &FrameParams,
) -> Result<(PrecodedVector, PaprSample)> {
    let mn = params.len();
    check_len("information vector", u.len(), mn)?;
    if mn > BRUTE_FORCE_MAX_LEN {
        return Err(Error::InstanceTooLarge {
            mn,
            max: BRUTE_FORCE_MAX_LEN,
        });
    }
    let modem = Modem::new(*params);
    let mut best: Option<(f64, u32)> = None;
    let mut x = u.to_vec();
    for counter in 0u32..(1u32 << mn) {
        for (i, z) in x.iter_mut().enumerate() {
            *z = if counter >> i & 1 == 1 {
                u[i] * 2.0
            } else {
                u[i]
            };
        }
        let p = papr(&modem.modulate(&x)?)?.linear;
        if best.is_none_or(|(b, _)| p < b) {
            best = Some((p, counter));
        }
    }
    let (p, counter) = best.expect("at least one candidate");
    let x: Vec<_> = (0..mn)
        .map(|i| {
            if counter >> i & 1 == 1 {
                u[i] * 2.0
            } else {
                u[i]
            }
        })
        .collect();
    Ok((PrecodedVector::new(x), PaprSample::from_linear(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PskAlphabet;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(m: usize, n: usize) -> FrameParams {
        FrameParams::new(m, n, 15e3).unwrap()
    }

    #[test]
    fn flip_scales_amplitude_only() {
        let a = 0.8;
        let theta = 1.1;
        let x = PrecodedVector::new(vec![Complex64::from_polar(a, theta), c(a, 0.0)]);
        let up = candidate_flip(&x, 0, a).unwrap();
        assert!((up[0] - Complex64::from_polar(2.0 * a, theta)).norm() < 1e-15);
        assert_eq!(up[1], x[1]);
        let down = candidate_flip(&up, 0, a).unwrap();
        assert_eq!(down, x);
    }

    #[test]
    fn flip_rejects_off_ring_symbols() {
        let x = PrecodedVector::new(vec![c(1.5, 0.0)]);
        assert!(matches!(
            candidate_flip(&x, 0, 1.0),
            Err(Error::CorruptedState { index: 0, .. })
        ));
        assert!(candidate_flip(&x, 3, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GreedyConfig::new(0).is_err());
        assert_eq!(GreedyConfig::default().max_iter(), 5);
    }

    #[test]
    fn single_symbol_frame_never_flips() {
        let u = InfoVector::from_indices(&[1], PskAlphabet::qpsk()).unwrap();
        let r = greedy_precode(&u, &params(1, 1), &GreedyConfig::default()).unwrap();
        assert_eq!(r.x_star.as_slice(), u.as_slice());
        assert_eq!(r.papr_star.linear, 1.0);
        assert_eq!(r.iterations_used, 1);
        assert!(r.flips.is_empty());
    }

    #[test]
    fn top_two_handles_single_bin() {
        assert_eq!(top_two(&[3.0]), ((3.0, 0), 0.0));
        assert_eq!(top_two(&[1.0, 5.0, 4.0]), ((5.0, 1), 4.0));
        assert_eq!(top_two(&[5.0, 5.0]), ((5.0, 0), 5.0));
    }

    #[test]
    fn brute_force_size_guard() {
        let u = InfoVector::from_indices(&[0; 21], PskAlphabet::bpsk()).unwrap();
        assert_eq!(
            brute_force_precode(&u, &params(21, 1)),
            Err(Error::InstanceTooLarge { mn: 21, max: 20 })
        );
    }
}
