//! Frame parameters, PSK alphabets and the symbol-level primitives shared by
//! the rest of the crate.
//!
//! Delay-Doppler symbols are stored flat: the `(k, l)` symbol (Doppler bin
//! `k`, delay bin `l`) lives at index `k * M + l`.

use std::f64::consts::TAU;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// OTFS grid dimensions and subcarrier spacing.
///
/// The symbol time `T = 1 / delta_f` and the sample period
/// `Ts = 1 / (M * delta_f)` are derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    m: usize,
    n: usize,
    delta_f: f64,
}

impl FrameParams {
    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Parameter(format!(
                "grid dimensions must be positive, got M = {m}, N = {n}"
            )));
        }
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return Err(Error::Parameter(format!(
                "subcarrier spacing must be positive, got {delta_f}"
            )));
        }
        Ok(Self { m, n, delta_f })
    }

    /// Number of delay bins.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of Doppler bins.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    /// Symbol time `T` in seconds.
    pub fn symbol_time(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Sample period in seconds (sampling rate equals the bandwidth `M * delta_f`).
    pub fn sample_period(&self) -> f64 {
        1.0 / (self.m as f64 * self.delta_f)
    }

    /// Number of symbols (and time-domain samples) per frame.
    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of the `(k, l)` delay-Doppler symbol.
    pub fn index(&self, k: usize, l: usize) -> usize {
        k * self.m + l
    }
}

/// `D`-ary PSK alphabet `{A e^{j 2π p / D}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PskAlphabet {
    order: usize,
    amplitude: f64,
}

impl PskAlphabet {
    pub fn new(order: usize, amplitude: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::UnsupportedModulation(order));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Parameter(format!(
                "alphabet amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self { order, amplitude })
    }

    pub fn bpsk() -> Self {
        Self {
            order: 2,
            amplitude: 1.0,
        }
    }

    pub fn qpsk() -> Self {
        Self {
            order: 4,
            amplitude: 1.0,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Bits carried per symbol; only defined for power-of-two orders.
    pub fn bits_per_symbol(&self) -> Result<usize> {
        if self.order.is_power_of_two() {
            Ok(self.order.trailing_zeros() as usize)
        } else {
            Err(Error::UnsupportedModulation(self.order))
        }
    }

    /// The symbol with index `p` (taken modulo `D`).
    pub fn symbol(&self, p: usize) -> Complex64 {
        let p = p % self.order;
        // exact values on the axes keep BPSK/QPSK free of rounding residue
        let unit = match (4 * p) % self.order {
            0 => match (4 * p) / self.order {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            },
            _ => Complex64::from_polar(1.0, TAU * p as f64 / self.order as f64),
        };
        unit * self.amplitude
    }

    /// Nearest-phase detection; the amplitude of `z` is ignored.
    ///
    /// `z = 0` has no phase and deterministically maps to index 0.
    pub fn detect(&self, z: Complex64) -> usize {
        detect_symbol(z, self)
    }
}

/// Maps `z` to `round(D arg(z) / 2π) mod D`.
pub fn detect_symbol(z: Complex64, alphabet: &PskAlphabet) -> usize {
    if z.re == 0.0 && z.im == 0.0 {
        return 0;
    }
    let d = alphabet.order as f64;
    let sector = (d * z.arg() / TAU).round() as i64;
    sector.rem_euclid(alphabet.order as i64) as usize
}

/// Binary-reflected Gray code of a symbol index.
pub fn gray_encode(p: usize) -> usize {
    p ^ (p >> 1)
}

pub fn gray_decode(mut g: usize) -> usize {
    let mut p = 0;
    while g != 0 {
        p ^= g;
        g >>= 1;
    }
    p
}

/// Gray-maps each group of `log2(D)` bits (most significant first) to a
/// symbol index.
pub fn bits_to_indices(bits: &[bool], alphabet: &PskAlphabet) -> Result<Vec<usize>> {
    let bps = alphabet.bits_per_symbol()?;
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::Parameter(format!(
            "{} bits is not a multiple of {bps} bits per symbol",
            bits.len()
        )));
    }
    Ok(bits
        .chunks(bps)
        .map(|group| {
            let word = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            gray_decode(word)
        })
        .collect())
}

/// Inverse of [`bits_to_indices`].
pub fn indices_to_bits(indices: &[usize], alphabet: &PskAlphabet) -> Result<Vec<bool>> {
    let bps = alphabet.bits_per_symbol()?;
    let mut bits = Vec::with_capacity(indices.len() * bps);
    for &p in indices {
        let g = gray_encode(p % alphabet.order);
        bits.extend((0..bps).rev().map(|b| (g >> b) & 1 == 1));
    }
    Ok(bits)
}

/// Maps `M N log2(D)` bits onto one frame of PSK symbols.
pub fn map_bits_to_symbols(
    bits: &[bool],
    alphabet: &PskAlphabet,
    params: &FrameParams,
) -> Result<InfoVector> {
    let bps = alphabet.bits_per_symbol()?;
    check_len("bit sequence", bits.len(), params.len() * bps)?;
    let indices = bits_to_indices(bits, alphabet)?;
    InfoVector::from_indices(&indices, *alphabet)
}

/// One frame of information symbols drawn from a PSK alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoVector {
    symbols: Vec<Complex64>,
    alphabet: PskAlphabet,
}

impl InfoVector {
    pub fn from_indices(indices: &[usize], alphabet: PskAlphabet) -> Result<Self> {
        if let Some(&p) = indices.iter().find(|&&p| p >= alphabet.order) {
            return Err(Error::Parameter(format!(
                "symbol index {p} out of range for {}-PSK",
                alphabet.order
            )));
        }
        Ok(Self {
            symbols: indices.iter().map(|&p| alphabet.symbol(p)).collect(),
            alphabet,
        })
    }

    /// Validates that every value lies on the alphabet (tolerance 1e-12).
    pub fn new(symbols: Vec<Complex64>, alphabet: PskAlphabet) -> Result<Self> {
        let a = alphabet.amplitude;
        let d = alphabet.order as f64;
        for (i, z) in symbols.iter().enumerate() {
            let sector = d * z.arg() / TAU;
            if (z.norm() - a).abs() > 1e-12 * a || (sector - sector.round()).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "symbol {i} = {z} is not in the {}-PSK alphabet of amplitude {a}",
                    alphabet.order
                )));
            }
        }
        Ok(Self { symbols, alphabet })
    }

    pub fn alphabet(&self) -> &PskAlphabet {
        &self.alphabet
    }

    pub fn indices(&self) -> Vec<usize> {
        self.symbols
            .iter()
            .map(|&z| self.alphabet.detect(z))
            .collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.symbols
    }
}

impl Deref for InfoVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.symbols
    }
}

/// Symbols on the two-ring alphabet `S_{A,D} ∪ S_{2A,D}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodedVector {
    symbols: Vec<Complex64>,
}

impl PrecodedVector {
    pub fn new(symbols: Vec<Complex64>) -> Self {
        Self { symbols }
    }

    /// The trivial precoding `x = u`.
    pub fn from_info(u: &InfoVector) -> Self {
        Self {
            symbols: u.symbols.clone(),
        }
    }

    /// True when every element is exactly `u[i]` or `2 u[i]`.
    pub fn is_member_of(&self, u: &InfoVector) -> bool {
        self.symbols.len() == u.len()
            && self
                .symbols
                .iter()
                .zip(u.iter())
                .all(|(&x, &v)| x == v || x == v * 2.0)
    }

    /// Indices of the symbols lifted to amplitude `2A`.
    pub fn boosted(&self, u: &InfoVector) -> Vec<usize> {
        self.symbols
            .iter()
            .zip(u.iter())
            .enumerate()
            .filter(|(_, (&x, &v))| x != v)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.symbols
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.symbols
    }
}

impl Deref for PrecodedVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.symbols
    }
}

/// `MN` time-domain samples at rate `M * delta_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainFrame(pub Vec<Complex64>);

impl TimeDomainFrame {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Deref for TimeDomainFrame {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for TimeDomainFrame {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(m: usize, n: usize) -> FrameParams {
        FrameParams::new(m, n, 15e3).unwrap()
    }

    #[test]
    fn derived_times() {
        let p = params(16, 16);
        assert_eq!(p.symbol_time() * p.delta_f(), 1.0);
        assert!((p.sample_period() - 1.0 / 240e3).abs() < 1e-18);
        assert_eq!(p.index(2, 3), 35);
        assert!(FrameParams::new(0, 4, 15e3).is_err());
        assert!(FrameParams::new(4, 0, 15e3).is_err());
    }

    #[test]
    fn bpsk_mapping_is_antipodal() {
        let a = PskAlphabet::new(2, 1.5).unwrap();
        let p = params(2, 1);
        let u = map_bits_to_symbols(&[false, true], &a, &p).unwrap();
        assert_eq!(u[0], Complex64::new(1.5, 0.0));
        assert_eq!(u[1], Complex64::new(-1.5, 0.0));
    }

    #[test]
    fn qpsk_gray_order() {
        let a = PskAlphabet::qpsk();
        let bits = [false, false, false, true, true, true, true, false];
        assert_eq!(bits_to_indices(&bits, &a).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn all_zero_bits_give_constant_frame() {
        for d in [2, 4, 8, 16] {
            let a = PskAlphabet::new(d, 0.7).unwrap();
            let p = params(4, 2);
            let bits = vec![false; p.len() * a.bits_per_symbol().unwrap()];
            let u = map_bits_to_symbols(&bits, &a, &p).unwrap();
            assert!(u.iter().all(|&z| z == Complex64::new(0.7, 0.0)));
        }
    }

    #[test]
    fn mapping_errors() {
        let p = params(2, 2);
        let qpsk = PskAlphabet::qpsk();
        assert!(matches!(
            map_bits_to_symbols(&[false; 7], &qpsk, &p),
            Err(Error::Parameter(_))
        ));
        let psk3 = PskAlphabet::new(3, 1.0).unwrap();
        assert_eq!(
            map_bits_to_symbols(&[false; 4], &psk3, &p),
            Err(Error::UnsupportedModulation(3))
        );
        assert!(PskAlphabet::new(1, 1.0).is_err());
    }

    #[test]
    fn detection_examples() {
        let a = 1.0;
        for d in [2usize, 4, 8] {
            let alpha = PskAlphabet::new(d, a).unwrap();
            let z = Complex64::from_polar(3.0 * a, TAU / d as f64);
            assert_eq!(detect_symbol(z, &alpha), 1);
            let z = Complex64::from_polar(a, 0.4 * std::f64::consts::PI / d as f64);
            assert_eq!(detect_symbol(z, &alpha), 0);
        }
        let qpsk = PskAlphabet::qpsk();
        assert_eq!(detect_symbol(Complex64::new(-5.0, 0.0), &qpsk), 2);
        assert_eq!(detect_symbol(Complex64::new(0.0, 0.0), &qpsk), 0);
    }

    #[test]
    fn info_vector_validation() {
        let q = PskAlphabet::qpsk();
        assert!(InfoVector::new(vec![Complex64::new(0.0, 1.0)], q).is_ok());
        assert!(InfoVector::new(vec![Complex64::new(2.0, 0.0)], q).is_err());
        assert!(InfoVector::new(vec![Complex64::from_polar(1.0, 0.3)], q).is_err());
        assert!(InfoVector::from_indices(&[4], q).is_err());
    }

    #[test]
    fn membership() {
        let q = PskAlphabet::qpsk();
        let u = InfoVector::from_indices(&[0, 1, 2, 3], q).unwrap();
        let mut x = PrecodedVector::from_info(&u);
        assert!(x.is_member_of(&u));
        x.as_mut_slice()[2] *= 2.0;
        assert!(x.is_member_of(&u));
        assert_eq!(x.boosted(&u), vec![2]);
        x.as_mut_slice()[1] *= 3.0;
        assert!(!x.is_member_of(&u));
    }

    proptest! {
        #[test]
        fn detection_is_amplitude_invariant(log_d in 1u32..6, p in 0usize..32, c in 1e-3f64..1e3) {
            let d = 1usize << log_d;
            let alpha = PskAlphabet::new(d, 1.0).unwrap();
            let p = p % d;
            prop_assert_eq!(alpha.detect(alpha.symbol(p) * c), p);
        }

        #[test]
        fn bits_round_trip(log_d in 1u32..5, seed in any::<u64>()) {
            let d = 1usize << log_d;
            let alpha = PskAlphabet::new(d, 2.0).unwrap();
            let p = params(4, 4);
            let bits: Vec<bool> = (0..p.len() * log_d as usize)
                .map(|i| (seed.rotate_left(i as u32 % 64) ^ (i as u64 * 0x9E37)) & 1 == 1)
                .collect();
            let u = map_bits_to_symbols(&bits, &alpha, &p).unwrap();
            let back = indices_to_bits(&u.indices(), &alpha).unwrap();
            prop_assert_eq!(back, bits);
        }
    }
}
