//! Channel model, effective delay-Doppler matrix and MMSE receiver.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use otfs_core::channel::{
    add_awgn, apply_channel, effective_dd_matrix, sample_channel, ChannelRealization, Path,
    PathProfile,
};
use otfs_core::experiment::{run_error_rate_grid, ExperimentConfig, Method, ProfileKind};
use otfs_core::modem::transmit_matrix;
use otfs_core::receiver::{mmse_equalize, EqualizerInput};
use otfs_core::{Complex64, FrameParams, Modem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(m: usize, n: usize) -> FrameParams {
    FrameParams::new(m, n, 15e3).unwrap()
}

fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Time-domain channel matrix written straight from the path sum.
fn dense_channel(ch: &ChannelRealization, p: &FrameParams) -> DMatrix<Complex64> {
    let len = p.len();
    let ts = p.sample_period();
    let mut h = DMatrix::zeros(len, len);
    for path in &ch.paths {
        for n in 0..len {
            let src = (n + len - path.delay_tap % len) % len;
            let phase = TAU * path.doppler_hz * (n as f64 - path.delay_tap as f64) * ts;
            h[(n, src)] += path.gain * Complex64::from_polar(1.0, phase);
        }
    }
    h
}

fn random_channel(rng: &mut impl Rng, p: &FrameParams) -> ChannelRealization {
    let paths = (0..rng.random_range(1..5))
        .map(|_| Path {
            gain: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            delay_tap: rng.random_range(0..p.len()),
            doppler_hz: rng.random_range(-3000.0..3000.0),
        })
        .collect();
    ChannelRealization { paths }
}

#[test]
fn effective_matrix_consistency_contract() {
    let p = params(4, 4);
    let modem = Modem::new(p);
    let u = transmit_matrix(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let ch = random_channel(&mut rng, &p);
        let h_eff = effective_dd_matrix(&ch, &p).unwrap();
        // defining product, built without the modem or the tap matrix
        let defining =
            u.adjoint() * dense_channel(&ch, &p) * &u / Complex64::new(p.n() as f64, 0.0);
        assert!((&h_eff - &defining).norm() <= 1e-9 * defining.norm());

        let x = random_vec(&mut rng, p.len());
        let chain = modem
            .demodulate(&apply_channel(&modem.modulate(&x).unwrap(), &ch, &p).unwrap())
            .unwrap();
        let matrix = &h_eff * DVector::from_column_slice(&x);
        assert!(rel_err(&chain, matrix.as_slice()) <= 1e-9);
    }
}

#[test]
fn pure_delay_is_a_circular_shift_in_delay_doppler() {
    let p = params(2, 2);
    let ch = ChannelRealization {
        paths: vec![Path {
            gain: Complex64::new(1.0, 0.0),
            delay_tap: 1,
            doppler_hz: 0.0,
        }],
    };
    let h = effective_dd_matrix(&ch, &p).unwrap();
    let u = transmit_matrix(&p);
    let mut shift = DMatrix::<Complex64>::zeros(4, 4);
    for n in 0..4 {
        shift[(n, (n + 3) % 4)] = Complex64::new(1.0, 0.0);
    }
    let expect = u.adjoint() * shift * &u / Complex64::new(2.0, 0.0);
    assert!((&h - &expect).norm() <= 1e-12);
    // delay bin 1 receives delay bin 0 unchanged; delay bin 0 receives delay
    // bin 1 of the previous slot, a Doppler-dependent phase e^{j2πk/N}
    let one = Complex64::new(1.0, 0.0);
    assert!((h[(1, 0)] - one).norm() < 1e-12);
    assert!((h[(3, 2)] - one).norm() < 1e-12);
    assert!((h[(0, 1)] - one).norm() < 1e-12);
    assert!((h[(2, 3)] + one).norm() < 1e-12);
    assert!((h.norm_squared() - 4.0).abs() < 1e-12);
}

#[test]
fn dd_noise_variance_is_sigma2_over_n() {
    let p = params(16, 16);
    let modem = Modem::new(p);
    let sigma2 = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zeros = vec![Complex64::new(0.0, 0.0); p.len()];
    let frames = 400;
    let mut acc = 0.0;
    for _ in 0..frames {
        let w = add_awgn(&zeros, sigma2, &mut rng).unwrap();
        acc += modem
            .demodulate(&w)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>();
    }
    let measured = acc / (frames * p.len()) as f64;
    let expect = sigma2 / p.n() as f64;
    assert!(
        (measured / expect - 1.0).abs() < 0.03,
        "measured {measured}, expected {expect}"
    );
}

#[test]
fn mmse_is_phase_equivariant_and_tends_to_zero_forcing() {
    let p = params(4, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let profile = PathProfile::new(vec![0.0, 70_000.0], vec![0.0, -3.0]).unwrap();
    for _ in 0..20 {
        let ch = sample_channel(&profile, 2000.0, &p, &mut rng).unwrap();
        let h = effective_dd_matrix(&ch, &p).unwrap();
        let y = random_vec(&mut rng, p.len());
        let base = EqualizerInput {
            y: y.clone(),
            h_eff: h.clone(),
            sigma2_dd: 0.1,
            es: 1.0,
        };
        let x = mmse_equalize(&base).unwrap();
        let rot = Complex64::from_polar(1.0, 0.9);
        let turned = mmse_equalize(&EqualizerInput {
            y: y.iter().map(|z| z * rot).collect(),
            h_eff: h.map(|z| z * rot),
            ..base.clone()
        })
        .unwrap();
        assert!(rel_err(&turned, &x) < 1e-10);

        let zf = h
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&y))
            .unwrap();
        let near = mmse_equalize(&EqualizerInput {
            sigma2_dd: 1e-12,
            ..base
        })
        .unwrap();
        let diff = near
            .iter()
            .zip(zf.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6, "ZF gap {diff}");
    }
}

#[test]
fn noiseless_chain_is_error_free() {
    // time-varying two-tap channels are often numerically singular, so the
    // multipath case is only checked without Doppler
    for (profile, nus) in [
        (ProfileKind::Identity, vec![0.0, 2400.0]),
        (ProfileKind::Etu, vec![0.0]),
    ] {
        let cfg = ExperimentConfig {
            modulation: 4,
            frames: 100,
            methods: vec![
                Method::None,
                Method::Proposed,
                Method::Dft,
                Method::Companding,
            ],
            profile,
            ..Default::default()
        };
        let run = run_error_rate_grid(&cfg, &[f64::INFINITY], &nus).unwrap();
        for row in &run.rows {
            assert_eq!(row.frames, 100);
            assert_eq!(row.counts.symbol_errors, 0, "{profile:?} {row:?}");
        }
    }
}
