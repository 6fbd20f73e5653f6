use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

use cryoqc::noise::{h_sh, integrate_power, FrequencyGrid, NoisePsd, SamplerTiming, Transfer};
use cryoqc::qexp::{autocorrelation, run_trials, ReadoutSetup, TunnelingModel};

fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// One-sided Welch estimate with a Hann window; returns (bin width, psd).
fn welch(x: &[f64], fsim: f64, seg: usize) -> (f64, Vec<f64>) {
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let win: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos())
        .collect();
    let norm: f64 = win.iter().map(|w| w * w).sum::<f64>() * fsim;
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex<f64>> =
            (0..seg).map(|i| Complex::new(x[start + i] * win[i], 0.0)).collect();
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            let scale = if k == 0 || k == seg / 2 { 1.0 } else { 2.0 };
            *a += scale * buf[k].norm_sqr() / norm;
        }
        count += 1;
        start += seg / 2;
    }
    (fsim / seg as f64, acc.into_iter().map(|a| a / count as f64).collect())
}

#[test]
fn track_and_hold_monte_carlo_matches_transfer() {
    let fsim = 1.6e9;
    let per = 16;
    for track in [0usize, 4, 8] {
        let x = gaussian(1_000_000, 11 + track as u64);
        let mut y = vec![0.0; x.len()];
        let mut held = 0.0;
        for (i, v) in x.iter().enumerate() {
            let phase = i % per;
            if phase < track {
                y[i] = *v;
            } else {
                if phase == track {
                    held = if track == 0 { *v } else { x[i - 1] };
                }
                y[i] = held;
            }
        }
        let (df, psd) = welch(&y, fsim, 4096);
        let fs = fsim / per as f64;
        // The folded-sinc form is exact in baseband only for a pure hold.
        let band = if track == 0 { fs / 2.0 } else { fsim / 2.0 - df };
        let measured: f64 = psd
            .iter()
            .enumerate()
            .filter(|(k, _)| (*k as f64 * df) <= band)
            .map(|(_, p)| p * df)
            .sum();

        let bw = fsim / 2.0;
        let timing = SamplerTiming::new(track as f64 / fsim, per as f64 / fsim, bw).unwrap();
        let input = NoisePsd::white("in", 1.0 / bw);
        let grid = FrequencyGrid::linear(1.0, band, 4001).unwrap();
        let predicted = integrate_power(&input, &[Transfer::SampleHold { timing }], &grid).unwrap();
        let ratio = (measured / predicted).sqrt();
        assert!((ratio - 1.0).abs() < 0.05, "track {track}: rms ratio {ratio}");
        assert!(h_sh(0.0, &timing) > 0.0);
    }
}

#[test]
fn h_sh_without_hold_is_unity() {
    let t = SamplerTiming::new(1e-6, 1e-6, 100e6).unwrap();
    for f in [0.0, 1e3, 1e6, 3.3e7, 1e9] {
        assert!((h_sh(f, &t) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn independent_trials_have_flat_acf() {
    let m = TunnelingModel { short_lag_corr: 0.0, ..TunnelingModel::default() };
    let n = 10_000;
    let r = run_trials(&m, &ReadoutSetup::default(), 78e-3, n, 2024).unwrap();
    let acf = autocorrelation(&r.series(), 20).unwrap();
    let bound = 3.0 / (n as f64).sqrt();
    for (k, c) in acf.iter().enumerate().skip(1) {
        assert!(c.abs() < bound, "lag {k}: {c}");
    }
}

#[test]
fn acf_recovers_ar1_decay() {
    let phi: f64 = 0.6;
    let e = gaussian(200_000, 3);
    let mut x = Vec::with_capacity(e.len());
    let mut s = 0.0;
    for v in e {
        s = phi * s + (1.0 - phi * phi).sqrt() * v;
        x.push(s);
    }
    let acf = autocorrelation(&x, 8).unwrap();
    assert!((acf[0] - 1.0).abs() < 1e-12);
    for (k, c) in acf.iter().enumerate() {
        assert!((c - phi.powi(k as i32)).abs() < 0.01, "lag {k}: {c}");
    }
}

#[test]
fn correlated_model_shows_short_lag_memory() {
    let n = 10_000;
    let r = run_trials(&TunnelingModel::default(), &ReadoutSetup::default(), 78e-3, n, 2024).unwrap();
    let acf = autocorrelation(&r.series(), 5).unwrap();
    assert!(acf[1] > 3.0 / (n as f64).sqrt());
    assert!(acf[1] < 0.3);
}
