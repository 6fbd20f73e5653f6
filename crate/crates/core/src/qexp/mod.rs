//! Monte-Carlo model of the single-electron resonant-tunneling experiment.
//!
//! Each trial either moves one electron off the QPC between the two CDS
//! samples (a |1> outcome near -300 mV), leaves it in place (|0> near 0 V),
//! or, for a small share of non-tunneling trials, produces an unresolved
//! partial step that lands between the peaks. Trial-to-trial correlation
//! enters through an AR(1) latent variable whose normal CDF is compared to
//! the tunneling probability, which keeps each trial's marginal exact.

mod dip;
mod scan;
mod stats;

pub use dip::{dip_sorted, dip_statistic, is_bimodal, DIP_BIMODAL_THRESHOLD};
pub use scan::{bias_scan, BiasScanConfig, HeatMap, ResonanceWindow, ScanPoint};
pub use stats::{
    autocorrelation, extract_probabilities, histogram, HistogramConfig, HistogramResult,
    Probabilities, PEAK_SPLIT_V,
};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StNormal};
use thiserror::Error;

use crate::consts::{BOLTZMANN_J_PER_K, ELEMENTARY_CHARGE_C};
use crate::detector::{
    cds_sample, qpc_voltage_step, DetectorChainConfig, DetectorError, DetectorSample, QpcEvent,
};
use crate::rng::keyed_rng;
use crate::timeline::AnalogTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QexpError {
    #[error("invalid tunneling model: {0}")]
    Model(String),
    #[error("invalid experiment: {0}")]
    Experiment(String),
    #[error("histogram: {0}")]
    Histogram(String),
    #[error("autocorrelation: {0}")]
    Acf(String),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// Logistic dose-response `p_max * sigmoid((v - v_mid)/s)` pinned to two
/// endpoints, plus the trial-correlation and midzone knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelingModel {
    pub v_low_v: f64,
    /// Probability at `v_low_v`.
    pub p_low: f64,
    pub v_high_v: f64,
    /// Probability at `v_high_v`.
    pub p_high: f64,
    pub divider_ratio: f64,
    pub short_lag_corr: f64,
    /// Share of non-tunneling trials that land in the midzone.
    pub midzone_rate: f64,
}

impl Default for TunnelingModel {
    fn default() -> Self {
        Self {
            v_low_v: 33e-3,
            p_low: 1e-3,
            v_high_v: 78e-3,
            p_high: 0.95,
            divider_ratio: 0.1,
            short_lag_corr: 0.3,
            midzone_rate: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticCurve {
    pub p_max: f64,
    pub v_mid_v: f64,
    pub scale_v: f64,
}

impl LogisticCurve {
    pub fn eval(&self, v: f64) -> f64 {
        self.p_max / (1.0 + (-(v - self.v_mid_v) / self.scale_v).exp())
    }
}

impl TunnelingModel {
    pub fn validate(&self) -> Result<(), QexpError> {
        let bad = |m: &str| Err(QexpError::Model(m.into()));
        if !(self.v_low_v < self.v_high_v) {
            return bad("v_low_v must be below v_high_v");
        }
        if !(self.p_low > 0.0 && self.p_low < self.p_high && self.p_low + self.p_high <= 1.0) {
            return bad("need 0 < p_low < p_high and p_low + p_high <= 1");
        }
        if !(self.divider_ratio > 0.0 && self.divider_ratio < 1.0) {
            return bad("divider_ratio must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.short_lag_corr) {
            return bad("short_lag_corr must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.midzone_rate) {
            return bad("midzone_rate must lie in [0, 1)");
        }
        Ok(())
    }

    /// Symmetric logistic through both endpoints: `p_max = p_low + p_high`.
    pub fn curve(&self) -> LogisticCurve {
        let p_max = self.p_low + self.p_high;
        let x = (self.p_high / self.p_low).ln();
        LogisticCurve {
            p_max,
            v_mid_v: 0.5 * (self.v_low_v + self.v_high_v),
            scale_v: 0.5 * (self.v_high_v - self.v_low_v) / x,
        }
    }
}

pub fn tunneling_probability(step_v: f64, m: &TunnelingModel) -> f64 {
    m.curve().eval(step_v.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Zero,
    One,
    /// Partial step of the given fraction of one electron.
    Midzone { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutSetup {
    pub detector: DetectorChainConfig,
    pub noise_rms_v: f64,
}

impl Default for ReadoutSetup {
    fn default() -> Self {
        Self {
            detector: DetectorChainConfig::default(),
            noise_rms_v: 17.5e-3,
        }
    }
}

impl ReadoutSetup {
    /// QPC event instant: halfway between the end of S0 and the start of S1.
    pub fn event_time_s(&self) -> f64 {
        let c = &self.detector.cds;
        0.5 * (c.tau_sh_s + c.lambda_s)
    }

    fn render(&self, fraction: f64) -> Result<f64, QexpError> {
        let d = &self.detector;
        let full = qpc_voltage_step(&QpcEvent::electron_out(0.0), d.c_qpc_f);
        let mut trace = AnalogTrace::constant(0.0, 0.0);
        if fraction != 0.0 {
            trace.step_to(self.event_time_s(), fraction * full);
        }
        Ok(cds_sample(&trace, d.cds.period_s, &d.cds, d.rc_pole_hz, d.effective_gain())?.difference)
    }

    /// Noise-free output for one electron.
    pub fn level1_v(&self) -> Result<f64, QexpError> {
        self.render(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub step_v: f64,
    pub p_model: f64,
    pub level1_v: f64,
    pub outcomes: Vec<Outcome>,
    pub samples: Vec<DetectorSample>,
}

impl ExperimentResult {
    pub fn series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.v_out_v).collect()
    }
}

struct Draw {
    eps: f64,
    mid: f64,
    fraction: f64,
    noise: f64,
}

pub(crate) fn run_with_probability(
    m: &TunnelingModel,
    setup: &ReadoutSetup,
    p: f64,
    n: usize,
    seed: u64,
    point: u64,
) -> Result<(Vec<Outcome>, Vec<DetectorSample>, f64), QexpError> {
    m.validate()?;
    setup.detector.validate()?;
    if n == 0 {
        return Err(QexpError::Experiment("need at least one trial".into()));
    }
    let sigma = setup.noise_rms_v;
    let noise = Normal::new(0.0, sigma).map_err(|_| DetectorError::BadNoise(sigma))?;
    let draws: Vec<Draw> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = keyed_rng(seed, point, i);
            Draw {
                eps: StandardNormal.sample(&mut rng),
                mid: rng.random::<f64>(),
                fraction: rng.random_range(0.1..0.9),
                noise: noise.sample(&mut rng),
            }
        })
        .collect();

    let phi = m.short_lag_corr;
    let innov = (1.0 - phi * phi).sqrt();
    let std_normal = StNormal::standard();
    let mut z = 0.0;
    let outcomes: Vec<Outcome> = draws
        .iter()
        .enumerate()
        .map(|(i, d)| {
            z = if i == 0 { d.eps } else { phi * z + innov * d.eps };
            if std_normal.cdf(z) < p {
                Outcome::One
            } else if d.mid < m.midzone_rate {
                Outcome::Midzone {
                    fraction: d.fraction,
                }
            } else {
                Outcome::Zero
            }
        })
        .collect();

    let level1 = setup.render(1.0)?;
    let level0 = setup.render(0.0)?;
    let samples = outcomes
        .iter()
        .zip(&draws)
        .enumerate()
        .map(|(i, (o, d))| {
            let signal = match *o {
                Outcome::One => level1,
                Outcome::Zero => level0,
                Outcome::Midzone { fraction } => setup.render(fraction)?,
            };
            Ok(DetectorSample {
                trial_id: i as u64,
                v_out_v: signal + d.noise,
            })
        })
        .collect::<Result<Vec<_>, QexpError>>()?;
    Ok((outcomes, samples, level1))
}

/// Runs `n` trials at one injector step. Trial `i` always draws from the
/// same random stream for a given seed, whatever the step.
pub fn run_trials(
    m: &TunnelingModel,
    setup: &ReadoutSetup,
    step_v: f64,
    n: usize,
    seed: u64,
) -> Result<ExperimentResult, QexpError> {
    let p = tunneling_probability(step_v, m);
    let (outcomes, samples, level1_v) = run_with_probability(m, setup, p, n, seed, 0)?;
    Ok(ExperimentResult {
        step_v,
        p_model: p,
        level1_v,
        outcomes,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub step_v: f64,
    pub p_model: f64,
    pub p0: f64,
    pub p1: f64,
    pub discarded: u64,
    pub n_total: u64,
}

/// Probability extraction across injector steps. Every step reuses the
/// same trial streams, so the extracted curves are free of step-to-step
/// sampling jitter.
pub fn step_sweep(
    m: &TunnelingModel,
    setup: &ReadoutSetup,
    steps_v: &[f64],
    n: usize,
    seed: u64,
    hist: &HistogramConfig,
) -> Result<Vec<SweepPoint>, QexpError> {
    steps_v
        .iter()
        .map(|&step_v| {
            let r = run_trials(m, setup, step_v, n, seed)?;
            let p = extract_probabilities(&r.series(), hist, r.level1_v)?;
            Ok(SweepPoint {
                step_v,
                p_model: r.p_model,
                p0: p.p0,
                p1: p.p1,
                discarded: p.discarded,
                n_total: p.n_total,
            })
        })
        .collect()
}

/// `n` evenly spaced steps from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargingEnergy {
    pub delta_e_j: f64,
    pub delta_e_ev: f64,
}

pub fn charging_energy(c_dot_f: f64) -> Result<ChargingEnergy, QexpError> {
    if !(c_dot_f > 0.0) {
        return Err(QexpError::Model("dot capacitance must be positive".into()));
    }
    let e = ELEMENTARY_CHARGE_C;
    Ok(ChargingEnergy {
        delta_e_j: e * e / c_dot_f,
        delta_e_ev: e / c_dot_f,
    })
}

pub fn dot_capacitance(delta_e_ev: f64) -> Result<f64, QexpError> {
    if !(delta_e_ev > 0.0) {
        return Err(QexpError::Model("charging energy must be positive".into()));
    }
    Ok(ELEMENTARY_CHARGE_C / delta_e_ev)
}

/// Charging energy in units of `k_B T`.
pub fn charging_to_thermal_ratio(delta_e_j: f64, temp_k: f64) -> f64 {
    delta_e_j / (BOLTZMANN_J_PER_K * temp_k)
}

pub fn divider_map(gate_swing_v: f64, ratio: f64) -> Result<f64, QexpError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(QexpError::Model(format!("divider ratio {ratio} outside (0, 1)")));
    }
    Ok(gate_swing_v * ratio)
}
