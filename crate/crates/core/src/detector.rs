//! Time-domain read-out chain: QPC charge steps, RC-limited correlated
//! double sampling, and the gain to the ADC input.
//!
//! Sign convention: `delta_electrons` counts electrons added to the QPC
//! node, so an electron leaving gives a negative step and a negative output.

use std::io;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::ELEMENTARY_CHARGE_C;
use crate::noise::CdsTiming;
use crate::timeline::AnalogTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("invalid detector configuration: {0}")]
    Config(String),
    #[error("event must move at least one electron")]
    ZeroCharge,
    #[error("trace ends at {end_s} s but the second sample needs {needed_s} s")]
    TraceTooShort { end_s: f64, needed_s: f64 },
    #[error("noise rms must be finite and nonnegative, got {0}")]
    BadNoise(f64),
}

/// QPC capacitance giving a 3.75 mV single-electron step.
pub const DEFAULT_C_QPC_F: f64 = ELEMENTARY_CHARGE_C / 3.75e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorChainConfig {
    pub gain_sf: f64,
    pub gain_pre: f64,
    pub gain_obuf: f64,
    pub gain_interface: f64,
    /// End-to-end gain; `None` falls back to the stage-gain product.
    pub chain_gain_total: Option<f64>,
    pub rc_pole_hz: f64,
    pub cds: CdsTiming,
    pub c_qpc_f: f64,
}

impl Default for DetectorChainConfig {
    fn default() -> Self {
        Self {
            gain_sf: 0.9,
            gain_pre: 2.2,
            gain_obuf: 5.4,
            gain_interface: 2.0,
            chain_gain_total: Some(80.0),
            rc_pole_hz: 70e6,
            cds: CdsTiming::default(),
            c_qpc_f: DEFAULT_C_QPC_F,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub stage_product: f64,
    pub configured_total: Option<f64>,
    pub effective: f64,
    /// `configured_total / stage_product`, when a total is configured.
    pub ratio: Option<f64>,
}

impl DetectorChainConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let gains = [
            ("gain_sf", self.gain_sf),
            ("gain_pre", self.gain_pre),
            ("gain_obuf", self.gain_obuf),
            ("gain_interface", self.gain_interface),
            ("rc_pole_hz", self.rc_pole_hz),
            ("c_qpc_f", self.c_qpc_f),
        ];
        for (name, g) in gains {
            if !(g > 0.0 && g.is_finite()) {
                return Err(DetectorError::Config(format!("{name} must be positive, got {g}")));
            }
        }
        if let Some(g) = self.chain_gain_total {
            if !(g > 0.0 && g.is_finite()) {
                return Err(DetectorError::Config(format!(
                    "chain_gain_total must be positive, got {g}"
                )));
            }
        }
        self.cds
            .validate()
            .map_err(|e| DetectorError::Config(e.to_string()))
    }

    pub fn stage_gain_product(&self) -> f64 {
        self.gain_sf * self.gain_pre * self.gain_obuf * self.gain_interface
    }

    pub fn effective_gain(&self) -> f64 {
        self.chain_gain_total
            .unwrap_or_else(|| self.stage_gain_product())
    }

    pub fn gain_report(&self) -> GainReport {
        let stage_product = self.stage_gain_product();
        GainReport {
            stage_product,
            configured_total: self.chain_gain_total,
            effective: self.effective_gain(),
            ratio: self.chain_gain_total.map(|g| g / stage_product),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpcEvent {
    time_s: f64,
    delta_electrons: i32,
}

impl QpcEvent {
    pub fn new(time_s: f64, delta_electrons: i32) -> Result<Self, DetectorError> {
        if delta_electrons == 0 {
            return Err(DetectorError::ZeroCharge);
        }
        Ok(Self {
            time_s,
            delta_electrons,
        })
    }

    /// One electron leaving the QPC node.
    pub fn electron_out(time_s: f64) -> Self {
        Self {
            time_s,
            delta_electrons: -1,
        }
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    pub fn delta_electrons(&self) -> i32 {
        self.delta_electrons
    }
}

pub fn qpc_voltage_step(ev: &QpcEvent, c_qpc_f: f64) -> f64 {
    ev.delta_electrons as f64 * ELEMENTARY_CHARGE_C / c_qpc_f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsResult {
    pub v_s0: f64,
    pub v_s1: f64,
    /// `(v_s1 - v_s0) * gain`.
    pub difference: f64,
}

/// Sample-capacitor voltage at `t_end` after tracking `trace` through a
/// single-pole RC from `t_start`, starting settled at the input value.
fn rc_track(trace: &AnalogTrace, t_start: f64, t_end: f64, tau: f64) -> f64 {
    let mut v = trace.value_at(t_start);
    let mut t = t_start;
    let mut input = v;
    for (bt, bv) in trace.breakpoints_in(t_start, t_end) {
        v = input + (v - input) * (-(bt - t) / tau).exp();
        t = bt;
        input = bv;
    }
    input + (v - input) * (-(t_end - t) / tau).exp()
}

/// Samples one CDS period that begins at the trace start. S0 tracks during
/// `[0, tau_sh]`, S1 during `[lambda, lambda + tau_sh]`, both relative to
/// the period start; each sample is taken at the end of its window.
pub fn cds_sample(
    trace: &AnalogTrace,
    trace_end_s: f64,
    cds: &CdsTiming,
    rc_pole_hz: f64,
    gain: f64,
) -> Result<CdsResult, DetectorError> {
    let t0 = trace.start_s();
    let s0_at = t0 + cds.tau_sh_s;
    let s1_at = t0 + cds.lambda_s + cds.tau_sh_s;
    if trace.points.is_empty() || trace_end_s < s1_at {
        return Err(DetectorError::TraceTooShort {
            end_s: trace_end_s,
            needed_s: s1_at,
        });
    }
    let tau = 1.0 / (2.0 * std::f64::consts::PI * rc_pole_hz);
    let v_s0 = rc_track(trace, t0, s0_at, tau);
    let v_s1 = rc_track(trace, t0 + cds.lambda_s, s1_at, tau);
    Ok(CdsResult {
        v_s0,
        v_s1,
        difference: (v_s1 - v_s0) * gain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSample {
    pub trial_id: u64,
    pub v_out_v: f64,
}

/// QPC node voltage for one trial, relative to its pre-trial level.
pub fn qpc_trace(events: &[QpcEvent], c_qpc_f: f64) -> AnalogTrace {
    let mut sorted: Vec<QpcEvent> = events.to_vec();
    sorted.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    let mut tr = AnalogTrace::constant(0.0, 0.0);
    let mut v = 0.0;
    for ev in sorted {
        v += qpc_voltage_step(&ev, c_qpc_f);
        tr.step_to(ev.time_s.max(0.0), v);
    }
    tr
}

/// Gaussian read-out noise stream for one trial.
pub fn trial_rng(seed: u64, trial_id: u64) -> ChaCha8Rng {
    crate::rng::keyed_rng(seed, 0, trial_id)
}

/// One sample per trial; `trials[i]` holds the QPC events of trial `i`,
/// timed from the start of its CDS period.
pub fn run_readout(
    trials: &[Vec<QpcEvent>],
    cfg: &DetectorChainConfig,
    noise_rms_v: f64,
    seed: u64,
) -> Result<Vec<DetectorSample>, DetectorError> {
    cfg.validate()?;
    if !(noise_rms_v >= 0.0 && noise_rms_v.is_finite()) {
        return Err(DetectorError::BadNoise(noise_rms_v));
    }
    let normal = Normal::new(0.0, noise_rms_v).map_err(|_| DetectorError::BadNoise(noise_rms_v))?;
    let gain = cfg.effective_gain();
    trials
        .par_iter()
        .enumerate()
        .map(|(i, evs)| {
            let tr = qpc_trace(evs, cfg.c_qpc_f);
            let r = cds_sample(&tr, cfg.cds.period_s, &cfg.cds, cfg.rc_pole_hz, gain)?;
            let noise = if noise_rms_v > 0.0 {
                normal.sample(&mut trial_rng(seed, i as u64))
            } else {
                0.0
            };
            Ok(DetectorSample {
                trial_id: i as u64,
                v_out_v: r.difference + noise,
            })
        })
        .collect()
}

/// Noise-only draw for a trial, for callers that compute the signal part
/// themselves.
pub fn draw_noise<R: Rng>(rng: &mut R, noise_rms_v: f64) -> f64 {
    if noise_rms_v == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, noise_rms_v)
        .map(|n| n.sample(rng))
        .unwrap_or(0.0)
}

pub fn write_samples_csv<W: io::Write>(samples: &[DetectorSample], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for s in samples {
        wr.serialize(s)?;
    }
    wr.flush()?;
    Ok(())
}
