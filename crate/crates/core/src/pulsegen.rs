//! High-speed pulse generator: 16-stage Johnson-counter phase generator,
//! AND/OR pulse-select leaf cells, pass-through / SR-latch mode select and
//! optional Gaussian edge jitter.
//!
//! A 16-stage Johnson counter cycles through 32 states, so each phase is a
//! square wave of period `32 * T_clk` (16 ns at 2 GHz), high for `16 * T_clk`,
//! and phase `i` lags phase 0 by `i * T_clk`. All phases start low at t = 0.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patgen::ControlEvent;
use crate::timeline::SignalTimeline;

pub const PHASES: usize = 16;
/// Johnson ring length in clock periods.
pub const RING_STATES: u64 = 2 * PHASES as u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("clock frequency must be positive, got {0} Hz")]
    BadFrequency(f64),
    #[error("duration {duration_s} s is shorter than one Johnson period {period_s} s")]
    TooShort { duration_s: f64, period_s: f64 },
    #[error("select index {0} outside 0-15")]
    BadSelect(u8),
    #[error("leaf index {0} outside 0-7")]
    BadLeaf(u8),
    #[error("jitter rms must be nonnegative, got {0}")]
    BadJitter(f64),
}

pub fn phase_name(i: usize) -> String {
    format!("PH{i}")
}

/// Generates the 16 Johnson-counter phases over `[0, duration_s)`.
pub fn generate_phases(clk_freq_hz: f64, duration_s: f64) -> Result<SignalTimeline, PulseError> {
    if !(clk_freq_hz > 0.0) || !clk_freq_hz.is_finite() {
        return Err(PulseError::BadFrequency(clk_freq_hz));
    }
    let t_clk = 1.0 / clk_freq_hz;
    let period_s = RING_STATES as f64 * t_clk;
    if !(duration_s >= period_s) {
        return Err(PulseError::TooShort {
            duration_s,
            period_s,
        });
    }
    let total_ticks = (duration_s / t_clk).floor() as u64;
    let names: Vec<String> = (0..PHASES).map(phase_name).collect();
    let mut tl = SignalTimeline::new(t_clk);
    for k in 0..total_ticks {
        let in_ring = k % RING_STATES;
        for (i, name) in names.iter().enumerate() {
            let i = i as u64;
            if in_ring == i {
                tl.push(k as f64 * t_clk, name.clone(), 1);
            } else if in_ring == (i + PHASES as u64) % RING_STATES {
                tl.push(k as f64 * t_clk, name.clone(), 0);
            }
        }
    }
    Ok(tl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseSelectConfig {
    sel1: u8,
    sel2: u8,
    combine: Combine,
    leaf_index: u8,
}

impl PulseSelectConfig {
    pub fn new(sel1: u8, sel2: u8, combine: Combine, leaf_index: u8) -> Result<Self, PulseError> {
        for s in [sel1, sel2] {
            if s as usize >= PHASES {
                return Err(PulseError::BadSelect(s));
            }
        }
        if leaf_index >= crate::patgen::LEAF_CELLS {
            return Err(PulseError::BadLeaf(leaf_index));
        }
        Ok(Self {
            sel1,
            sel2,
            combine,
            leaf_index,
        })
    }

    pub fn sel1(&self) -> u8 {
        self.sel1
    }
    pub fn sel2(&self) -> u8 {
        self.sel2
    }
    pub fn combine(&self) -> Combine {
        self.combine
    }
    pub fn leaf_index(&self) -> u8 {
        self.leaf_index
    }

    pub fn output_name(&self) -> String {
        format!("LEAF{}", self.leaf_index)
    }
}

/// Pointwise AND/OR of two phases; the result is named `LEAF<n>`.
pub fn pulse_select(cfg: &PulseSelectConfig, phases: &SignalTimeline) -> SignalTimeline {
    let a = phases.select(&phase_name(cfg.sel1 as usize));
    let b = phases.select(&phase_name(cfg.sel2 as usize));
    let out_name = cfg.output_name();

    // merge edges of both inputs in time order and track levels
    let mut merged: Vec<(f64, bool, u8)> = a
        .edges
        .iter()
        .map(|e| (e.time_s, true, e.level))
        .chain(b.edges.iter().map(|e| (e.time_s, false, e.level)))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut out = SignalTimeline::new(phases.resolution_s);
    let (mut la, mut lb, mut lout) = (0u8, 0u8, 0u8);
    let mut i = 0;
    while i < merged.len() {
        let t = merged[i].0;
        while i < merged.len() && merged[i].0 == t {
            if merged[i].1 {
                la = merged[i].2;
            } else {
                lb = merged[i].2;
            }
            i += 1;
        }
        let lvl = match cfg.combine {
            Combine::And => la & lb,
            Combine::Or => la | lb,
        };
        if lvl != lout {
            out.push(t, out_name.clone(), lvl);
            lout = lvl;
        }
    }
    out
}

/// Set/reset trigger derived from control-bus activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatchSource {
    /// Control-bus bit that fires the trigger.
    pub ctrl_bit: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeSelect {
    PassThrough,
    SrLatch {
        set: LatchSource,
        reset: LatchSource,
        /// CKDIV period used to place control events in time.
        tick_period_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeOutput {
    pub timeline: SignalTimeline,
    pub warnings: Vec<String>,
}

/// Routes a leaf-cell output either straight through or into an SR latch
/// driven by control events. In latch mode the input edges are ignored and
/// the output level follows the last set/reset event.
pub fn mode_select(mode: &ModeSelect, input: &SignalTimeline, events: &[ControlEvent]) -> ModeOutput {
    match *mode {
        ModeSelect::PassThrough => ModeOutput {
            timeline: input.clone(),
            warnings: Vec::new(),
        },
        ModeSelect::SrLatch {
            set,
            reset,
            tick_period_s,
        } => {
            let name = input
                .edges
                .first()
                .map(|e| format!("{}_SR", e.signal))
                .unwrap_or_else(|| "SR".to_string());
            let mut out = SignalTimeline::new(input.resolution_s);
            let mut warnings = Vec::new();
            let mut q = 0u8;
            let mut ever_set = false;
            for ev in events {
                let t = ev.tick as f64 * tick_period_s;
                let s = ev.ctrl_bus >> set.ctrl_bit & 1 == 1;
                let r = ev.ctrl_bus >> reset.ctrl_bit & 1 == 1;
                if r && !ever_set {
                    warnings.push(format!("reset at {t:e} s before any set; output held low"));
                }
                // reset dominates a simultaneous set
                let next = if r {
                    0
                } else if s {
                    1
                } else {
                    q
                };
                ever_set |= s;
                if next != q {
                    out.push(t, name.clone(), next);
                    q = next;
                }
            }
            ModeOutput {
                timeline: out,
                warnings,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterModel {
    pub rms_s: f64,
    pub seed: u64,
}

impl Default for JitterModel {
    fn default() -> Self {
        Self {
            rms_s: 1.5e-12,
            seed: 0,
        }
    }
}

/// Perturbs every edge time by an independent zero-mean Gaussian draw and
/// restores time order with a stable sort.
pub fn apply_jitter(tl: &SignalTimeline, jm: &JitterModel) -> Result<SignalTimeline, PulseError> {
    if !(jm.rms_s >= 0.0) {
        return Err(PulseError::BadJitter(jm.rms_s));
    }
    if jm.rms_s == 0.0 {
        return Ok(tl.clone());
    }
    let normal = Normal::new(0.0, jm.rms_s).map_err(|_| PulseError::BadJitter(jm.rms_s))?;
    let mut rng = ChaCha8Rng::seed_from_u64(jm.seed);
    let mut out = tl.clone();
    for e in &mut out.edges {
        e.time_s += normal.sample(&mut rng);
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: f64 = 2e9;

    fn width(tl: &SignalTimeline, name: &str) -> f64 {
        let iv = tl.high_intervals(name);
        iv[0].1 - iv[0].0
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate_phases(0.0, 1e-6).is_err());
        assert!(generate_phases(-1.0, 1e-6).is_err());
        assert!(generate_phases(F, 10e-9).is_err());
        assert!(PulseSelectConfig::new(16, 0, Combine::And, 0).is_err());
        assert!(PulseSelectConfig::new(0, 0, Combine::And, 8).is_err());
    }

    #[test]
    fn adjacent_phases_500ps_apart() {
        let tl = generate_phases(F, 32e-9).unwrap();
        for i in 1..PHASES {
            let r0 = tl.high_intervals(&phase_name(i - 1))[0].0;
            let r1 = tl.high_intervals(&phase_name(i))[0].0;
            assert!((r1 - r0 - 500e-12).abs() < 1e-18);
        }
        assert!((width(&tl, "PH0") - 8e-9).abs() < 1e-18);
    }

    #[test]
    fn one_ghz_separation_is_1ns() {
        let tl = generate_phases(1e9, 64e-9).unwrap();
        let r0 = tl.high_intervals("PH0")[0].0;
        let r1 = tl.high_intervals("PH1")[0].0;
        assert!((r1 - r0 - 1e-9).abs() < 1e-18);
    }

    #[test]
    fn and_or_widths() {
        let tl = generate_phases(F, 64e-9).unwrap();
        let and = pulse_select(&PulseSelectConfig::new(0, 3, Combine::And, 0).unwrap(), &tl);
        let or = pulse_select(&PulseSelectConfig::new(0, 3, Combine::Or, 1).unwrap(), &tl);
        assert!((width(&and, "LEAF0") - 6.5e-9).abs() < 1e-18);
        assert!((width(&or, "LEAF1") - 9.5e-9).abs() < 1e-18);
    }

    #[test]
    fn same_select_is_identity() {
        let tl = generate_phases(F, 64e-9).unwrap();
        let cfg = PulseSelectConfig::new(5, 5, Combine::And, 2).unwrap();
        let out = pulse_select(&cfg, &tl);
        assert_eq!(out.renamed("LEAF2", "PH5"), tl.select("PH5"));
    }

    fn ev(tick: u64, bits: u64) -> ControlEvent {
        ControlEvent {
            tick,
            data_bus: 0,
            ctrl_bus: bits,
        }
    }

    fn latch() -> ModeSelect {
        ModeSelect::SrLatch {
            set: LatchSource { ctrl_bit: 0 },
            reset: LatchSource { ctrl_bit: 1 },
            tick_period_s: 10e-9,
        }
    }

    #[test]
    fn pass_through_copies() {
        let tl = generate_phases(F, 32e-9).unwrap().select("PH4");
        let out = mode_select(&ModeSelect::PassThrough, &tl, &[]);
        assert_eq!(out.timeline, tl);
    }

    #[test]
    fn sr_latch_long_pulse() {
        let leaf = generate_phases(F, 32e-9).unwrap().select("PH0");
        let out = mode_select(&latch(), &leaf, &[ev(1, 1), ev(50_000, 2)]);
        let iv = out.timeline.high_intervals("PH0_SR");
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 10e-9).abs() < 1e-18);
        assert!((iv[0].1 - iv[0].0 - 499.99e-6).abs() < 1e-15);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn sr_latch_truth_table() {
        let leaf = SignalTimeline::new(5e-10);
        let out = mode_select(&latch(), &leaf, &[ev(1, 1), ev(2, 1), ev(3, 2)]);
        let rises = out.timeline.edges.iter().filter(|e| e.level == 1).count();
        assert_eq!(rises, 1);
        assert_eq!(out.timeline.edges.len(), 2);
    }

    #[test]
    fn sr_latch_reset_first_warns() {
        let leaf = SignalTimeline::new(5e-10);
        let out = mode_select(&latch(), &leaf, &[ev(1, 2), ev(4, 1)]);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.timeline.edges.len(), 1);
        assert_eq!(out.timeline.edges[0].level, 1);
    }

    #[test]
    fn zero_jitter_is_identity_and_seeded_is_deterministic() {
        let tl = generate_phases(F, 64e-9).unwrap();
        let jm0 = JitterModel { rms_s: 0.0, seed: 3 };
        assert_eq!(apply_jitter(&tl, &jm0).unwrap(), tl);
        let jm = JitterModel::default();
        assert_eq!(apply_jitter(&tl, &jm).unwrap(), apply_jitter(&tl, &jm).unwrap());
        assert!(apply_jitter(&tl, &JitterModel { rms_s: -1.0, seed: 0 }).is_err());
    }
}
