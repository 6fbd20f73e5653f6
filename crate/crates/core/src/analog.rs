//! Behavioral switched-capacitor models for the bias circuitry: the two-stage
//! charge-redistribution VDAC, the IDAC-trimmed replica bias, the injector
//! CDAC step, and leakage-driven droop of held voltages.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeline::AnalogTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalogError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target {target_v} V outside bias limits [{v_min_v}, {v_max_v}] V")]
    OutsideLimits {
        target_v: f64,
        v_min_v: f64,
        v_max_v: f64,
    },
    #[error("target {target_v} V not reachable from a VDAC referenced to {vref_v} V")]
    Unreachable { target_v: f64, vref_v: f64 },
    #[error("ramp did not settle within {max_pulses} pulses")]
    NoConvergence { max_pulses: usize },
    #[error("leakage table: {0}")]
    Table(String),
}

fn positive(name: &str, x: f64) -> Result<(), AnalogError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(AnalogError::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Coarse-stage charge-to-storage ratio `c1/(c1+c2)` that yields a 300 uV
/// step when the output sits at 0.4 V below a 0.8 V reference.
pub const COARSE_RATIO: f64 = 300e-6 / 0.4;
/// Fine stage step relative to the coarse stage.
pub const FINE_DIVISION: f64 = 16.0;
pub const DEFAULT_VREF_V: f64 = 0.8;
pub const DEFAULT_C1_F: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdacStage {
    pub c1_f: f64,
    pub c2_f: f64,
    pub v1_v: f64,
    pub v2_v: f64,
    pub vref_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VdacPulse {
    /// Discharge C1.
    DC,
    /// Charge C1 to the reference.
    CH,
    /// Share charge between C1 and C2.
    SC,
}

impl VdacStage {
    /// Stage with `c1/(c1+c2) = ratio`, both plates at 0 V.
    pub fn with_ratio(c1_f: f64, ratio: f64, vref_v: f64) -> Result<Self, AnalogError> {
        positive("c1_f", c1_f)?;
        positive("vref_v", vref_v)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(AnalogError::InvalidParameter(format!(
                "ratio must lie in (0, 1), got {ratio}"
            )));
        }
        Self::new(c1_f, c1_f * (1.0 - ratio) / ratio, vref_v)
    }

    pub fn new(c1_f: f64, c2_f: f64, vref_v: f64) -> Result<Self, AnalogError> {
        positive("c1_f", c1_f)?;
        positive("c2_f", c2_f)?;
        positive("vref_v", vref_v)?;
        Ok(Self {
            c1_f,
            c2_f,
            v1_v: 0.0,
            v2_v: 0.0,
            vref_v,
        })
    }

    pub fn default_coarse() -> Self {
        Self::with_ratio(DEFAULT_C1_F, COARSE_RATIO, DEFAULT_VREF_V).expect("valid defaults")
    }

    pub fn default_fine() -> Self {
        Self::with_ratio(DEFAULT_C1_F, COARSE_RATIO / FINE_DIVISION, DEFAULT_VREF_V)
            .expect("valid defaults")
    }

    pub fn ratio(&self) -> f64 {
        self.c1_f / (self.c1_f + self.c2_f)
    }

    pub fn charge(&self) -> f64 {
        self.c1_f * self.v1_v + self.c2_f * self.v2_v
    }

    /// Output increment of a CH+SC pair at the present output.
    pub fn up_step(&self) -> f64 {
        (self.vref_v - self.v2_v) * self.ratio()
    }

    /// Output decrement of a DC+SC pair at the present output.
    pub fn down_step(&self) -> f64 {
        self.v2_v * self.ratio()
    }
}

pub fn vdac_pulse(stage: VdacStage, pulse: VdacPulse) -> VdacStage {
    let mut s = stage;
    match pulse {
        VdacPulse::DC => s.v1_v = 0.0,
        VdacPulse::CH => s.v1_v = s.vref_v,
        VdacPulse::SC => {
            let v = (s.c1_f * s.v1_v + s.c2_f * s.v2_v) / (s.c1_f + s.c2_f);
            s.v1_v = v;
            s.v2_v = v;
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaDeltaSequencer {
    input_code: u8,
    clk_hz: f64,
    pulse_width_s: f64,
}

impl Default for SigmaDeltaSequencer {
    fn default() -> Self {
        Self {
            input_code: 128,
            clk_hz: 125e6,
            pulse_width_s: 8e-9,
        }
    }
}

impl SigmaDeltaSequencer {
    pub fn new(input_code: u8, clk_hz: f64, pulse_width_s: f64) -> Result<Self, AnalogError> {
        positive("clk_hz", clk_hz)?;
        positive("pulse_width_s", pulse_width_s)?;
        if pulse_width_s > 1.0 / clk_hz * (1.0 + 1e-12) {
            return Err(AnalogError::InvalidParameter(format!(
                "pulse width {pulse_width_s} s exceeds clock period {} s",
                1.0 / clk_hz
            )));
        }
        Ok(Self {
            input_code,
            clk_hz,
            pulse_width_s,
        })
    }

    pub fn input_code(&self) -> u8 {
        self.input_code
    }
    pub fn clk_hz(&self) -> f64 {
        self.clk_hz
    }
    pub fn pulse_width_s(&self) -> f64 {
        self.pulse_width_s
    }
    pub fn period_s(&self) -> f64 {
        1.0 / self.clk_hz
    }

    /// First-order sigma-delta CH/DC decision stream with density
    /// `input_code/256`; `true` selects CH.
    pub fn bitstream(&self, n: usize) -> Vec<bool> {
        let mut acc: u32 = 0;
        (0..n)
            .map(|_| {
                acc += self.input_code as u32;
                if acc >= 256 {
                    acc -= 256;
                    true
                } else {
                    false
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasLimits {
    pub v_th_v: f64,
    pub v_dsat_v: f64,
}

impl Default for BiasLimits {
    fn default() -> Self {
        Self {
            v_th_v: 0.35,
            v_dsat_v: 0.1,
        }
    }
}

impl BiasLimits {
    pub fn new(v_th_v: f64, v_dsat_v: f64) -> Result<Self, AnalogError> {
        let l = Self { v_th_v, v_dsat_v };
        if !(l.v_min_v() < l.v_max_v()) {
            return Err(AnalogError::InvalidParameter(format!(
                "empty bias window [{}, {}]",
                l.v_min_v(),
                l.v_max_v()
            )));
        }
        Ok(l)
    }

    pub fn v_max_v(&self) -> f64 {
        0.8 - self.v_th_v
    }

    pub fn v_min_v(&self) -> f64 {
        -1.0 + self.v_dsat_v
    }

    pub fn check(&self, v: f64) -> Result<(), AnalogError> {
        if v >= self.v_min_v() && v <= self.v_max_v() {
            Ok(())
        } else {
            Err(AnalogError::OutsideLimits {
                target_v: v,
                v_min_v: self.v_min_v(),
                v_max_v: self.v_max_v(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdacRamp {
    /// `(time_s, v_out_v)` after every SC pulse.
    pub trajectory: Vec<(f64, f64)>,
    /// Number of SC pulses issued by the coarse stage.
    pub coarse_transfers: usize,
    /// Number of SC pulses issued by the fine stage.
    pub fine_transfers: usize,
    pub final_v: f64,
    pub settle_time_s: f64,
}

/// Ramps the coarse stage toward `target_v` with CH+SC or DC+SC pairs while
/// each move reduces the error, then hands the output to the fine stage,
/// which repeats the procedure with its smaller step, and freezes.
///
/// Each pulse occupies one sequencer clock period.
pub fn vdac_ramp(
    coarse: VdacStage,
    fine: VdacStage,
    seq: &SigmaDeltaSequencer,
    limits: &BiasLimits,
    target_v: f64,
) -> Result<VdacRamp, AnalogError> {
    limits.check(target_v)?;
    let vref = coarse.vref_v.min(fine.vref_v);
    if target_v < 0.0 || target_v > vref {
        return Err(AnalogError::Unreachable {
            target_v,
            vref_v: vref,
        });
    }
    let dt = seq.period_s();
    let mut clock: u64 = 0;
    let mut trajectory = Vec::new();

    const MAX_PULSES: usize = 10_000_000;
    let drive = |mut s: VdacStage, clock: &mut u64, traj: &mut Vec<(f64, f64)>| {
        let mut n = 0usize;
        loop {
            let after = |p| vdac_pulse(vdac_pulse(s, p), VdacPulse::SC);
            let (up, down) = (after(VdacPulse::CH), after(VdacPulse::DC));
            let err = (target_v - s.v2_v).abs();
            let up_err = (target_v - up.v2_v).abs();
            let down_err = (target_v - down.v2_v).abs();
            s = if up_err < err && up_err <= down_err {
                up
            } else if down_err < err {
                down
            } else {
                return Ok((s, n));
            };
            *clock += 2;
            n += 1;
            traj.push((*clock as f64 * dt, s.v2_v));
            if n > MAX_PULSES {
                return Err(AnalogError::NoConvergence {
                    max_pulses: MAX_PULSES,
                });
            }
        }
    };

    let (coarse_done, coarse_transfers) = drive(coarse, &mut clock, &mut trajectory)?;
    let mut fine_seeded = fine;
    fine_seeded.v2_v = coarse_done.v2_v;
    fine_seeded.v1_v = coarse_done.v2_v;
    let (fine_done, fine_transfers) = drive(fine_seeded, &mut clock, &mut trajectory)?;
    Ok(VdacRamp {
        trajectory,
        coarse_transfers,
        fine_transfers,
        final_v: fine_done.v2_v,
        settle_time_s: clock as f64 * dt,
    })
}

/// Tabulated leakage current versus temperature, strictly increasing in T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageModel {
    pub droop_rate_v_per_s: f64,
    /// `(T_K, I_A)` rows sorted by temperature.
    pub temperature_curve: Vec<(f64, f64)>,
}

/// Reference temperature at which `droop_rate_v_per_s` applies.
pub const DROOP_REF_T_K: f64 = 3.0;

/// Synthetic leakage curve (no digitized data available): flat below 10 K,
/// rising roughly exponentially toward room temperature.
pub const DEFAULT_LEAKAGE_CSV: &str = include_str!("../data/leakage_synthetic.csv");

#[derive(Debug, Deserialize)]
struct LeakRow {
    t_k: f64,
    i_a: f64,
}

impl Default for LeakageModel {
    fn default() -> Self {
        Self::from_csv(DEFAULT_LEAKAGE_CSV.as_bytes(), 5e-3 / 600e-6).expect("bundled table")
    }
}

impl LeakageModel {
    pub fn new(droop_rate_v_per_s: f64, curve: Vec<(f64, f64)>) -> Result<Self, AnalogError> {
        if !(droop_rate_v_per_s >= 0.0) {
            return Err(AnalogError::InvalidParameter("droop rate must be >= 0".into()));
        }
        if curve.is_empty() {
            return Err(AnalogError::Table("empty".into()));
        }
        for w in curve.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(AnalogError::Table("temperatures must increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(AnalogError::Table(format!(
                    "leakage decreases between {} K and {} K",
                    w[0].0, w[1].0
                )));
            }
        }
        if curve.iter().any(|&(t, i)| !(t > 0.0) || !(i > 0.0)) {
            return Err(AnalogError::Table("entries must be positive".into()));
        }
        Ok(Self {
            droop_rate_v_per_s,
            temperature_curve: curve,
        })
    }

    /// Reads `T_K,I_A` rows (header required).
    pub fn from_csv<R: io::Read>(r: R, droop_rate_v_per_s: f64) -> Result<Self, AnalogError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut curve = Vec::new();
        for row in rd.deserialize::<LeakRow>() {
            let row = row.map_err(|e| AnalogError::Table(e.to_string()))?;
            curve.push((row.t_k, row.i_a));
        }
        Self::new(droop_rate_v_per_s, curve)
    }

    /// Log-linear interpolation, clamped at the table ends.
    pub fn leakage_a(&self, t_k: f64) -> f64 {
        let c = &self.temperature_curve;
        if t_k <= c[0].0 {
            return c[0].1;
        }
        if t_k >= c[c.len() - 1].0 {
            return c[c.len() - 1].1;
        }
        let k = c.partition_point(|&(t, _)| t <= t_k);
        let (t0, i0) = c[k - 1];
        let (t1, i1) = c[k];
        let f = (t_k - t0) / (t1 - t0);
        (i0.ln() + f * (i1.ln() - i0.ln())).exp()
    }

    pub fn droop_rate_at(&self, t_k: f64) -> f64 {
        self.droop_rate_v_per_s * self.leakage_a(t_k) / self.leakage_a(DROOP_REF_T_K)
    }
}

/// Linear droop at the reference temperature.
pub fn apply_droop(v_v: f64, hold_time_s: f64, lm: &LeakageModel) -> Result<f64, AnalogError> {
    apply_droop_at(v_v, hold_time_s, lm, DROOP_REF_T_K)
}

pub fn apply_droop_at(
    v_v: f64,
    hold_time_s: f64,
    lm: &LeakageModel,
    t_k: f64,
) -> Result<f64, AnalogError> {
    if !(hold_time_s >= 0.0) {
        return Err(AnalogError::InvalidParameter(format!(
            "hold time must be >= 0, got {hold_time_s}"
        )));
    }
    Ok(v_v - lm.droop_rate_at(t_k) * hold_time_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectorConfig {
    pub cu1_f: f64,
    pub cu3_f: f64,
    pub v_bias_v: f64,
    pub vref_v: f64,
    pub code: u8,
}

impl Default for InjectorConfig {
    fn default() -> Self {
        Self {
            cu1_f: 10e-15,
            cu3_f: 90e-15,
            v_bias_v: 0.2,
            vref_v: DEFAULT_VREF_V,
            code: 0,
        }
    }
}

impl InjectorConfig {
    pub fn c_div(&self) -> f64 {
        self.cu1_f / (self.cu1_f + self.cu3_f)
    }

    pub fn step_v(&self) -> f64 {
        self.code as f64 / 256.0 * self.vref_v * self.c_div()
    }

    /// Smallest code whose step reaches `dv`, if any.
    pub fn code_for_step(&self, dv: f64) -> Option<u8> {
        let lsb = self.vref_v * self.c_div() / 256.0;
        let c = (dv / lsb).round();
        (0.0..=255.0).contains(&c).then_some(c as u8)
    }

    fn validate(&self) -> Result<(), AnalogError> {
        positive("cu1_f", self.cu1_f)?;
        positive("cu3_f", self.cu3_f)?;
        positive("vref_v", self.vref_v)
    }
}

/// Injector output: the pedestal from `precharge_done_at_s` and the
/// pedestal plus the CDAC step from `step_at_s`.
pub fn injector_waveform(
    cfg: &InjectorConfig,
    limits: &BiasLimits,
    precharge_done_at_s: f64,
    step_at_s: f64,
) -> Result<AnalogTrace, AnalogError> {
    cfg.validate()?;
    if !(step_at_s >= precharge_done_at_s) {
        return Err(AnalogError::InvalidParameter(
            "step must not precede the end of pre-charge".into(),
        ));
    }
    let top = cfg.v_bias_v + cfg.step_v();
    limits.check(cfg.v_bias_v)?;
    limits.check(top)?;
    let mut tr = AnalogTrace::constant(precharge_done_at_s, cfg.v_bias_v);
    if cfg.code != 0 {
        tr.step_to(step_at_s, top);
    }
    Ok(tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdacMapping {
    /// Geometric spacing between the end currents.
    Log,
    Linear,
}

/// Replica-biased V_RDPRE generator trimmed by the 8-bit IDAC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdacReplica {
    pub v_ss_v: f64,
    pub vgs_v: f64,
    pub r_eff_ohm: f64,
    pub i_min_a: f64,
    pub i_max_a: f64,
    pub mapping: IdacMapping,
}

impl Default for IdacReplica {
    fn default() -> Self {
        Self {
            v_ss_v: -1.0,
            vgs_v: 0.45,
            r_eff_ohm: 200e3,
            i_min_a: 1e-9,
            i_max_a: 1e-6,
            mapping: IdacMapping::Log,
        }
    }
}

impl IdacReplica {
    pub fn current_a(&self, code: u8) -> f64 {
        let x = code as f64 / 255.0;
        match self.mapping {
            IdacMapping::Log => self.i_min_a * (self.i_max_a / self.i_min_a).powf(x),
            IdacMapping::Linear => self.i_min_a + (self.i_max_a - self.i_min_a) * x,
        }
    }
}

pub fn idac_vrdpre(code: u8, replica: &IdacReplica) -> f64 {
    replica.v_ss_v + replica.vgs_v + replica.r_eff_ohm * replica.current_a(code)
}
