//! Sampled-data noise engine.
//!
//! All transfer functions here are power responses (|H|^2, dimensionless)
//! applied to one-sided voltage PSDs in V^2/Hz. Integrated results are rms
//! volts. `sinc` is the normalized form `sin(pi x)/(pi x)`.

mod budget;

pub use budget::{
    detector_noise_budget, detector_noise_budget_band, injector_noise_budget, DetectorNoiseParams,
    spectra, InjectorNoiseParams, NoiseBudget, NoiseContribution, SourcePath,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::{BOLTZMANN_J_PER_K as K_B, ELEMENTARY_CHARGE_C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("invalid frequency grid: {0}")]
    BadGrid(String),
    #[error("invalid timing: {0}")]
    BadTiming(String),
    #[error("missing or invalid parameter `{0}`")]
    MissingParameter(&'static str),
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScheme {
    Logarithmic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points_hz: Vec<f64>,
    scheme: GridScheme,
}

impl FrequencyGrid {
    pub fn logarithmic(f_min_hz: f64, f_max_hz: f64, n: usize) -> Result<Self, NoiseError> {
        Self::check_bounds(f_min_hz, f_max_hz, n)?;
        let (a, b) = (f_min_hz.ln(), f_max_hz.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut points_hz: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
        points_hz[0] = f_min_hz;
        points_hz[n - 1] = f_max_hz;
        Ok(Self {
            points_hz,
            scheme: GridScheme::Logarithmic,
        })
    }

    pub fn linear(f_min_hz: f64, f_max_hz: f64, n: usize) -> Result<Self, NoiseError> {
        Self::check_bounds(f_min_hz, f_max_hz, n)?;
        let step = (f_max_hz - f_min_hz) / (n - 1) as f64;
        let mut points_hz: Vec<f64> = (0..n).map(|i| f_min_hz + step * i as f64).collect();
        points_hz[n - 1] = f_max_hz;
        Ok(Self {
            points_hz,
            scheme: GridScheme::Linear,
        })
    }

    /// Arbitrary strictly increasing nonnegative points.
    pub fn from_points(points_hz: Vec<f64>) -> Result<Self, NoiseError> {
        if points_hz.is_empty() {
            return Err(NoiseError::EmptyGrid);
        }
        if points_hz.iter().any(|&f| !(f >= 0.0) || !f.is_finite())
            || points_hz.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(NoiseError::BadGrid("points must be finite, >= 0, strictly increasing".into()));
        }
        Ok(Self {
            points_hz,
            scheme: GridScheme::Linear,
        })
    }

    fn check_bounds(f_min_hz: f64, f_max_hz: f64, n: usize) -> Result<(), NoiseError> {
        if n == 0 {
            return Err(NoiseError::EmptyGrid);
        }
        if n < 2 || !(f_min_hz > 0.0) || !(f_max_hz > f_min_hz) || !f_max_hz.is_finite() {
            return Err(NoiseError::BadGrid(format!(
                "need 0 < f_min < f_max and n >= 2 (got {f_min_hz}, {f_max_hz}, {n})"
            )));
        }
        Ok(())
    }

    pub fn points_hz(&self) -> &[f64] {
        &self.points_hz
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// Sub-grid restricted to `[f_lo, f_hi]`.
    pub fn band(&self, f_lo: f64, f_hi: f64) -> Result<Self, NoiseError> {
        let points_hz: Vec<f64> = self
            .points_hz
            .iter()
            .copied()
            .filter(|&f| f >= f_lo && f <= f_hi)
            .collect();
        if points_hz.is_empty() {
            return Err(NoiseError::EmptyGrid);
        }
        Ok(Self {
            points_hz,
            scheme: self.scheme,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum PsdShape {
    White { level_v2_hz: f64 },
    /// `level * (1 + corner/f)`.
    Flicker { level_v2_hz: f64, corner_hz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePsd {
    pub label: String,
    pub shape: PsdShape,
}

impl NoisePsd {
    pub fn white(label: impl Into<String>, level_v2_hz: f64) -> Self {
        Self {
            label: label.into(),
            shape: PsdShape::White { level_v2_hz },
        }
    }

    /// White source given as a spot density in V/sqrt(Hz).
    pub fn white_density(label: impl Into<String>, v_per_rthz: f64) -> Self {
        Self::white(label, v_per_rthz * v_per_rthz)
    }

    pub fn density(&self, f_hz: f64) -> f64 {
        match self.shape {
            PsdShape::White { level_v2_hz } => level_v2_hz,
            PsdShape::Flicker {
                level_v2_hz,
                corner_hz,
            } => {
                if f_hz <= 0.0 {
                    f64::INFINITY
                } else {
                    level_v2_hz * (1.0 + corner_hz / f_hz)
                }
            }
        }
    }

    pub fn white_level(&self) -> Option<f64> {
        match self.shape {
            PsdShape::White { level_v2_hz } => Some(level_v2_hz),
            PsdShape::Flicker { .. } => None,
        }
    }

    fn validate(&self) -> Result<(), NoiseError> {
        let ok = match self.shape {
            PsdShape::White { level_v2_hz } => level_v2_hz >= 0.0 && level_v2_hz.is_finite(),
            PsdShape::Flicker {
                level_v2_hz,
                corner_hz,
            } => level_v2_hz >= 0.0 && corner_hz >= 0.0 && level_v2_hz.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(NoiseError::MissingParameter("psd level"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerTiming {
    pub tau_track_s: f64,
    pub tau_p_s: f64,
    pub bw_n_hz: f64,
}

impl SamplerTiming {
    pub fn new(tau_track_s: f64, tau_p_s: f64, bw_n_hz: f64) -> Result<Self, NoiseError> {
        let t = Self {
            tau_track_s,
            tau_p_s,
            bw_n_hz,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.tau_p_s > 0.0) || !(self.bw_n_hz > 0.0) {
            return Err(NoiseError::BadTiming("period and bandwidth must be positive".into()));
        }
        if !(self.tau_track_s >= 0.0 && self.tau_track_s <= self.tau_p_s) {
            return Err(NoiseError::BadTiming(format!(
                "track time {} s outside [0, {}] s",
                self.tau_track_s, self.tau_p_s
            )));
        }
        Ok(())
    }

    pub fn fs_hz(&self) -> f64 {
        1.0 / self.tau_p_s
    }

    /// Normalized hold fraction.
    pub fn tau_shn(&self) -> f64 {
        1.0 - self.tau_track_s / self.tau_p_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdsTiming {
    pub tau_sh_s: f64,
    pub lambda_s: f64,
    pub period_s: f64,
}

impl Default for CdsTiming {
    fn default() -> Self {
        Self {
            tau_sh_s: 80e-9,
            lambda_s: 100e-9,
            period_s: 1e-6,
        }
    }
}

impl CdsTiming {
    pub fn new(tau_sh_s: f64, lambda_s: f64, period_s: f64) -> Result<Self, NoiseError> {
        let t = Self {
            tau_sh_s,
            lambda_s,
            period_s,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.tau_sh_s > 0.0 && self.tau_sh_s < self.lambda_s && self.lambda_s < self.period_s) {
            return Err(NoiseError::BadTiming(format!(
                "need 0 < tau_sh < lambda < T (got {}, {}, {})",
                self.tau_sh_s, self.lambda_s, self.period_s
            )));
        }
        Ok(())
    }
}

/// Track-and-hold aliasing response for white input noise limited to `bw_n`.
pub fn h_sh(f_hz: f64, t: &SamplerTiming) -> f64 {
    let tn = t.tau_shn();
    let fs = t.fs_hz();
    2.0 * tn * tn * (t.bw_n_hz / fs) * sinc(tn * f_hz / fs).powi(2) + (1.0 - tn)
}

/// Correlated double sampling response: hold envelope, white-noise alias
/// count `2 BW_n T`, and the two-sample difference factor.
pub fn h_cds(f_hz: f64, t: &CdsTiming, bw_n_hz: f64) -> f64 {
    let s = (std::f64::consts::PI * t.lambda_s * f_hz).sin();
    4.0 * sinc(f_hz * t.period_s).powi(2) * (2.0 * bw_n_hz * t.period_s) * s * s
}

pub fn rc_power_response(f_hz: f64, pole_hz: f64) -> f64 {
    let x = f_hz / pole_hz;
    1.0 / (1.0 + x * x)
}

pub fn ktc_rms(temp_k: f64, cap_f: f64) -> f64 {
    (K_B * temp_k / cap_f).sqrt()
}

/// Thermal voltage kT/q.
pub fn kt_over_q(temp_k: f64) -> f64 {
    K_B * temp_k / ELEMENTARY_CHARGE_C
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Transfer {
    /// Flat amplitude gain; contributes `g^2`.
    Gain { g: f64 },
    Rc { pole_hz: f64 },
    SampleHold { timing: SamplerTiming },
    Cds { timing: CdsTiming, bw_n_hz: f64 },
}

impl Transfer {
    pub fn power(&self, f_hz: f64) -> f64 {
        match self {
            Transfer::Gain { g } => g * g,
            Transfer::Rc { pole_hz } => rc_power_response(f_hz, *pole_hz),
            Transfer::SampleHold { timing } => h_sh(f_hz, timing),
            Transfer::Cds { timing, bw_n_hz } => h_cds(f_hz, timing, *bw_n_hz),
        }
    }
}

pub fn chain_power(chain: &[Transfer], f_hz: f64) -> f64 {
    chain.iter().map(|h| h.power(f_hz)).product()
}

/// `sqrt(integral psd * prod(H) df)` by the trapezoid rule over the grid.
pub fn integrate_rms(
    psd: &NoisePsd,
    chain: &[Transfer],
    grid: &FrequencyGrid,
) -> Result<f64, NoiseError> {
    Ok(integrate_power(psd, chain, grid)?.sqrt())
}

pub fn integrate_power(
    psd: &NoisePsd,
    chain: &[Transfer],
    grid: &FrequencyGrid,
) -> Result<f64, NoiseError> {
    psd.validate()?;
    let f = grid.points_hz();
    if f.is_empty() {
        return Err(NoiseError::EmptyGrid);
    }
    let y: Vec<f64> = f
        .iter()
        .map(|&fi| psd.density(fi) * chain_power(chain, fi))
        .collect();
    Ok(f.windows(2)
        .zip(y.windows(2))
        .map(|(fw, yw)| 0.5 * (yw[0] + yw[1]) * (fw[1] - fw[0]))
        .sum())
}

/// Output PSD `psd * prod(H)` sampled on the grid.
pub fn output_spectrum(psd: &NoisePsd, chain: &[Transfer], grid: &FrequencyGrid) -> Vec<(f64, f64)> {
    grid.points_hz()
        .iter()
        .map(|&f| (f, psd.density(f) * chain_power(chain, f)))
        .collect()
}
