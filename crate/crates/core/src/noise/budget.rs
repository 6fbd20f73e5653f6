use serde::{Deserialize, Serialize};

use super::{
    integrate_power, ktc_rms, output_spectrum, CdsTiming, FrequencyGrid, NoiseError, NoisePsd,
    SamplerTiming, Transfer,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseContribution {
    pub source: String,
    pub rms_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub rows: Vec<NoiseContribution>,
    /// Root-sum-square of all rows.
    pub total_rms_v: f64,
}

impl NoiseBudget {
    fn from_rows(rows: Vec<NoiseContribution>) -> Self {
        let total_rms_v = rows.iter().map(|r| r.rms_v * r.rms_v).sum::<f64>().sqrt();
        Self { rows, total_rms_v }
    }

    pub fn get(&self, source: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.source == source).map(|r| r.rms_v)
    }
}

/// A spectral source and the chain that carries it to the output.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePath {
    pub psd: NoisePsd,
    pub chain: Vec<Transfer>,
}

fn finite_nonneg(name: &'static str, x: f64) -> Result<(), NoiseError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(NoiseError::MissingParameter(name))
    }
}

fn finite_pos(name: &'static str, x: f64) -> Result<(), NoiseError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(NoiseError::MissingParameter(name))
    }
}

/// Injector output noise parameters. Defaults are the reconstructed
/// operating point that reproduces the published 27.4 uV rms total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectorNoiseParams {
    pub s_vdac_v2_hz: f64,
    pub s_vdd_v2_hz: f64,
    pub tau_p_s: f64,
    pub tau_pc_s: f64,
    pub tau_clk_s: f64,
    pub bw_n_hz: f64,
    pub rc_pc_pole_hz: f64,
    pub rc_cdac_pole_hz: f64,
    pub cu1_f: f64,
    pub cu3_f: f64,
    pub c_pc_f: f64,
    pub temp_k: f64,
    pub f_min_hz: f64,
    pub grid_points: usize,
}

impl Default for InjectorNoiseParams {
    fn default() -> Self {
        Self {
            s_vdac_v2_hz: 1.0e-18,
            s_vdd_v2_hz: 1.6e-17,
            tau_p_s: 500e-9,
            tau_pc_s: 100e-9,
            tau_clk_s: 0.0,
            bw_n_hz: 500e6,
            rc_pc_pole_hz: 300e6,
            rc_cdac_pole_hz: 300e6,
            cu1_f: 10e-15,
            cu3_f: 90e-15,
            c_pc_f: 250e-15,
            temp_k: 3.0,
            f_min_hz: 1e3,
            grid_points: 10_000,
        }
    }
}

impl InjectorNoiseParams {
    pub fn c_div(&self) -> f64 {
        self.cu1_f / (self.cu1_f + self.cu3_f)
    }

    fn validate(&self) -> Result<(), NoiseError> {
        finite_nonneg("s_vdac_v2_hz", self.s_vdac_v2_hz)?;
        finite_nonneg("s_vdd_v2_hz", self.s_vdd_v2_hz)?;
        finite_pos("tau_p_s", self.tau_p_s)?;
        finite_nonneg("tau_pc_s", self.tau_pc_s)?;
        finite_nonneg("tau_clk_s", self.tau_clk_s)?;
        finite_pos("bw_n_hz", self.bw_n_hz)?;
        finite_pos("rc_pc_pole_hz", self.rc_pc_pole_hz)?;
        finite_pos("rc_cdac_pole_hz", self.rc_cdac_pole_hz)?;
        finite_pos("cu1_f", self.cu1_f)?;
        finite_pos("cu3_f", self.cu3_f)?;
        finite_pos("c_pc_f", self.c_pc_f)?;
        finite_pos("temp_k", self.temp_k)?;
        finite_pos("f_min_hz", self.f_min_hz)
    }

    pub fn grid(&self) -> Result<FrequencyGrid, NoiseError> {
        FrequencyGrid::logarithmic(self.f_min_hz, self.bw_n_hz, self.grid_points)
    }

    /// Pre-charge path (VDAC noise) then CDAC path (supply noise).
    pub fn paths(&self) -> Result<Vec<SourcePath>, NoiseError> {
        self.validate()?;
        let pc = SamplerTiming::new(self.tau_pc_s, self.tau_p_s, self.bw_n_hz)?;
        let clk = SamplerTiming::new(self.tau_clk_s, self.tau_p_s, self.bw_n_hz)?;
        Ok(vec![
            SourcePath {
                psd: NoisePsd::white("vdac_precharge", self.s_vdac_v2_hz),
                chain: vec![
                    Transfer::Rc {
                        pole_hz: self.rc_pc_pole_hz,
                    },
                    Transfer::SampleHold { timing: pc },
                ],
            },
            SourcePath {
                psd: NoisePsd::white("vdd_cdac", self.s_vdd_v2_hz),
                chain: vec![
                    Transfer::Gain { g: self.c_div() },
                    Transfer::Rc {
                        pole_hz: self.rc_cdac_pole_hz,
                    },
                    Transfer::SampleHold { timing: clk },
                ],
            },
        ])
    }
}

pub fn injector_noise_budget(p: &InjectorNoiseParams) -> Result<NoiseBudget, NoiseError> {
    let grid = p.grid()?;
    let mut rows = Vec::new();
    for sp in p.paths()? {
        rows.push(NoiseContribution {
            source: sp.psd.label.clone(),
            rms_v: integrate_power(&sp.psd, &sp.chain, &grid)?.sqrt(),
        });
    }
    rows.push(NoiseContribution {
        source: "ktc_precharge".into(),
        rms_v: ktc_rms(p.temp_k, p.c_pc_f),
    });
    rows.push(NoiseContribution {
        source: "ktc_cdac".into(),
        rms_v: p.c_div() * ktc_rms(p.temp_k, p.cu1_f),
    });
    Ok(NoiseBudget::from_rows(rows))
}

/// Detector readout-chain noise parameters. Source densities are referred
/// to the input of their own stage. Defaults reproduce the published
/// 17 mV rms total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorNoiseParams {
    pub gain_sf: f64,
    pub gain_pre: f64,
    pub gain_obuf: f64,
    pub gain_int: f64,
    pub rc_pole_hz: f64,
    pub cds: CdsTiming,
    pub bw_n_hz: f64,
    pub sf_v_rthz: f64,
    pub pre_v_rthz: f64,
    pub obuf_v_rthz: f64,
    pub int_v_rthz: f64,
    pub c_sample_f: f64,
    pub temp_k: f64,
    pub f_min_hz: f64,
    pub grid_points: usize,
}

impl Default for DetectorNoiseParams {
    fn default() -> Self {
        Self {
            gain_sf: 0.9,
            gain_pre: 2.2,
            gain_obuf: 5.4,
            gain_int: 2.0,
            rc_pole_hz: 70e6,
            cds: CdsTiming::default(),
            bw_n_hz: 100e6,
            sf_v_rthz: 120e-9,
            pre_v_rthz: 117e-9,
            obuf_v_rthz: 15e-9,
            int_v_rthz: 8e-9,
            c_sample_f: 1e-12,
            temp_k: 3.0,
            f_min_hz: 1e3,
            grid_points: 10_000,
        }
    }
}

impl DetectorNoiseParams {
    fn validate(&self) -> Result<(), NoiseError> {
        finite_pos("gain_sf", self.gain_sf)?;
        finite_pos("gain_pre", self.gain_pre)?;
        finite_pos("gain_obuf", self.gain_obuf)?;
        finite_pos("gain_int", self.gain_int)?;
        finite_pos("rc_pole_hz", self.rc_pole_hz)?;
        finite_pos("bw_n_hz", self.bw_n_hz)?;
        finite_nonneg("sf_v_rthz", self.sf_v_rthz)?;
        finite_nonneg("pre_v_rthz", self.pre_v_rthz)?;
        finite_nonneg("obuf_v_rthz", self.obuf_v_rthz)?;
        finite_nonneg("int_v_rthz", self.int_v_rthz)?;
        finite_pos("c_sample_f", self.c_sample_f)?;
        finite_pos("temp_k", self.temp_k)?;
        finite_pos("f_min_hz", self.f_min_hz)?;
        self.cds.validate()
    }

    /// Gain from the CDS output to the ADC input.
    pub fn post_cds_gain(&self) -> f64 {
        self.gain_obuf * self.gain_int
    }

    pub fn grid(&self) -> Result<FrequencyGrid, NoiseError> {
        FrequencyGrid::logarithmic(self.f_min_hz, self.bw_n_hz, self.grid_points)
    }

    pub fn paths(&self) -> Result<Vec<SourcePath>, NoiseError> {
        self.validate()?;
        let rc = Transfer::Rc {
            pole_hz: self.rc_pole_hz,
        };
        let cds = Transfer::Cds {
            timing: self.cds,
            bw_n_hz: self.bw_n_hz,
        };
        let post = Transfer::Gain {
            g: self.post_cds_gain(),
        };
        Ok(vec![
            SourcePath {
                psd: NoisePsd::white_density("source_follower", self.sf_v_rthz),
                chain: vec![
                    Transfer::Gain {
                        g: self.gain_sf * self.gain_pre,
                    },
                    rc,
                    cds,
                    post,
                ],
            },
            SourcePath {
                psd: NoisePsd::white_density("preamp", self.pre_v_rthz),
                chain: vec![Transfer::Gain { g: self.gain_pre }, rc, cds, post],
            },
            SourcePath {
                psd: NoisePsd::white_density("output_buffer", self.obuf_v_rthz),
                chain: vec![rc, post],
            },
            SourcePath {
                psd: NoisePsd::white_density("adc_interface", self.int_v_rthz),
                chain: vec![rc, Transfer::Gain { g: self.gain_int }],
            },
        ])
    }

    fn cds_ktc_rms(&self) -> f64 {
        // two independent samples per CDS output
        2f64.sqrt() * ktc_rms(self.temp_k, self.c_sample_f) * self.post_cds_gain()
    }
}

pub fn detector_noise_budget(p: &DetectorNoiseParams) -> Result<NoiseBudget, NoiseError> {
    let grid = p.grid()?;
    let mut rows = spectral_rows(p, &grid)?;
    rows.push(NoiseContribution {
        source: "cds_ktc".into(),
        rms_v: p.cds_ktc_rms(),
    });
    Ok(NoiseBudget::from_rows(rows))
}

/// Spectral contributions integrated over `[f_lo, f_hi]` only; sampled
/// kT/C noise has no spectral location and is left out.
pub fn detector_noise_budget_band(
    p: &DetectorNoiseParams,
    f_lo: f64,
    f_hi: f64,
) -> Result<NoiseBudget, NoiseError> {
    let grid = p.grid()?.band(f_lo, f_hi)?;
    Ok(NoiseBudget::from_rows(spectral_rows(p, &grid)?))
}

fn spectral_rows(
    p: &DetectorNoiseParams,
    grid: &FrequencyGrid,
) -> Result<Vec<NoiseContribution>, NoiseError> {
    p.paths()?
        .into_iter()
        .map(|sp| {
            Ok(NoiseContribution {
                source: sp.psd.label.clone(),
                rms_v: integrate_power(&sp.psd, &sp.chain, grid)?.sqrt(),
            })
        })
        .collect()
}

/// `(f_hz, source, psd_out)` rows for every spectral path.
pub fn spectra(paths: &[SourcePath], grid: &FrequencyGrid) -> Vec<(f64, String, f64)> {
    let mut out = Vec::new();
    for sp in paths {
        for (f, s) in output_spectrum(&sp.psd, &sp.chain, grid) {
            out.push((f, sp.psd.label.clone(), s));
        }
    }
    out
}
