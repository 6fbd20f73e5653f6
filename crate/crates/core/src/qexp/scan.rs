use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    dip_statistic, extract_probabilities, run_with_probability, tunneling_probability,
    HistogramConfig, QexpError, ReadoutSetup, TunnelingModel, DIP_BIMODAL_THRESHOLD,
};

/// Rectangle in (V_RD, V_RG) where the dot level is aligned with the QPC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceWindow {
    pub v_rd_min_v: f64,
    pub v_rd_max_v: f64,
    pub v_rg_min_v: f64,
    pub v_rg_max_v: f64,
}

impl ResonanceWindow {
    pub fn contains(&self, v_rd: f64, v_rg: f64) -> bool {
        (self.v_rd_min_v..=self.v_rd_max_v).contains(&v_rd)
            && (self.v_rg_min_v..=self.v_rg_max_v).contains(&v_rg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasScanConfig {
    pub v_rd_grid_v: Vec<f64>,
    pub v_rg_grid_v: Vec<f64>,
    pub trials_per_point: usize,
    pub resonance_window: ResonanceWindow,
    /// Injector step applied at every grid point.
    pub step_v: f64,
    pub seed: u64,
}

impl Default for BiasScanConfig {
    fn default() -> Self {
        let grid = |lo: f64, hi: f64, n: usize| super::linspace(lo, hi, n);
        Self {
            v_rd_grid_v: grid(0.40, 0.60, 11),
            v_rg_grid_v: grid(0.20, 0.40, 11),
            trials_per_point: 2000,
            resonance_window: ResonanceWindow {
                v_rd_min_v: 0.46,
                v_rd_max_v: 0.54,
                v_rg_min_v: 0.26,
                v_rg_max_v: 0.34,
            },
            step_v: 60e-3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub v_rd_v: f64,
    pub v_rg_v: f64,
    pub in_window: bool,
    pub mean_v: f64,
    pub p1: f64,
    pub dip: f64,
    pub bimodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMap {
    pub n_rd: usize,
    pub n_rg: usize,
    /// Row-major over V_RD, then V_RG.
    pub points: Vec<ScanPoint>,
}

impl HeatMap {
    pub fn at(&self, i_rd: usize, i_rg: usize) -> &ScanPoint {
        &self.points[i_rd * self.n_rg + i_rg]
    }
}

/// Each grid point gets its own random streams keyed by its flat index.
pub fn bias_scan(
    cfg: &BiasScanConfig,
    model: &TunnelingModel,
    setup: &ReadoutSetup,
    hist: &HistogramConfig,
) -> Result<HeatMap, QexpError> {
    if cfg.v_rd_grid_v.is_empty() || cfg.v_rg_grid_v.is_empty() {
        return Err(QexpError::Experiment("empty bias grid".into()));
    }
    let n_rg = cfg.v_rg_grid_v.len();
    let p_in = tunneling_probability(cfg.step_v, model);
    let points = (0..cfg.v_rd_grid_v.len() * n_rg)
        .into_par_iter()
        .map(|k| {
            let (v_rd, v_rg) = (cfg.v_rd_grid_v[k / n_rg], cfg.v_rg_grid_v[k % n_rg]);
            let in_window = cfg.resonance_window.contains(v_rd, v_rg);
            let p = if in_window { p_in } else { 0.0 };
            let (_, samples, level1) =
                run_with_probability(model, setup, p, cfg.trials_per_point, cfg.seed, k as u64)?;
            let v: Vec<f64> = samples.iter().map(|s| s.v_out_v).collect();
            let dip = dip_statistic(&v).unwrap_or(0.0);
            Ok(ScanPoint {
                v_rd_v: v_rd,
                v_rg_v: v_rg,
                in_window,
                mean_v: v.iter().sum::<f64>() / v.len() as f64,
                p1: extract_probabilities(&v, hist, level1)?.p1,
                dip,
                bimodal: dip * (v.len() as f64).sqrt() > DIP_BIMODAL_THRESHOLD,
            })
        })
        .collect::<Result<Vec<_>, QexpError>>()?;
    Ok(HeatMap {
        n_rd: cfg.v_rd_grid_v.len(),
        n_rg,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bimodal_only_inside_window() {
        let cfg = BiasScanConfig {
            trials_per_point: 500,
            v_rd_grid_v: vec![0.40, 0.50],
            v_rg_grid_v: vec![0.30],
            ..Default::default()
        };
        let map = bias_scan(
            &cfg,
            &TunnelingModel::default(),
            &ReadoutSetup::default(),
            &HistogramConfig::default(),
        )
        .unwrap();
        let (out, inside) = (map.at(0, 0), map.at(1, 0));
        assert!(!out.in_window && inside.in_window);
        assert!(!out.bimodal && inside.bimodal);
        assert!(inside.mean_v < out.mean_v - 0.05);
    }
}
