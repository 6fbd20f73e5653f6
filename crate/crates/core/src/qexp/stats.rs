use serde::{Deserialize, Serialize};

use super::QexpError;

/// Fixed-width histogram whose bin centres sit on integer multiples of the
/// bin width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bin_width_v: f64,
    /// Centre of the lowest bin, as a multiple of the width.
    pub first_center_index: i64,
    /// Centre of the highest bin, as a multiple of the width.
    pub last_center_index: i64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bin_width_v: 0.03,
            first_center_index: -20,
            last_center_index: 8,
        }
    }
}

impl HistogramConfig {
    pub fn n_bins(&self) -> usize {
        (self.last_center_index - self.first_center_index + 1).max(0) as usize
    }

    pub fn center_v(&self, bin: usize) -> f64 {
        (self.first_center_index + bin as i64) as f64 * self.bin_width_v
    }

    /// Bin holding `v`, if inside the covered range.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let k = (v / self.bin_width_v).round() as i64;
        (k >= self.first_center_index && k <= self.last_center_index)
            .then(|| (k - self.first_center_index) as usize)
    }

    fn validate(&self) -> Result<(), QexpError> {
        if !(self.bin_width_v > 0.0) || self.n_bins() == 0 {
            return Err(QexpError::Histogram("empty histogram range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub bin_edges_v: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    /// Centre of the fullest bin above the midpoint between the peaks.
    pub peak0_v: f64,
    /// Centre of the fullest bin at or below that midpoint.
    pub peak1_v: f64,
}

impl HistogramResult {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// Boundary between the |0> and |1> halves used for peak finding.
pub const PEAK_SPLIT_V: f64 = -0.15;

pub fn histogram(values: &[f64], cfg: &HistogramConfig) -> Result<HistogramResult, QexpError> {
    cfg.validate()?;
    let n = cfg.n_bins();
    let mut counts = vec![0u64; n];
    let (mut underflow, mut overflow) = (0, 0);
    for &v in values {
        match cfg.bin_of(v) {
            Some(b) => counts[b] += 1,
            None if v < 0.0 => underflow += 1,
            None => overflow += 1,
        }
    }
    let half = cfg.bin_width_v / 2.0;
    let bin_edges_v: Vec<f64> = (0..=n).map(|b| cfg.center_v(b) - half).collect();
    let peak = |pred: &dyn Fn(f64) -> bool| {
        (0..n)
            .filter(|&b| pred(cfg.center_v(b)))
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .map_or(f64::NAN, |b| cfg.center_v(b))
    };
    Ok(HistogramResult {
        peak0_v: peak(&|c| c > PEAK_SPLIT_V),
        peak1_v: peak(&|c| c <= PEAK_SPLIT_V),
        bin_edges_v,
        counts,
        underflow,
        overflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub p0: f64,
    pub p1: f64,
    pub discarded: u64,
    pub n_total: u64,
}

/// Counts the three bins around 0 V for |0> and the three bins around
/// `level1_v` for |1>; everything else is discarded. Probabilities are
/// normalized by the full trial count.
pub fn extract_probabilities(
    values: &[f64],
    cfg: &HistogramConfig,
    level1_v: f64,
) -> Result<Probabilities, QexpError> {
    cfg.validate()?;
    let k1 = (level1_v / cfg.bin_width_v).round() as i64;
    for k in [-1, 1] {
        for centre in [k, k1 + k] {
            if centre < cfg.first_center_index || centre > cfg.last_center_index {
                return Err(QexpError::Histogram(format!(
                    "bins do not cover the peak neighbourhood at {} V",
                    centre as f64 * cfg.bin_width_v
                )));
            }
        }
    }
    let (mut c0, mut c1) = (0u64, 0u64);
    for &v in values {
        if let Some(b) = cfg.bin_of(v) {
            let k = b as i64 + cfg.first_center_index;
            if (k - k1).abs() <= 1 {
                c1 += 1;
            } else if k.abs() <= 1 {
                c0 += 1;
            }
        }
    }
    let n = values.len() as u64;
    let nf = n.max(1) as f64;
    Ok(Probabilities {
        p0: c0 as f64 / nf,
        p1: c1 as f64 / nf,
        discarded: n - c0 - c1,
        n_total: n,
    })
}

/// Biased sample autocorrelation for lags `0..=max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>, QexpError> {
    let n = series.len();
    if n <= max_lag {
        return Err(QexpError::Acf(format!(
            "series of length {n} is too short for lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    if !(c0 > 0.0) {
        return Err(QexpError::Acf("constant series has no autocorrelation".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructed_series() {
        let mut v = vec![-0.3; 9500];
        v.extend(vec![0.0; 500]);
        let p = extract_probabilities(&v, &HistogramConfig::default(), -0.3).unwrap();
        assert_eq!((p.p1, p.p0, p.discarded), (0.95, 0.05, 0));
        let h = histogram(&v, &HistogramConfig::default()).unwrap();
        assert_eq!(h.total(), 10_000);
        assert!((h.peak0_v - 0.0).abs() < 1e-12 && (h.peak1_v + 0.3).abs() < 1e-12);
    }

    #[test]
    fn neighbour_bins_counted_midzone_dropped() {
        let v = [-0.344, -0.256, 0.044, -0.044, -0.15, -0.2];
        let p = extract_probabilities(&v, &HistogramConfig::default(), -0.3).unwrap();
        assert_eq!(p.n_total, 6);
        assert_eq!(p.discarded, 2);
        assert!((p.p1 - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn uncovered_peak_is_error() {
        let cfg = HistogramConfig {
            first_center_index: -5,
            ..Default::default()
        };
        assert!(extract_probabilities(&[0.0], &cfg, -0.3).is_err());
    }

    #[test]
    fn acf_basics() {
        assert!(autocorrelation(&[1.0; 10], 2).is_err());
        assert!(autocorrelation(&[1.0, 2.0], 2).is_err());
        let a = autocorrelation(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert_eq!(a[0], 1.0);
        assert!(a[1] < -0.8);
    }
}
