//! Detector noise budget, the close-in band split, and a Monte-Carlo
//! readout whose sample spread matches the configured noise.

use cryoqc::detector::{run_readout, DetectorChainConfig, QpcEvent};
use cryoqc::noise::{detector_noise_budget, detector_noise_budget_band, DetectorNoiseParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = DetectorNoiseParams::default();
    let b = detector_noise_budget(&p)?;
    for r in &b.rows {
        println!("{:<16} {:>8.3} mV", r.source, r.rms_v * 1e3);
    }
    println!("{:<16} {:>8.3} mV", "total", b.total_rms_v * 1e3);

    let low = detector_noise_budget_band(&p, p.f_min_hz, 1e6)?;
    println!(
        "below 1 MHz: source follower {:.2} mV, output buffer {:.2} mV",
        low.get("source_follower").unwrap_or(0.0) * 1e3,
        low.get("output_buffer").unwrap_or(0.0) * 1e3
    );

    let cfg = DetectorChainConfig::default();
    let trials: Vec<Vec<QpcEvent>> = (0..20_000)
        .map(|i| if i % 2 == 0 { vec![QpcEvent::electron_out(90e-9)] } else { vec![] })
        .collect();
    let out = run_readout(&trials, &cfg, 17.5e-3, 11)?;
    let zeros: Vec<f64> = out.iter().skip(1).step_by(2).map(|s| s.v_out_v).collect();
    let ones: Vec<f64> = out.iter().step_by(2).map(|s| s.v_out_v).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sd = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    println!(
        "readout: |0> {:.1} mV, |1> {:.1} mV, sigma {:.2} mV",
        mean(&zeros) * 1e3,
        mean(&ones) * 1e3,
        sd(&zeros) * 1e3
    );
    Ok(())
}
