//! Injector output noise budget and the per-source spectrum at a few
//! frequencies.

use cryoqc::noise::{injector_noise_budget, spectra, InjectorNoiseParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = InjectorNoiseParams::default();
    let b = injector_noise_budget(&p)?;
    for r in &b.rows {
        println!("{:<16} {:>8.2} uV", r.source, r.rms_v * 1e6);
    }
    println!("{:<16} {:>8.2} uV", "total", b.total_rms_v * 1e6);

    let grid = p.grid()?;
    let pts = spectra(&p.paths()?, &grid);
    let stride = grid.points_hz().len() / 5;
    for (f, src, psd) in pts.iter().filter(|(f, ..)| {
        grid.points_hz().iter().step_by(stride).any(|g| g == f)
    }) {
        println!("{f:>12.3e} Hz  {src:<16} {:.3e} V/rtHz", psd.sqrt());
    }
    Ok(())
}
