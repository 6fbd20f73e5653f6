//! Tunneling statistics: histogram at the top of the sweep, probability
//! extraction across injector steps, and the trial autocorrelation.

use cryoqc::qexp::{
    autocorrelation, charging_energy, charging_to_thermal_ratio, histogram, linspace, run_trials,
    step_sweep, HistogramConfig, ReadoutSetup, TunnelingModel,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TunnelingModel::default();
    let setup = ReadoutSetup::default();
    let hist = HistogramConfig::default();
    let seed = 2024;

    let r = run_trials(&model, &setup, 78e-3, 10_000, seed)?;
    let h = histogram(&r.series(), &hist)?;
    println!("peaks at {:.3} V and {:.3} V", h.peak0_v, h.peak1_v);
    for (i, c) in h.counts.iter().enumerate().filter(|(_, c)| **c > 0) {
        println!("  {:>+.2} V {:>6}", hist.center_v(i), c);
    }

    println!("step_mV  P_model  P|0>    P|1>");
    for p in step_sweep(&model, &setup, &linspace(33e-3, 78e-3, 10), 10_000, seed, &hist)? {
        println!("{:>6.1}  {:.4}   {:.4}  {:.4}", p.step_v * 1e3, p.p_model, p.p0, p.p1);
    }

    let acf = autocorrelation(&r.series(), 10)?;
    println!("ACF lag 1..10: {:?}", acf[1..].iter().map(|a| (a * 1e3).round() / 1e3).collect::<Vec<_>>());

    let ce = charging_energy(35e-18)?;
    println!(
        "charging energy {:.2} meV, {:.1} kT at 3 K",
        ce.delta_e_ev * 1e3,
        charging_to_thermal_ratio(ce.delta_e_j, 3.0)
    );
    Ok(())
}
