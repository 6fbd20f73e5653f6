//! Johnson-counter phases at 2 GHz and the AND/OR pulse widths for a few
//! select pairs.

use cryoqc::pulsegen::{generate_phases, pulse_select, Combine, PulseSelectConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clk_hz = 2e9;
    let phases = generate_phases(clk_hz, 64.0 / clk_hz)?;
    let first_rise = |name: &str| phases.high_intervals(name)[0].0;
    println!("PH0 -> PH1 offset: {:.0} ps", (first_rise("PH1") - first_rise("PH0")) * 1e12);

    for (s1, s2) in [(0, 1), (0, 4), (3, 11), (5, 15)] {
        let width = |c| -> Result<f64, Box<dyn std::error::Error>> {
            let cfg = PulseSelectConfig::new(s1, s2, c, 0)?;
            let out = pulse_select(&cfg, &phases);
            let (a, b) = out.high_intervals(&cfg.output_name())[0];
            Ok(b - a)
        };
        let (and, or) = (width(Combine::And)?, width(Combine::Or)?);
        println!(
            "PH{s1:<2} PH{s2:<2}  AND {:>5.2} ns  OR {:>5.2} ns  sum {:.2} ns",
            and * 1e9,
            or * 1e9,
            (and + or) * 1e9
        );
    }
    Ok(())
}
