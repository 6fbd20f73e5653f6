//! Cold-stage heat load for the base system and its scaling.

use cryoqc::thermal::{scaling_study, ConductivityTable, ThermalScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = ConductivityTable::default();
    let sc = ThermalScenario::default();
    let r = sc.report(&table)?;
    println!("flex passive  {:>7.2} mW", r.flex_passive_w * 1e3);
    println!("coax passive  {:>7.2} mW", r.coax_passive_w * 1e3);
    println!("coax RF       {:>7.3} mW", r.rf_w * 1e3);
    println!("active        {:>7.2} mW", r.active_w * 1e3);
    println!("total         {:>7.2} mW ({:.2}% of budget)", r.total_w * 1e3, r.fraction_of_budget * 100.0);

    for p in scaling_study(&sc, &table, &[1.0, 2.0, 5.0, 10.0])? {
        println!(
            "x{:<4} detectors {:>4}  wires {:>4}  total {:>7.1} mW",
            p.multiplier,
            p.detectors,
            p.n_wires,
            p.report.total_w * 1e3
        );
    }
    let mut on_chip = sc.clone();
    on_chip.scaling.on_chip_adc = true;
    let p = &scaling_study(&on_chip, &table, &[10.0])?[0];
    println!("x10 with on-chip ADC: {} signal wires, {:.1} mW", p.signal_wires, p.report.total_w * 1e3);
    Ok(())
}
