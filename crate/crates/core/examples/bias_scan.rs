//! Detector mean-voltage heat map over the reservoir/gate bias grid, with
//! bimodal points marked.

use cryoqc::qexp::{bias_scan, BiasScanConfig, HistogramConfig, ReadoutSetup, TunnelingModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BiasScanConfig {
        trials_per_point: 1000,
        ..Default::default()
    };
    let map = bias_scan(&cfg, &TunnelingModel::default(), &ReadoutSetup::default(), &HistogramConfig::default())?;
    print!("V_RD \\ V_RG");
    for v in &cfg.v_rg_grid_v {
        print!("{v:>8.2}");
    }
    println!();
    for (i, v_rd) in cfg.v_rd_grid_v.iter().enumerate() {
        print!("{v_rd:>11.2}");
        for j in 0..map.n_rg {
            let p = map.at(i, j);
            print!("{:>7.0}{}", p.mean_v * 1e3, if p.bimodal { '*' } else { ' ' });
        }
        println!();
    }
    println!("mean output in mV; * marks a bimodal distribution");
    Ok(())
}
