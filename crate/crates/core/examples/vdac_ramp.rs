//! Ramps the coarse/fine VDAC to a few targets and applies hold droop.

use cryoqc::analog::{apply_droop, vdac_ramp, BiasLimits, LeakageModel, SigmaDeltaSequencer, VdacStage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = SigmaDeltaSequencer::default();
    let limits = BiasLimits::default();
    let leak = LeakageModel::default();
    for target in [0.05, 0.2, 0.3, 0.45] {
        let r = vdac_ramp(VdacStage::default_coarse(), VdacStage::default_fine(), &seq, &limits, target)?;
        println!(
            "target {target:.3} V  final {:.6} V  settle {:>6.2} us  pulses {}+{}  after 600 us hold {:.6} V",
            r.final_v,
            r.settle_time_s * 1e6,
            r.coarse_transfers,
            r.fine_transfers,
            apply_droop(r.final_v, 600e-6, &leak)?
        );
    }
    Ok(())
}
