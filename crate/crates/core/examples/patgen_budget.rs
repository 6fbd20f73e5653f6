//! Assembles the four bundled scripts, prints their memory budgets, and
//! round-trips each image through the decoder.

use cryoqc::patgen::{self, assemble, decode, execute, scripts};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<20} {:>7} {:>6} {:>9}", "script", "vectors", "bits", "ticks");
    for (name, src) in scripts::all() {
        let prog = scripts::load(src)?;
        let img = assemble(&prog)?;
        let back = decode(&img, &prog.node_table)?;
        assert_eq!(back, prog);
        let ticks = execute(&prog, 10_000_000)?.last().map_or(0, |e| e.tick + 1);
        let row = patgen::budget(name, &prog);
        println!("{:<20} {:>7} {:>6} {:>9}", row.name, row.vectors, row.utilization_bits, ticks);
    }
    Ok(())
}
