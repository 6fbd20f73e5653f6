//! The four bundled experiment scripts.

use super::{parse_script, NodeTable, PatgenError, PatternProgram};

pub const SCRIPT_1: &str = include_str!("../../scripts/script1_pulse_x.qpat");
pub const SCRIPT_2: &str = include_str!("../../scripts/script2_parallel.qpat");
pub const SCRIPT_3: &str = include_str!("../../scripts/script3_compact.qpat");
pub const SCRIPT_4: &str = include_str!("../../scripts/script4_resonant.qpat");

/// `(name, source)` for each bundled script, in order.
pub fn all() -> [(&'static str, &'static str); 4] {
    [
        ("script1_pulse_x", SCRIPT_1),
        ("script2_parallel", SCRIPT_2),
        ("script3_compact", SCRIPT_3),
        ("script4_resonant", SCRIPT_4),
    ]
}

pub fn load(src: &str) -> Result<PatternProgram, PatgenError> {
    parse_script(src, &NodeTable::default())
}
