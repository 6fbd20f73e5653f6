//! Pattern generator: `.qpat` script parsing, 512 x 64-bit memory image
//! assembly, and vector-stream execution on the divided clock.
//!
//! Word layout (bit 63 is the MSB):
//!
//! ```text
//!  63..62  61..59  58..56  55..48     47..0
//!  delay   kind    leaf    amplitude  control lines (node_table bits)
//! ```
//!
//! Bits 63..48 form the 16-bit data bus, bits 47..0 the control bus. Loop
//! vectors carry no control lines; their count sits in bits 15..0 and their
//! 1-based target vector in bits 25..16.

mod encode;
mod exec;
mod nodes;
mod parse;
pub mod scripts;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encode::{assemble, decode, MemoryImage};
pub use exec::{execute, ControlEvent};
pub use nodes::NodeTable;
pub use parse::parse_script;

/// Pattern memory depth in vectors.
pub const MEMORY_DEPTH: usize = 512;
/// Bits per vector.
pub const WORD_BITS: usize = 64;
/// Number of control lines on the 48-bit control bus.
pub const CTRL_LINES: u8 = 48;
/// Number of pulse-select leaf cells.
pub const LEAF_CELLS: u8 = 8;
/// Largest encodable per-vector idle delay.
pub const MAX_DELAY_VECTORS: u8 = 3;
/// Largest supported loop nesting depth.
pub const MAX_LOOP_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstrKind {
    SetHigh,
    SetLow,
    Pulse,
    Amplitude,
    Loop,
}

impl InstrKind {
    pub(crate) fn code(self) -> u64 {
        match self {
            InstrKind::SetHigh => 1,
            InstrKind::SetLow => 2,
            InstrKind::Pulse => 3,
            InstrKind::Amplitude => 4,
            InstrKind::Loop => 5,
        }
    }

    pub(crate) fn from_code(code: u64) -> Option<Self> {
        Some(match code {
            1 => InstrKind::SetHigh,
            2 => InstrKind::SetLow,
            3 => InstrKind::Pulse,
            4 => InstrKind::Amplitude,
            5 => InstrKind::Loop,
            _ => return None,
        })
    }

    /// Script keyword for this kind.
    pub fn keyword(self) -> &'static str {
        match self {
            InstrKind::SetHigh => "Set",
            InstrKind::SetLow => "Clr",
            InstrKind::Pulse => "Pulse",
            InstrKind::Amplitude => "Amp",
            InstrKind::Loop => "Loop",
        }
    }
}

/// One pattern vector.
///
/// `loop_count` and `loop_target` are meaningful only for [`InstrKind::Loop`]
/// and are zero otherwise. `targets` is kept in control-bit order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub kind: InstrKind,
    pub leaf_cell: u8,
    pub targets: Vec<String>,
    pub amplitude_code: u8,
    pub loop_count: u16,
    pub loop_target: u16,
    pub delay_vectors: u8,
}

impl Instruction {
    pub fn looping(count: u16, target: u16) -> Self {
        Self {
            kind: InstrKind::Loop,
            leaf_cell: 0,
            targets: Vec::new(),
            amplitude_code: 0,
            loop_count: count,
            loop_target: target,
            delay_vectors: 0,
        }
    }

    /// Renders the instruction back into script syntax.
    pub fn to_script_line(&self) -> String {
        if self.kind == InstrKind::Loop {
            return format!("Loop {} {}", self.loop_count, self.loop_target);
        }
        let mut s = format!("{}{}", self.kind.keyword(), self.leaf_cell);
        if !self.targets.is_empty() {
            s.push(' ');
            s.push_str(&self.targets.join(","));
        }
        if self.kind == InstrKind::Amplitude || self.amplitude_code != 0 {
            s.push_str(&format!(" amp={}", self.amplitude_code));
        }
        if self.delay_vectors != 0 {
            s.push_str(&format!(" wait={}", self.delay_vectors));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternProgram {
    pub vectors: Vec<Instruction>,
    pub node_table: NodeTable,
}

impl PatternProgram {
    pub fn new(node_table: NodeTable) -> Self {
        Self {
            vectors: Vec::new(),
            node_table,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Memory footprint in bits; always `64 * vectors`.
    pub fn utilization_bits(&self) -> usize {
        self.vectors.len() * WORD_BITS
    }

    /// Renders the whole program as a script.
    pub fn to_script(&self) -> String {
        let mut out = String::new();
        for v in &self.vectors {
            out.push_str(&v.to_script_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatgenError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown instruction `{keyword}`")]
    UnknownKeyword {
        line: usize,
        column: usize,
        keyword: String,
    },
    #[error("line {line}, column {column}: unknown node `{name}`")]
    UnknownNode {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("program has {count} vectors; pattern memory holds {MEMORY_DEPTH}")]
    TooManyVectors { count: usize },
    #[error("line {line}: loop target {target} is beyond vector {vector}")]
    LoopTargetBeyond {
        line: usize,
        vector: usize,
        target: usize,
    },
    #[error("tick budget of {max_ticks} exceeded")]
    TickBudgetExceeded { max_ticks: u64 },
    #[error("loop at vector {inner} (target {inner_target}) crosses the body of loop at vector {outer} (target {outer_target})")]
    MalformedNesting {
        inner: usize,
        inner_target: usize,
        outer: usize,
        outer_target: usize,
    },
    #[error("loop at vector {vector} nested {depth} deep; at most {MAX_LOOP_DEPTH} supported")]
    NestingTooDeep { vector: usize, depth: usize },
    #[error("invalid instruction at vector {vector}: {message}")]
    InvalidInstruction { vector: usize, message: String },
    #[error("memory image: {0}")]
    Image(String),
    #[error("node table: {0}")]
    NodeTable(String),
}

/// Summary row for one script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub name: String,
    pub vectors: usize,
    pub utilization_bits: usize,
    pub capacity_bits: usize,
}

pub fn budget(name: &str, program: &PatternProgram) -> BudgetRow {
    BudgetRow {
        name: name.to_string(),
        vectors: program.len(),
        utilization_bits: program.utilization_bits(),
        capacity_bits: MEMORY_DEPTH * WORD_BITS,
    }
}

/// Checks structural invariants that parsing alone cannot guarantee
/// (useful for programs built in code).
pub fn validate(program: &PatternProgram) -> Result<(), PatgenError> {
    if program.vectors.len() > MEMORY_DEPTH {
        return Err(PatgenError::TooManyVectors {
            count: program.vectors.len(),
        });
    }
    for (i, ins) in program.vectors.iter().enumerate() {
        let vector = i + 1;
        let bad = |message: &str| PatgenError::InvalidInstruction {
            vector,
            message: message.to_string(),
        };
        if ins.leaf_cell >= LEAF_CELLS {
            return Err(bad("leaf cell out of range 0-7"));
        }
        if ins.delay_vectors > MAX_DELAY_VECTORS {
            return Err(bad("delay out of range 0-3"));
        }
        match ins.kind {
            InstrKind::Loop => {
                if ins.loop_count == 0 {
                    return Err(bad("loop count must be at least 1"));
                }
                if ins.loop_target == 0 || ins.loop_target as usize > vector {
                    return Err(PatgenError::LoopTargetBeyond {
                        line: vector,
                        vector,
                        target: ins.loop_target as usize,
                    });
                }
                if !ins.targets.is_empty() || ins.amplitude_code != 0 || ins.delay_vectors != 0 {
                    return Err(bad("loop vectors take no nodes or parameters"));
                }
            }
            InstrKind::SetHigh | InstrKind::SetLow | InstrKind::Pulse if ins.targets.is_empty() => {
                return Err(bad("set/clear/pulse vectors need at least one node"));
            }
            _ => {
                if ins.loop_count != 0 || ins.loop_target != 0 {
                    return Err(bad("loop fields set on a non-loop vector"));
                }
            }
        }
        for t in &ins.targets {
            if program.node_table.bit(t).is_none() {
                return Err(PatgenError::UnknownNode {
                    line: vector,
                    column: 0,
                    name: t.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Loop structure: `(loop vector index, 0-based body start)`, both 0-based.
pub(crate) fn loops(program: &PatternProgram) -> Vec<(usize, usize)> {
    program
        .vectors
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == InstrKind::Loop)
        .map(|(i, v)| (i, v.loop_target as usize - 1))
        .collect()
}

/// Verifies loops are properly nested and at most [`MAX_LOOP_DEPTH`] deep.
pub fn check_nesting(program: &PatternProgram) -> Result<(), PatgenError> {
    let ls = loops(program);
    for &(i, si) in &ls {
        let mut d = 1;
        for &(j, sj) in &ls {
            if j <= i {
                continue;
            }
            // loop j's body [sj, j) contains loop vector i
            if sj <= i {
                if si < sj {
                    return Err(PatgenError::MalformedNesting {
                        inner: i + 1,
                        inner_target: si + 1,
                        outer: j + 1,
                        outer_target: sj + 1,
                    });
                }
                d += 1;
            }
        }
        if d > MAX_LOOP_DEPTH {
            return Err(PatgenError::NestingTooDeep {
                vector: i + 1,
                depth: d,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(lines: &str) -> PatternProgram {
        parse_script(lines, &NodeTable::default()).unwrap()
    }

    #[test]
    fn crossing_loops_rejected() {
        let p = prog("Set0 IU1\nSet0 IU2\nSet0 IU3\nLoop 2 1\nSet0 IU4\nLoop 2 2\n");
        assert!(matches!(
            check_nesting(&p),
            Err(PatgenError::MalformedNesting { inner: 4, outer: 6, .. })
        ));
    }

    #[test]
    fn depth_five_rejected() {
        let p = prog("Set0 IU1\nLoop 2 1\nLoop 2 1\nLoop 2 1\nLoop 2 1\nLoop 2 1\n");
        assert!(matches!(
            check_nesting(&p),
            Err(PatgenError::NestingTooDeep { depth: 5, .. })
        ));
        let p = prog("Set0 IU1\nLoop 2 1\nLoop 2 1\nLoop 2 1\nLoop 2 1\n");
        assert!(check_nesting(&p).is_ok());
    }

    #[test]
    fn script_line_round_trip() {
        let p = prog("Pulse3 IU2,IU1 amp=7 wait=2\nAmp0 amp=200\nLoop 5 1\n");
        let again = prog(&p.to_script());
        assert_eq!(p, again);
    }

    #[test]
    fn validate_catches_hand_built_errors() {
        let mut p = PatternProgram::new(NodeTable::default());
        p.vectors.push(Instruction::looping(0, 1));
        assert!(validate(&p).is_err());
        p.vectors[0] = Instruction::looping(3, 2);
        assert!(matches!(validate(&p), Err(PatgenError::LoopTargetBeyond { .. })));
    }
}
