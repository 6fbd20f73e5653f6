use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::encode::encode_word;
use super::{check_nesting, validate, InstrKind, PatgenError, PatternProgram};

/// One decoded vector as it leaves the pattern generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlEvent {
    /// CKDIV cycle index.
    pub tick: u64,
    /// Bits 63..48 of the vector (amplitude word plus opcode bits).
    pub data_bus: u16,
    /// Bits 47..0 of the vector.
    pub ctrl_bus: u64,
}

/// Runs the vector stream and returns one event per issued non-loop vector.
///
/// Timing rules:
/// - each non-loop vector takes one CKDIV tick plus `delay_vectors` idle ticks;
/// - a Loop vector takes one tick when its counter is armed (first arrival),
///   and rewinds to its target without further cost until the counter is
///   spent, after which execution falls through;
/// - `Loop n t` executes vectors `t..loop` exactly `n` times in total.
///
/// Fails once the total tick count would exceed `max_ticks`.
pub fn execute(program: &PatternProgram, max_ticks: u64) -> Result<Vec<ControlEvent>, PatgenError> {
    validate(program)?;
    check_nesting(program)?;
    let words: Vec<u64> = program
        .vectors
        .iter()
        .map(|v| encode_word(v, &program.node_table))
        .collect();

    let mut events = Vec::new();
    // rewinds still owed by each armed loop, keyed by loop vector index
    let mut armed: HashMap<usize, u32> = HashMap::new();
    let mut tick: u64 = 0;
    let mut pc = 0usize;
    let spend = |tick: &mut u64, n: u64| -> Result<(), PatgenError> {
        *tick += n;
        if *tick > max_ticks {
            Err(PatgenError::TickBudgetExceeded { max_ticks })
        } else {
            Ok(())
        }
    };

    while pc < program.vectors.len() {
        let ins = &program.vectors[pc];
        if ins.kind == InstrKind::Loop {
            let target = ins.loop_target as usize - 1;
            match armed.get_mut(&pc) {
                None => {
                    spend(&mut tick, 1)?;
                    if ins.loop_count > 1 {
                        armed.insert(pc, ins.loop_count as u32 - 2);
                        pc = target;
                    } else {
                        pc += 1;
                    }
                }
                Some(rem) if *rem > 0 => {
                    *rem -= 1;
                    pc = target;
                }
                Some(_) => {
                    armed.remove(&pc);
                    pc += 1;
                }
            }
            continue;
        }
        let w = words[pc];
        if tick >= max_ticks {
            return Err(PatgenError::TickBudgetExceeded { max_ticks });
        }
        events.push(ControlEvent {
            tick,
            data_bus: (w >> 48) as u16,
            ctrl_bus: w & ((1 << 48) - 1),
        });
        spend(&mut tick, 1 + ins.delay_vectors as u64)?;
        pc += 1;
    }
    Ok(events)
}
