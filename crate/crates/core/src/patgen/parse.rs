//! Line-oriented `.qpat` grammar:
//!
//! ```text
//! line   := [instr] ['#' comment]
//! instr  := ("Set" | "Clr" | "Pulse" | "Amp") [leaf] [nodes] {param}
//!         | "Loop" count target
//! leaf   := digit 0-7 (defaults to 0)
//! nodes  := name {"," name}
//! param  := "amp=" 0-255 | "wait=" 0-3
//! ```
//!
//! Keywords are case-insensitive; node names are matched verbatim. Blank
//! and comment-only lines do not occupy a vector.

use super::{
    Instruction, InstrKind, NodeTable, PatgenError, PatternProgram, LEAF_CELLS, MAX_DELAY_VECTORS,
    MEMORY_DEPTH,
};

struct Token<'a> {
    col: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    col: line[..s].chars().count() + 1,
                    text: &line[s..i],
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            col: line[..s].chars().count() + 1,
            text: &line[s..],
        });
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> PatgenError {
    PatgenError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_script(text: &str, node_table: &NodeTable) -> Result<PatternProgram, PatgenError> {
    let mut program = PatternProgram::new(node_table.clone());
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let code = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(code);
        if tokens.is_empty() {
            continue;
        }
        let vector = program.vectors.len() + 1;
        if vector > MEMORY_DEPTH {
            // keep counting so the error reports the full size
            let rest = text
                .lines()
                .skip(idx)
                .filter(|l| !l.split('#').next().unwrap_or("").trim().is_empty())
                .count();
            return Err(PatgenError::TooManyVectors {
                count: program.vectors.len() + rest,
            });
        }
        let ins = parse_line(line_no, vector, &tokens, node_table)?;
        program.vectors.push(ins);
    }
    Ok(program)
}

fn parse_line(
    line: usize,
    vector: usize,
    tokens: &[Token<'_>],
    nodes: &NodeTable,
) -> Result<Instruction, PatgenError> {
    let head = &tokens[0];
    let split = head
        .text
        .find(|c: char| c.is_ascii_digit())
        .unwrap_or(head.text.len());
    let (word, leaf_str) = head.text.split_at(split);
    let kind = match word.to_ascii_lowercase().as_str() {
        "set" => InstrKind::SetHigh,
        "clr" => InstrKind::SetLow,
        "pulse" => InstrKind::Pulse,
        "amp" => InstrKind::Amplitude,
        "loop" => InstrKind::Loop,
        _ => {
            return Err(PatgenError::UnknownKeyword {
                line,
                column: head.col,
                keyword: head.text.to_string(),
            })
        }
    };

    if kind == InstrKind::Loop {
        if !leaf_str.is_empty() {
            return Err(syntax(line, head.col, "Loop takes no leaf index"));
        }
        if tokens.len() != 3 {
            return Err(syntax(
                line,
                head.col,
                "expected `Loop <count> <target>`",
            ));
        }
        let count: u16 = tokens[1]
            .text
            .parse()
            .map_err(|_| syntax(line, tokens[1].col, "loop count must be 1-65535"))?;
        if count == 0 {
            return Err(syntax(line, tokens[1].col, "loop count must be 1-65535"));
        }
        let target: usize = tokens[2]
            .text
            .parse()
            .map_err(|_| syntax(line, tokens[2].col, "loop target must be a vector number"))?;
        if target == 0 {
            return Err(syntax(line, tokens[2].col, "vector numbers start at 1"));
        }
        if target > vector {
            return Err(PatgenError::LoopTargetBeyond {
                line,
                vector,
                target,
            });
        }
        return Ok(Instruction::looping(count, target as u16));
    }

    let leaf_cell = if leaf_str.is_empty() {
        0
    } else {
        match leaf_str.parse::<u8>() {
            Ok(l) if l < LEAF_CELLS => l,
            _ => {
                return Err(syntax(
                    line,
                    head.col + split,
                    format!("leaf index `{leaf_str}` outside 0-7"),
                ))
            }
        }
    };

    let mut bits: Vec<(u8, String)> = Vec::new();
    let mut amp: Option<u8> = None;
    let mut wait: u8 = 0;
    let mut seen_param = false;
    let mut node_tokens = Vec::new();
    for tok in &tokens[1..] {
        if let Some((key, val)) = tok.text.split_once('=') {
            seen_param = true;
            let vcol = tok.col + key.len() + 1;
            match key.to_ascii_lowercase().as_str() {
                "amp" => {
                    amp = Some(
                        val.parse()
                            .map_err(|_| syntax(line, vcol, "amp must be 0-255"))?,
                    )
                }
                "wait" => {
                    wait = match val.parse::<u8>() {
                        Ok(w) if w <= MAX_DELAY_VECTORS => w,
                        _ => return Err(syntax(line, vcol, "wait must be 0-3")),
                    }
                }
                _ => return Err(syntax(line, tok.col, format!("unknown parameter `{key}`"))),
            }
            continue;
        }
        if seen_param {
            return Err(syntax(line, tok.col, "node names must precede parameters"));
        }
        node_tokens.push(tok);
    }
    let mut expect_name = true;
    for tok in node_tokens {
        let mut col = tok.col;
        for (k, name) in tok.text.split(',').enumerate() {
            if k > 0 {
                if expect_name {
                    return Err(syntax(line, col - 1, "empty node name"));
                }
                expect_name = true;
            }
            if !name.is_empty() {
                if !expect_name {
                    return Err(syntax(line, col, "expected `,` between node names"));
                }
                let bit = nodes.bit(name).ok_or_else(|| PatgenError::UnknownNode {
                    line,
                    column: col,
                    name: name.to_string(),
                })?;
                if bits.iter().any(|(b, _)| *b == bit) {
                    return Err(syntax(line, col, format!("node `{name}` listed twice")));
                }
                bits.push((bit, name.to_string()));
                expect_name = false;
            }
            col += name.chars().count() + 1;
        }
    }
    if expect_name && !bits.is_empty() {
        return Err(syntax(line, head.col, "trailing `,` in node list"));
    }

    match kind {
        InstrKind::SetHigh | InstrKind::SetLow | InstrKind::Pulse if bits.is_empty() => {
            return Err(syntax(line, head.col, format!("{} needs at least one node", word)));
        }
        InstrKind::Amplitude if amp.is_none() => {
            return Err(syntax(line, head.col, "Amp needs amp=<code>"));
        }
        _ => {}
    }

    bits.sort_by_key(|(b, _)| *b);
    Ok(Instruction {
        kind,
        leaf_cell,
        targets: bits.into_iter().map(|(_, n)| n).collect(),
        amplitude_code: amp.unwrap_or(0),
        loop_count: 0,
        loop_target: 0,
        delay_vectors: wait,
    })
}
