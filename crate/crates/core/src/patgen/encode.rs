use serde::{Deserialize, Serialize};

use super::{
    validate, InstrKind, Instruction, NodeTable, PatgenError, PatternProgram, CTRL_LINES,
    MEMORY_DEPTH, WORD_BITS,
};

const CTRL_MASK: u64 = (1 << 48) - 1;
const AMP_SHIFT: u32 = 48;
const LEAF_SHIFT: u32 = 56;
const KIND_SHIFT: u32 = 59;
const DELAY_SHIFT: u32 = 62;
const LOOP_TARGET_SHIFT: u32 = 16;

/// Raw size of a memory image file in bytes.
pub const IMAGE_BYTES: usize = MEMORY_DEPTH * WORD_BITS / 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryImage {
    pub words: Vec<u64>,
    pub used_vectors: usize,
}

impl MemoryImage {
    pub fn utilization_bits(&self) -> usize {
        self.used_vectors * WORD_BITS
    }

    /// Little-endian 4096-byte dump.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Parses a raw dump. Used vectors are the leading nonzero words; a
    /// nonzero word after the first zero word is rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PatgenError> {
        if bytes.len() != IMAGE_BYTES {
            return Err(PatgenError::Image(format!(
                "expected {IMAGE_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let used_vectors = words.iter().take_while(|&&w| w != 0).count();
        if let Some(pos) = words[used_vectors..].iter().position(|&w| w != 0) {
            return Err(PatgenError::Image(format!(
                "word {} is nonzero after unused word {}",
                used_vectors + pos,
                used_vectors
            )));
        }
        Ok(Self {
            words,
            used_vectors,
        })
    }
}

pub(crate) fn encode_word(ins: &Instruction, nodes: &NodeTable) -> u64 {
    let mut w = (ins.delay_vectors as u64) << DELAY_SHIFT
        | ins.kind.code() << KIND_SHIFT
        | (ins.leaf_cell as u64) << LEAF_SHIFT
        | (ins.amplitude_code as u64) << AMP_SHIFT;
    if ins.kind == InstrKind::Loop {
        w |= ins.loop_count as u64 | (ins.loop_target as u64) << LOOP_TARGET_SHIFT;
    } else {
        for t in &ins.targets {
            let bit = nodes.bit(t).expect("validated program");
            w |= 1 << bit;
        }
    }
    w
}

fn decode_word(index: usize, w: u64, nodes: &NodeTable) -> Result<Instruction, PatgenError> {
    let bad = |message: String| PatgenError::InvalidInstruction {
        vector: index + 1,
        message,
    };
    let kind = InstrKind::from_code((w >> KIND_SHIFT) & 0b111)
        .ok_or_else(|| bad(format!("unknown kind code in word {w:#018x}")))?;
    let mut ins = Instruction {
        kind,
        leaf_cell: ((w >> LEAF_SHIFT) & 0b111) as u8,
        targets: Vec::new(),
        amplitude_code: ((w >> AMP_SHIFT) & 0xff) as u8,
        loop_count: 0,
        loop_target: 0,
        delay_vectors: (w >> DELAY_SHIFT) as u8,
    };
    let ctrl = w & CTRL_MASK;
    if kind == InstrKind::Loop {
        ins.loop_count = (ctrl & 0xffff) as u16;
        ins.loop_target = ((ctrl >> LOOP_TARGET_SHIFT) & 0x3ff) as u16;
        if ctrl >> 26 != 0 {
            return Err(bad("stray bits in loop vector".into()));
        }
    } else {
        for bit in 0..CTRL_LINES {
            if ctrl >> bit & 1 == 1 {
                let name = nodes
                    .name(bit)
                    .ok_or_else(|| bad(format!("control bit {bit} has no node")))?;
                ins.targets.push(name.to_string());
            }
        }
    }
    Ok(ins)
}

/// Encodes a program into the 512-word pattern memory.
pub fn assemble(program: &PatternProgram) -> Result<MemoryImage, PatgenError> {
    validate(program)?;
    let mut words = vec![0u64; MEMORY_DEPTH];
    for (slot, ins) in words.iter_mut().zip(&program.vectors) {
        *slot = encode_word(ins, &program.node_table);
    }
    Ok(MemoryImage {
        words,
        used_vectors: program.vectors.len(),
    })
}

/// Inverse of [`assemble`] for a given node table.
pub fn decode(image: &MemoryImage, node_table: &NodeTable) -> Result<PatternProgram, PatgenError> {
    if image.words.len() != MEMORY_DEPTH || image.used_vectors > MEMORY_DEPTH {
        return Err(PatgenError::Image("image must hold 512 words".into()));
    }
    let vectors = image.words[..image.used_vectors]
        .iter()
        .enumerate()
        .map(|(i, &w)| decode_word(i, w, node_table))
        .collect::<Result<Vec<_>, _>>()?;
    let program = PatternProgram {
        vectors,
        node_table: node_table.clone(),
    };
    validate(&program)?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patgen::parse_script;

    #[test]
    fn word_layout() {
        let nodes = NodeTable::default();
        let p = parse_script("Pulse5 IU1,DET7_S1 amp=171 wait=2\nLoop 1000 1\n", &nodes).unwrap();
        let img = assemble(&p).unwrap();
        let w = img.words[0];
        assert_eq!(w & CTRL_MASK, 1 | 1 << 47);
        assert_eq!((w >> 48) & 0xff, 171);
        assert_eq!((w >> 56) & 0b111, 5);
        assert_eq!((w >> 59) & 0b111, 3);
        assert_eq!(w >> 62, 2);
        let lw = img.words[1];
        assert_eq!(lw & 0xffff, 1000);
        assert_eq!((lw >> 16) & 0x3ff, 1);
        assert!(img.words[2..].iter().all(|&w| w == 0));
        assert_eq!(img.utilization_bits(), 128);
    }

    #[test]
    fn bytes_round_trip_and_reject_holes() {
        let nodes = NodeTable::default();
        let p = parse_script("Set0 IU3\nClr0 IU3\n", &nodes).unwrap();
        let img = assemble(&p).unwrap();
        let bytes = img.to_bytes();
        assert_eq!(bytes.len(), IMAGE_BYTES);
        assert_eq!(MemoryImage::from_bytes(&bytes).unwrap(), img);

        let mut holey = bytes.clone();
        holey[8 * 10] = 1;
        assert!(MemoryImage::from_bytes(&holey).is_err());
        assert!(MemoryImage::from_bytes(&bytes[..100]).is_err());
    }

    #[test]
    fn decode_rejects_garbage_kind() {
        let nodes = NodeTable::default();
        let mut img = MemoryImage {
            words: vec![0; MEMORY_DEPTH],
            used_vectors: 1,
        };
        img.words[0] = 7 << KIND_SHIFT;
        assert!(decode(&img, &nodes).is_err());
    }

    #[test]
    fn capacity_512_ok_513_fails() {
        let nodes = NodeTable::default();
        let mut p = PatternProgram::new(nodes.clone());
        let one = parse_script("Set0 IU1", &nodes).unwrap().vectors.remove(0);
        p.vectors = vec![one; MEMORY_DEPTH];
        assert_eq!(assemble(&p).unwrap().utilization_bits(), 32 * 1024);
        p.vectors.push(p.vectors[0].clone());
        assert!(matches!(
            assemble(&p),
            Err(PatgenError::TooManyVectors { count: 513 })
        ));
    }
}
