//! Programs, their Godel numbering, and the assembly text format.
//!
//! A program index is read as a stream of 4-bit nibbles, least significant
//! first; the stream ends when the remaining value is zero. Opcodes 7..15
//! all decode to `Nop`, and the interpreter executes `Nop` for free, so
//! appending a `Nop` nibble yields a larger index for the same staged
//! behaviour (the padding lemma at desk scale).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGISTER_COUNT: usize = 4;
const MAX_NIBBLES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instr {
    /// Increment register.
    Inc(u8),
    /// Decrement register (floored at 0).
    Dec(u8),
    /// Jump to instruction index when register is zero.
    Jz(u8, u8),
    /// Oracle membership query on the value of the first register; the
    /// second register receives 1 (in) or 0 (out).
    Query(u8, u8),
    /// Enumerate the value of the register into the output set.
    Out(u8),
    /// Query the value `n` of the register and enumerate `2n` when the
    /// oracle answers yes, `2n+1` when it answers no (join coding).
    OutJoin(u8),
    Halt,
    Nop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub index: u64,
    pub instrs: Vec<Instr>,
}

impl Program {
    /// Total decoding: every index denotes a program.
    pub fn decode(index: u64) -> Program {
        let mut instrs = Vec::new();
        let mut nibbles = NibbleStream { value: index };
        while let Some(op) = nibbles.next() {
            let instr = match op {
                0 => Instr::Halt,
                1 => Instr::Inc(nibbles.reg()),
                2 => Instr::Dec(nibbles.reg()),
                3 => {
                    let r = nibbles.reg();
                    let t = nibbles.next().unwrap_or(0);
                    Instr::Jz(r, t)
                }
                4 => {
                    let a = nibbles.reg();
                    let b = nibbles.reg();
                    Instr::Query(a, b)
                }
                5 => Instr::Out(nibbles.reg()),
                6 => Instr::OutJoin(nibbles.reg()),
                _ => Instr::Nop,
            };
            instrs.push(instr);
        }
        Program { index, instrs }
    }

    /// Encodes an instruction list; fails when it does not fit in an index.
    pub fn encode(instrs: &[Instr]) -> Result<u64> {
        let mut nibbles: Vec<u8> = Vec::new();
        for instr in instrs {
            match instr {
                Instr::Halt => nibbles.push(0),
                Instr::Inc(r) => nibbles.extend([1, r % 4]),
                Instr::Dec(r) => nibbles.extend([2, r % 4]),
                Instr::Jz(r, t) => nibbles.extend([3, r % 4, t % 16]),
                Instr::Query(a, b) => nibbles.extend([4, a % 4, b % 4]),
                Instr::Out(r) => nibbles.extend([5, r % 4]),
                Instr::OutJoin(r) => nibbles.extend([6, r % 4]),
                Instr::Nop => nibbles.push(7),
            }
        }
        if nibbles.len() as u32 > MAX_NIBBLES {
            return Err(Error::Malformed(format!(
                "program needs {} nibbles, index holds {MAX_NIBBLES}",
                nibbles.len()
            )));
        }
        let mut value: u64 = 0;
        for (i, n) in nibbles.iter().enumerate() {
            value |= (*n as u64) << (4 * i);
        }
        Ok(value)
    }

    pub fn from_instrs(instrs: &[Instr]) -> Result<Program> {
        Ok(Program::decode(Program::encode(instrs)?))
    }

    pub fn parse_asm(lines: &[String]) -> Result<Program> {
        let mut instrs = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap_or("").to_ascii_lowercase();
            let mut reg = || -> Result<u8> {
                let tok = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("missing operand in {line:?}")))?;
                let tok = tok
                    .strip_prefix('r')
                    .ok_or_else(|| Error::Parse(format!("expected register in {line:?}")))?;
                let r: u8 = tok.parse().map_err(|e| Error::Parse(format!("{e}")))?;
                if r as usize >= REGISTER_COUNT {
                    return Err(Error::Parse(format!("register {r} out of range")));
                }
                Ok(r)
            };
            let instr = match op.as_str() {
                "inc" => Instr::Inc(reg()?),
                "dec" => Instr::Dec(reg()?),
                "jz" => {
                    let r = reg()?;
                    let t = parts
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing target in {line:?}")))?
                        .parse()
                        .map_err(|e| Error::Parse(format!("{e}")))?;
                    Instr::Jz(r, t)
                }
                "query" => {
                    let a = reg()?;
                    let b = reg()?;
                    Instr::Query(a, b)
                }
                "out" => Instr::Out(reg()?),
                "outjoin" => Instr::OutJoin(reg()?),
                "halt" => Instr::Halt,
                "nop" => Instr::Nop,
                other => return Err(Error::Parse(format!("unknown opcode {other:?}"))),
            };
            instrs.push(instr);
        }
        Program::from_instrs(&instrs)
    }

    pub fn print_asm(&self) -> Vec<String> {
        self.instrs
            .iter()
            .map(|i| match i {
                Instr::Inc(r) => format!("inc r{r}"),
                Instr::Dec(r) => format!("dec r{r}"),
                Instr::Jz(r, t) => format!("jz r{r} {t}"),
                Instr::Query(a, b) => format!("query r{a} r{b}"),
                Instr::Out(r) => format!("out r{r}"),
                Instr::OutJoin(r) => format!("outjoin r{r}"),
                Instr::Halt => "halt".into(),
                Instr::Nop => "nop".into(),
            })
            .collect()
    }
}

struct NibbleStream {
    value: u64,
}

impl NibbleStream {
    fn next(&mut self) -> Option<u8> {
        if self.value == 0 {
            return None;
        }
        let n = (self.value & 0xf) as u8;
        self.value >>= 4;
        Some(n)
    }

    fn reg(&mut self) -> u8 {
        self.next().unwrap_or(0) % 4
    }
}

fn instr_width(instr: &Instr) -> u32 {
    match instr {
        Instr::Halt | Instr::Nop => 1,
        Instr::Inc(_) | Instr::Dec(_) | Instr::Out(_) | Instr::OutJoin(_) => 2,
        Instr::Jz(..) | Instr::Query(..) => 3,
    }
}

/// Index of the trivially non-halting program `jz r3 0`.
pub fn looper_index() -> u64 {
    Program::encode(&[Instr::Jz(3, 0)]).expect("fits")
}

/// Pads an index with `Nop` nibbles until it is at least `min`, without
/// changing the staged behaviour of the program it denotes.
///
/// The pad goes after all operand nibbles, including implicit trailing
/// zeros, so the existing instructions decode unchanged.
pub fn pad_index_above(index: u64, min: u64) -> Result<u64> {
    let mut padded = index;
    while padded < min {
        let width: u32 = Program::decode(padded)
            .instrs
            .iter()
            .map(instr_width)
            .sum();
        if width >= MAX_NIBBLES {
            return Err(Error::Malformed(format!(
                "cannot pad index {index} up to {min}"
            )));
        }
        padded |= 7u64 << (4 * width);
    }
    Ok(padded)
}
