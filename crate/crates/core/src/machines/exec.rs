//! The interpreter: staged runs with step budgets and cycle detection.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

use super::oracle::{Answer, OracleHandle};
use super::program::{Instr, Program, REGISTER_COUNT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    /// Reached the end of the program or an explicit halt.
    Halted { steps: u64 },
    /// A machine configuration repeated; the program never halts.
    Cycled { steps: u64 },
    /// Step budget exhausted with the run still live.
    OutOfFuel,
    /// The oracle had no answer for the queried value.
    OracleUndefined { query: u64 },
    /// The oracle answer exists only beyond the current certificates.
    OracleUnknown { query: u64 },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub outputs: BTreeSet<u64>,
    /// (step, value) pairs in emission order.
    pub output_log: Vec<(u64, u64)>,
    pub steps: u64,
    /// Largest value queried, when any query happened.
    pub max_query: Option<u64>,
}

impl RunOutcome {
    pub fn halted(&self) -> bool {
        matches!(self.status, RunStatus::Halted { .. })
    }

    /// The run is complete: its output set will never grow.
    pub fn complete(&self) -> bool {
        matches!(
            self.status,
            RunStatus::Halted { .. } | RunStatus::Cycled { .. }
        )
    }
}

/// Runs a program against an oracle view for at most `fuel` steps.
///
/// `Nop` costs nothing; every other instruction costs one step. Cycle
/// detection fires when a (pc, registers) configuration repeats, which is
/// sound because oracle answers are fixed during a run.
pub fn run_program(
    program: &Program,
    mut query: impl FnMut(u64) -> Answer,
    fuel: u64,
) -> RunOutcome {
    let mut regs = [0u64; REGISTER_COUNT];
    let mut pc: usize = 0;
    let mut steps: u64 = 0;
    let mut outputs = BTreeSet::new();
    let mut output_log = Vec::new();
    let mut max_query = None;
    let mut seen: HashSet<(usize, [u64; REGISTER_COUNT])> = HashSet::new();
    let len = program.instrs.len();

    loop {
        while pc < len && matches!(program.instrs[pc], Instr::Nop) {
            pc += 1;
        }
        if pc >= len {
            return RunOutcome {
                status: RunStatus::Halted { steps },
                outputs,
                output_log,
                steps,
                max_query,
            };
        }
        if steps >= fuel {
            return RunOutcome {
                status: RunStatus::OutOfFuel,
                outputs,
                output_log,
                steps,
                max_query,
            };
        }
        if !seen.insert((pc, regs)) {
            return RunOutcome {
                status: RunStatus::Cycled { steps },
                outputs,
                output_log,
                steps,
                max_query,
            };
        }
        let instr = program.instrs[pc];
        steps += 1;
        pc += 1;
        match instr {
            Instr::Nop => unreachable!("nops are skipped"),
            Instr::Halt => {
                return RunOutcome {
                    status: RunStatus::Halted { steps },
                    outputs,
                    output_log,
                    steps,
                    max_query,
                }
            }
            Instr::Inc(r) => regs[r as usize] += 1,
            Instr::Dec(r) => regs[r as usize] = regs[r as usize].saturating_sub(1),
            Instr::Jz(r, t) => {
                if regs[r as usize] == 0 {
                    pc = (t as usize).min(len);
                }
            }
            Instr::Out(r) => {
                let v = regs[r as usize];
                if outputs.insert(v) {
                    output_log.push((steps, v));
                }
            }
            Instr::Query(a, b) => {
                let v = regs[a as usize];
                max_query = Some(max_query.map_or(v, |m: u64| m.max(v)));
                match query(v) {
                    Answer::Yes => regs[b as usize] = 1,
                    Answer::No => regs[b as usize] = 0,
                    Answer::Undefined => {
                        return RunOutcome {
                            status: RunStatus::OracleUndefined { query: v },
                            outputs,
                            output_log,
                            steps,
                            max_query,
                        }
                    }
                    Answer::Unknown => {
                        return RunOutcome {
                            status: RunStatus::OracleUnknown { query: v },
                            outputs,
                            output_log,
                            steps,
                            max_query,
                        }
                    }
                }
            }
            Instr::OutJoin(r) => {
                let v = regs[r as usize];
                max_query = Some(max_query.map_or(v, |m: u64| m.max(v)));
                let coded = match query(v) {
                    Answer::Yes => 2 * v,
                    Answer::No => 2 * v + 1,
                    Answer::Undefined => {
                        return RunOutcome {
                            status: RunStatus::OracleUndefined { query: v },
                            outputs,
                            output_log,
                            steps,
                            max_query,
                        }
                    }
                    Answer::Unknown => {
                        return RunOutcome {
                            status: RunStatus::OracleUnknown { query: v },
                            outputs,
                            output_log,
                            steps,
                            max_query,
                        }
                    }
                };
                if outputs.insert(coded) {
                    output_log.push((steps, coded));
                }
            }
        }
    }
}

/// `W_e^X[stage]`: the staged c.e. set of program `e` against the oracle.
pub fn run_staged(e: u64, oracle: &OracleHandle, stage: u64) -> Result<BTreeSet<u64>> {
    let program = Program::decode(e);
    let outcome = run_program(&program, |q| oracle.member(q, stage), stage);
    match outcome.status {
        RunStatus::OracleUndefined { query } => Err(Error::OracleUndefined(query)),
        RunStatus::OracleUnknown { query } => Err(Error::Uncertified(format!(
            "oracle answer for {query} not certified at stage {stage}"
        ))),
        _ => Ok(outcome.outputs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::program::looper_index;

    fn asm(lines: &[&str]) -> Program {
        Program::parse_asm(&lines.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn enumerate_nothing() {
        let oracle = OracleHandle::empty();
        assert!(run_staged(0, &oracle, 100).unwrap().is_empty());
    }

    #[test]
    fn enumerate_all_below_counter() {
        // out r0; inc r0; jz r3 0  -- emits 0,1,2,... forever
        let p = asm(&["out r0", "inc r0", "jz r3 0"]);
        let oracle = OracleHandle::empty();
        let got = run_staged(p.index, &oracle, 50).unwrap();
        assert!(!got.is_empty());
        let k = *got.iter().max().unwrap();
        let expect: BTreeSet<u64> = (0..=k).collect();
        assert_eq!(got, expect);
        // Monotone in the stage.
        let later = run_staged(p.index, &oracle, 51).unwrap();
        assert!(got.is_subset(&later));
    }

    #[test]
    fn membership_echo() {
        // query r0 r1; jz r1 3; out r0; inc r0; jz r3 0 -- emits n iff n in X
        let p = asm(&["query r0 r1", "jz r1 3", "out r0", "inc r0", "jz r3 0"]);
        let oracle = OracleHandle::finite([2], false);
        let got = run_staged(p.index, &oracle, 200).unwrap();
        assert_eq!(got, [2u64].into_iter().collect());
    }

    #[test]
    fn looper_cycles() {
        let p = Program::decode(looper_index());
        let out = run_program(&p, |_| Answer::No, 100);
        assert!(matches!(out.status, RunStatus::Cycled { .. }));
    }

    #[test]
    fn undefined_oracle_is_an_error() {
        let p = asm(&["query r0 r1"]);
        let oracle = OracleHandle::lazy("partial", |n| if n == 0 { None } else { Some(false) });
        assert!(matches!(
            run_staged(p.index, &oracle, 10),
            Err(Error::OracleUndefined(0))
        ));
    }
}
