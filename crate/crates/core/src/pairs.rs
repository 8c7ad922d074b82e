//! Discerning pairs of trees: the two-tree structures whose identification
//! takes a fixed number of jumps, the staged witness function feeding the
//! coded trees, the jump-guided classifier, hardness reductions, and the
//! truth-table selection step.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machines::{pad_index_above, Instr, JumpLab, OracleHandle, Program, Verdict};
use crate::measure::{BitStr, ClopenSet};
use crate::ordinals::OrdinalNotation;
use crate::trees::{
    coded_tree, desc_seq_tree, fatten, rank_verdict, ExitStatus, Rank, RankVerdict, SymbolicTree,
    WitnessProvider,
};

/// Evaluation context over a jump lab: answers the calculus' jump and
/// witness questions with certificates, and records which snapshot levels
/// have been certified for classifier use.
pub struct SuiteCtx {
    lab: JumpLab,
    budget: u64,
    certified_levels: Vec<u32>,
}

impl SuiteCtx {
    pub fn over_empty(budget: u64) -> SuiteCtx {
        SuiteCtx {
            lab: JumpLab::empty_base(4),
            budget,
            certified_levels: Vec::new(),
        }
    }

    pub fn over(base: OracleHandle, budget: u64) -> SuiteCtx {
        SuiteCtx {
            lab: JumpLab::new(base, 4),
            budget,
            certified_levels: Vec::new(),
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Certifies a snapshot level by actually deciding every index below
    /// the bound; the classifier refuses to run on uncertified levels.
    pub fn certify_level(&mut self, level: u32, index_bound: u64) -> Result<()> {
        self.lab.certified_snapshot(level, index_bound, self.budget)?;
        if !self.certified_levels.contains(&level) {
            self.certified_levels.push(level);
        }
        Ok(())
    }

    pub fn is_certified(&self, level: u32) -> bool {
        self.certified_levels.contains(&level)
    }

    pub fn decide(&self, level: u32, m: u64, budget: u64) -> (Verdict, u64) {
        self.lab.decide(level, m, budget)
    }
}

/// Exit lag of the witness function: unbounded but slowly growing, so the
/// staged trees built on late exits stay within expandable windows.
pub fn exit_lag(m: u64) -> u64 {
    (m + 2).ilog2() as u64 + 2
}

impl WitnessProvider for SuiteCtx {
    fn jump_status(&self, level: u64, m: u64, budget: u64) -> (Verdict, u64) {
        self.lab
            .decide(level as u32, m, budget.min(self.budget))
    }

    fn witness_value(&self, level: u64, m: u64, stage: u64) -> u64 {
        let exited = match self.witness_exit(level, m, self.budget) {
            ExitStatus::Exited { at, .. } => stage >= at,
            _ => false,
        };
        let base = if exited {
            crate::machines::looper_index()
        } else {
            0
        };
        pad_index_above(base, stage).expect("witness pad fits")
    }

    fn witness_exit(&self, level: u64, m: u64, budget: u64) -> ExitStatus {
        let (verdict, discovered) = self.lab.decide(level as u32, m, budget.min(self.budget));
        match verdict {
            Verdict::In => ExitStatus::Exited {
                at: discovered.max(m + exit_lag(m)),
                decided_at: discovered,
            },
            Verdict::Out => ExitStatus::NeverCertified,
            Verdict::Unknown => ExitStatus::Unknown,
        }
    }

    fn budget(&self) -> u64 {
        self.budget
    }
}

/// A labelled pair of trees: the universe is the disjoint union and a unary
/// predicate carves out the left component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePair {
    pub left: SymbolicTree,
    pub right: SymbolicTree,
}

/// The discerning pair at a level: bit 0 puts the lower-rank tree on the
/// left, bit 1 swaps the components.
pub fn pair_structure(alpha: &OrdinalNotation, bit: u8) -> Result<TreePair> {
    if alpha.is_zero() {
        return Err(Error::OrdinalRange("pair level must be positive".into()));
    }
    let low = alpha.mul_left_omega();
    let high = low.succ();
    let t_low = fatten(desc_seq_tree(low));
    let t_high = fatten(desc_seq_tree(high));
    Ok(match bit {
        0 => TreePair {
            left: t_low,
            right: t_high,
        },
        _ => TreePair {
            left: t_high,
            right: t_low,
        },
    })
}

/// The ill-founded marker pair; both components are the fat ill-founded
/// tree, whichever bit is asked for.
pub fn marker_pair() -> TreePair {
    TreePair {
        left: SymbolicTree::IllFounded,
        right: SymbolicTree::IllFounded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Zero,
    One,
    Unknown,
}

/// Jump-guided classification of a pair presentation at a level.
///
/// Runs the race over stages: a component is detected as soon as its
/// certified rank exceeds `w * alpha`; the first detection decides, ties
/// resolved left-before-right. Budget exhaustion without a detection is
/// `Unknown`. Requires a certified snapshot at level `2 * alpha`.
pub fn classify(
    pres: &TreePair,
    alpha: u64,
    ctx: &SuiteCtx,
    budget: u64,
) -> Result<Classification> {
    let level = 2 * alpha;
    if !ctx.is_certified(level as u32) {
        return Err(Error::Uncertified(format!(
            "classifier needs a certified level-{level} snapshot"
        )));
    }
    let threshold = OrdinalNotation::from_nat(alpha).mul_left_omega();
    let left = detection_stage(&pres.left, &threshold, ctx)?;
    let right = detection_stage(&pres.right, &threshold, ctx)?;
    let fired = |d: Option<u64>| d.is_some_and(|s| s <= budget);
    Ok(match (fired(left), fired(right)) {
        (true, true) => {
            if left.unwrap() <= right.unwrap() {
                Classification::One
            } else {
                Classification::Zero
            }
        }
        (true, false) => Classification::One,
        (false, true) => Classification::Zero,
        (false, false) => Classification::Unknown,
    })
}

/// Stage at which the co-enumeration notices the rank exceeding the
/// threshold, when it ever does.
fn detection_stage(
    term: &SymbolicTree,
    threshold: &OrdinalNotation,
    ctx: &SuiteCtx,
) -> Result<Option<u64>> {
    match rank_verdict(term, ctx)? {
        RankVerdict::Exact {
            rank: Rank::Ord(o),
            budget,
        } => {
            if &o > threshold {
                // Never before the expansion shows children.
                Ok(Some(budget.max(2)))
            } else {
                Ok(None)
            }
        }
        _ => Ok(None),
    }
}

/// Materialized witness-function table with the contract checks the
/// construction relies on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessTable {
    pub level: u64,
    pub rows: Vec<WitnessRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRow {
    pub m: u64,
    pub stage: u64,
    pub value: u64,
    /// Whether the value sits inside the lower set (certified).
    pub in_lower: Verdict,
}

/// The staged witness at a point.
pub fn jump_witness(ctx: &SuiteCtx, level: u64, m: u64, stage: u64) -> Result<u64> {
    if level < 2 {
        return Err(Error::LevelOutOfRange(level, 2));
    }
    if let ExitStatus::Unknown = ctx.witness_exit(level, m, ctx.budget()) {
        return Err(Error::Uncertified(format!(
            "membership of {m} at level {level} undecided within budget"
        )));
    }
    Ok(ctx.witness_value(level, m, stage))
}

/// Tabulates the witness over points and stages, certifying each value's
/// membership in the lower set.
pub fn witness_table(
    ctx: &SuiteCtx,
    level: u64,
    points: &[u64],
    stages: std::ops::Range<u64>,
) -> Result<WitnessTable> {
    let mut rows = Vec::new();
    for &m in points {
        for stage in stages.clone() {
            let value = jump_witness(ctx, level, m, stage)?;
            let (in_lower, _) = ctx.decide((level - 1) as u32, value, ctx.budget());
            rows.push(WitnessRow {
                m,
                stage,
                value,
                in_lower,
            });
        }
    }
    Ok(WitnessTable { level, rows })
}

/// Distinct small programs that definitely halt (register bumps falling
/// off the end), indexed by a seed.
pub fn halting_variant(seed: u64) -> u64 {
    variant_program(seed, false)
}

/// Distinct small programs that definitely spin (a self-jump on the zero
/// register), indexed by a seed.
pub fn spinning_variant(seed: u64) -> u64 {
    variant_program(seed, true)
}

fn variant_program(mut seed: u64, spin: bool) -> u64 {
    let mut instrs = Vec::new();
    for _ in 0..6 {
        instrs.push(Instr::Inc((seed % 3) as u8));
        seed /= 3;
    }
    if spin {
        let here = instrs.len() as u8;
        instrs.push(Instr::Jz(3, here));
    }
    Program::encode(&instrs).expect("variant fits")
}

/// Many-one reduction tables for a decided set and its complement: the
/// positive side maps into the target jump level, the negative side out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionTables {
    pub level: u64,
    pub positive: BTreeMap<u64, u64>,
    pub negative: BTreeMap<u64, u64>,
}

pub fn reduction_tables(
    a: &BTreeSet<u64>,
    domain: std::ops::Range<u64>,
    level: u64,
    ctx: &SuiteCtx,
) -> Result<ReductionTables> {
    let mut positive = BTreeMap::new();
    let mut negative = BTreeMap::new();
    for n in domain {
        let (pos, neg) = if a.contains(&n) {
            (halting_variant(n), spinning_variant(n))
        } else {
            (spinning_variant(n), halting_variant(n))
        };
        // Certify both directions at the target level.
        let want = [(pos, a.contains(&n)), (neg, !a.contains(&n))];
        for (index, expect_in) in want {
            let (verdict, _) = ctx.decide(level as u32, index, ctx.budget());
            let expected = if expect_in { Verdict::In } else { Verdict::Out };
            if verdict != expected {
                return Err(Error::Uncertified(format!(
                    "reduction value {index} not certified {expected:?} at level {level}"
                )));
            }
        }
        positive.insert(n, pos);
        negative.insert(n, neg);
    }
    Ok(ReductionTables {
        level,
        positive,
        negative,
    })
}

/// The hardness pair for an index: component trees coded at level
/// `2 * alpha + 1` with target rank `w * alpha + 1`, driven by the
/// reduction tables.
pub fn coded_pair(
    alpha: u64,
    n: u64,
    tables: &ReductionTables,
    ctx: &SuiteCtx,
) -> Result<TreePair> {
    let gamma = 2 * alpha + 1;
    if tables.level != gamma {
        return Err(Error::Inconsistent(format!(
            "tables target level {} but the pair needs {gamma}",
            tables.level
        )));
    }
    let g = *tables
        .positive
        .get(&n)
        .ok_or_else(|| Error::Malformed(format!("no positive entry for {n}")))?;
    let h = *tables
        .negative
        .get(&n)
        .ok_or_else(|| Error::Malformed(format!("no negative entry for {n}")))?;
    let g_in = ctx.decide(gamma as u32, g, ctx.budget()).0;
    let h_in = ctx.decide(gamma as u32, h, ctx.budget()).0;
    if g_in == Verdict::In && h_in == Verdict::In {
        return Err(Error::Inconsistent(
            "both reduction sides certified in the target level".into(),
        ));
    }
    let beta = OrdinalNotation::from_nat(alpha).mul_left_omega().succ();
    Ok(TreePair {
        left: coded_tree(&beta, gamma, g)?,
        right: coded_tree(&beta, gamma, h)?,
    })
}

/// A truth-table position: clopen constraints on the two oracles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTablePair {
    pub c: ClopenSet,
    pub d: ClopenSet,
}

/// Evaluates the table: 1 exactly when both prefixes land inside their
/// clopen sets. Errors when a prefix is too short to decide.
pub fn tt_apply(pair: &TruthTablePair, x_prefix: &BitStr, y_prefix: &BitStr) -> Result<u8> {
    let in_c = pair.c.contains_prefix(x_prefix)?;
    if !in_c {
        return Ok(0);
    }
    let in_d = pair.d.contains_prefix(y_prefix)?;
    Ok(u8::from(in_d))
}

/// The selection step: output the bit-0 pair when the oracle prefix misses
/// the first clopen set; otherwise output the hardness pair for whether
/// the level-`2*alpha` jump (as a characteristic real) lies in the second.
pub fn psi_select(
    pair: &TruthTablePair,
    x_prefix: &BitStr,
    alpha: u64,
    n: u64,
    ctx: &SuiteCtx,
) -> Result<TreePair> {
    if !pair.c.contains_prefix(x_prefix)? {
        return pair_structure(&OrdinalNotation::from_nat(alpha), 0);
    }
    let level = 2 * alpha;
    let need = pair
        .d
        .strings()
        .iter()
        .map(|s| s.len())
        .max()
        .unwrap_or(0);
    let mut bits = Vec::with_capacity(need);
    for i in 0..need {
        match ctx.decide(level as u32, i as u64, ctx.budget()).0 {
            Verdict::In => bits.push(true),
            Verdict::Out => bits.push(false),
            Verdict::Unknown => {
                return Err(Error::Uncertified(format!(
                    "jump bit {i} at level {level} undecided"
                )))
            }
        }
    }
    let jump_prefix = BitStr::from_bits(&bits);
    let in_d = pair.d.contains_prefix(&jump_prefix)?;
    // Build the coded pair directly from the decided bit.
    let set: BTreeSet<u64> = if in_d { [n].into() } else { [].into() };
    let tables = reduction_tables(&set, n..n + 1, 2 * alpha + 1, ctx)?;
    coded_pair(alpha, n, &tables, ctx)
}


#[cfg(test)]
mod rank_table_tests {
    use super::*;
    use crate::trees::verify_rank_claim;

    fn ord(text: &str) -> OrdinalNotation {
        OrdinalNotation::parse(text).unwrap()
    }

    // The coded-tree rank table at desk scale: even levels give the target
    // rank off the set and drop below the limit inside it; odd levels give
    // the limit off the set and the target inside it.
    #[test]
    fn coded_tree_rank_table_spot_checks() {
        let ctx = {
            let mut c = SuiteCtx::over_empty(6000);
            c.certify_level(2, 16).unwrap();
            c
        };
        let inside = 0u64; // halts: inside every jump level
        let outside = crate::machines::looper_index();
        for beta_text in ["w", "w + 1", "w*2"] {
            let beta = ord(beta_text);
            // gamma = 2, m outside: rank = beta.
            let t = coded_tree(&beta, 2, outside).unwrap();
            match rank_verdict(&t, &ctx).unwrap() {
                RankVerdict::Exact { rank: Rank::Ord(o), .. } => assert_eq!(o, beta),
                other => panic!("expected exact rank, got {other:?}"),
            }
            assert!(verify_rank_claim(&t, &Rank::Ord(beta.clone()), &ctx, &[3, 5]).unwrap());

            // gamma = 2, m inside: rank finite (below the limit).
            let t = coded_tree(&beta, 2, inside).unwrap();
            match rank_verdict(&t, &ctx).unwrap() {
                RankVerdict::Exact { rank, .. } => {
                    assert!(rank.is_finite(), "expected finite, got {rank}")
                }
                other => panic!("{other:?}"),
            }

            // gamma = 3, m inside: rank = beta.
            let t = coded_tree(&beta, 3, inside).unwrap();
            match rank_verdict(&t, &ctx).unwrap() {
                RankVerdict::Exact { rank: Rank::Ord(o), .. } => assert_eq!(o, beta),
                other => panic!("{other:?}"),
            }

            // gamma = 3, m outside: rank = w.
            let t = coded_tree(&beta, 3, outside).unwrap();
            match rank_verdict(&t, &ctx).unwrap() {
                RankVerdict::Exact { rank: Rank::Ord(o), .. } => {
                    assert_eq!(o, OrdinalNotation::omega())
                }
                other => panic!("{other:?}"),
            }
            assert!(verify_rank_claim(
                &t,
                &Rank::Ord(OrdinalNotation::omega()),
                &ctx,
                &[2, 4]
            )
            .unwrap());
        }
        // gamma = 1 boundary cases.
        let t = coded_tree(&ord("2"), 1, outside).unwrap();
        assert!(verify_rank_claim(&t, &Rank::nat(0), &ctx, &[]).unwrap());
        let t = coded_tree(&ord("2"), 1, inside).unwrap();
        assert!(verify_rank_claim(&t, &Rank::nat(2), &ctx, &[]).unwrap());
    }

    // Finite-rank claims of even-level trees match brute force on staged
    // truncations.
    #[test]
    fn even_level_finite_ranks_brute_forced() {
        let ctx = {
            let mut c = SuiteCtx::over_empty(6000);
            c.certify_level(2, 16).unwrap();
            c
        };
        for m in [0u64, 7, 3] {
            if ctx.decide(2, m, 6000).0 != Verdict::In {
                continue;
            }
            let beta = ord("w + 1");
            let t = coded_tree(&beta, 2, m).unwrap();
            let RankVerdict::Exact { rank: Rank::Ord(o), .. } =
                rank_verdict(&t, &ctx).unwrap()
            else {
                panic!("rank should certify")
            };
            let claimed = o.as_nat().expect("finite");
            assert!(
                verify_rank_claim(&t, &Rank::nat(claimed), &ctx, &[]).unwrap(),
                "m = {m}, claimed {claimed}"
            );
        }
    }
}
