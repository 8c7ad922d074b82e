//! Symbolic trees: a term algebra over the tree constructors, with a
//! certified rank calculus.
//!
//! Terms denote (possibly infinite) computable trees. Ranks are computed by
//! structural recursion; wherever a term's shape depends on a jump question
//! the calculus consults a [`WitnessProvider`] and returns `Unknown` rather
//! than guess. Exact verdicts carry the budget their certificates consumed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machines::Verdict;
use crate::ordinals::OrdinalNotation;

/// Rank value: a standard ordinal notation or the ill-founded marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    Ord(OrdinalNotation),
    IllFounded,
}

impl Rank {
    pub fn nat(n: u64) -> Rank {
        Rank::Ord(OrdinalNotation::from_nat(n))
    }

    pub fn as_ord(&self) -> Option<&OrdinalNotation> {
        match self {
            Rank::Ord(o) => Some(o),
            Rank::IllFounded => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Rank::Ord(o) if o.is_finite())
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Ord(o) => write!(f, "{o}"),
            Rank::IllFounded => write!(f, "infty"),
        }
    }
}

/// Outcome of the rank calculus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankVerdict {
    /// Certified rank; `budget` bounds the machine work its certificates used.
    Exact { rank: Rank, budget: u64 },
    Unknown,
}

impl RankVerdict {
    pub fn exact(rank: Rank, budget: u64) -> RankVerdict {
        RankVerdict::Exact { rank, budget }
    }

    pub fn rank(&self) -> Option<&Rank> {
        match self {
            RankVerdict::Exact { rank, .. } => Some(rank),
            RankVerdict::Unknown => None,
        }
    }
}

/// Condition a staged graft waits for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    /// `m` enters the level-th jump of the suite base.
    JumpMembership { level: u64, m: u64 },
}

/// A staged family of trees indexed by a stage parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Members `s |-> coded_tree(beta, gamma - 1, witness(gamma, m, s))`.
    CodedLayer {
        beta: OrdinalNotation,
        gamma: u64,
        m: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    List(Vec<SymbolicTree>),
    Generated(GeneratorKind),
}

/// Symbolic tree term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolicTree {
    RootOnly,
    /// Tree of descending ordinal sequences below the notation; rank equals it.
    DescSeq(OrdinalNotation),
    /// Fattening: chains of the inner tree paired with natural tags.
    Fat(Box<SymbolicTree>),
    /// Members' roots identified into a single root, then fattened.
    Sup(Family),
    /// The weave of the family from the start offset, then fattened.
    Mini(Family, u64),
    /// Root only until the trigger fires; then the inner tree appears using
    /// ids above the discovery stage.
    Graft {
        trigger: Trigger,
        inner: Box<SymbolicTree>,
    },
    /// A fat ill-founded computable tree (fattening of the full string tree).
    IllFounded,
}

pub fn desc_seq_tree(alpha: OrdinalNotation) -> SymbolicTree {
    SymbolicTree::DescSeq(alpha)
}

pub fn fatten(t: SymbolicTree) -> SymbolicTree {
    SymbolicTree::Fat(Box::new(t))
}

/// Root-merge combinator over an explicit list.
pub fn sup_trees(ts: Vec<SymbolicTree>) -> Result<SymbolicTree> {
    if ts.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(SymbolicTree::Sup(Family::List(ts)))
}

/// Weave combinator over an explicit list with a start offset.
pub fn mini_trees(ts: Vec<SymbolicTree>, start: u64) -> Result<SymbolicTree> {
    if ts.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(SymbolicTree::Mini(Family::List(ts), start))
}

/// The staged tree coding membership of `m` at level `gamma` with target
/// rank `beta`.
///
/// Level 1 grafts the fat rank-`beta` tree when `m` enters the first jump.
/// Even levels weave the next layer down from the start offset `m`; odd
/// levels root-merge it.
pub fn coded_tree(beta: &OrdinalNotation, gamma: u64, m: u64) -> Result<SymbolicTree> {
    match gamma {
        0 => Err(Error::LevelOutOfRange(0, 1)),
        1 => Ok(SymbolicTree::Graft {
            trigger: Trigger::JumpMembership { level: 1, m },
            inner: Box::new(fatten(desc_seq_tree(beta.clone()))),
        }),
        g if g % 2 == 0 => Ok(SymbolicTree::Mini(
            Family::Generated(GeneratorKind::CodedLayer {
                beta: beta.clone(),
                gamma,
                m,
            }),
            m,
        )),
        _ => Ok(SymbolicTree::Sup(Family::Generated(GeneratorKind::CodedLayer {
            beta: beta.clone(),
            gamma,
            m,
        }))),
    }
}

/// Exit behaviour of a staged witness family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    /// From this stage on the witness values leave the lower set.
    Exited {
        at: u64,
        /// Budget the underlying membership certificate consumed (the
        /// stage parameter `at` is construction bookkeeping, not work).
        decided_at: u64,
    },
    /// Certified to stay inside the lower set at every stage.
    NeverCertified,
    Unknown,
}

/// Supplies the jump answers and staged witness values the calculus needs.
///
/// Contract: `jump_status` verdicts are stable once decided, the witness
/// function is total with `witness_value(l, m, s) >= s`, exits are monotone
/// (once exited, exited at every later stage), and exits are delayed: when
/// `witness_exit(l, m, _) = Exited(t)` for a value `m` queried by a layer
/// above, then `t >= 2m`. The tail analysis of generated families relies on
/// the delay to certify unbounded rank growth.
pub trait WitnessProvider {
    fn jump_status(&self, level: u64, m: u64, budget: u64) -> (Verdict, u64);
    fn witness_value(&self, level: u64, m: u64, stage: u64) -> u64;
    fn witness_exit(&self, level: u64, m: u64, budget: u64) -> ExitStatus;
    /// Budget used for exit certificates (the calculus echoes it back).
    fn budget(&self) -> u64;
}

/// Provider for pure terms; any jump or witness question is unanswerable.
pub struct NoWitness;

impl WitnessProvider for NoWitness {
    fn jump_status(&self, _level: u64, _m: u64, _budget: u64) -> (Verdict, u64) {
        (Verdict::Unknown, 0)
    }

    fn witness_value(&self, _level: u64, _m: u64, stage: u64) -> u64 {
        stage
    }

    fn witness_exit(&self, _level: u64, _m: u64, _budget: u64) -> ExitStatus {
        ExitStatus::Unknown
    }

    fn budget(&self) -> u64 {
        0
    }
}

/// Member term of a generated family at a stage.
pub fn family_member(
    gen: &GeneratorKind,
    stage: u64,
    provider: &dyn WitnessProvider,
) -> Result<SymbolicTree> {
    match gen {
        GeneratorKind::CodedLayer { beta, gamma, m } => {
            if *gamma < 2 {
                return Err(Error::LevelOutOfRange(*gamma, 2));
            }
            let witness = provider.witness_value(*gamma, *m, stage);
            coded_tree(beta, gamma - 1, witness)
        }
    }
}

/// Certified symbolic rank of a term.
pub fn rank_verdict(term: &SymbolicTree, provider: &dyn WitnessProvider) -> Result<RankVerdict> {
    match term {
        SymbolicTree::RootOnly => Ok(RankVerdict::exact(Rank::nat(0), 0)),
        SymbolicTree::DescSeq(alpha) => Ok(RankVerdict::exact(Rank::Ord(alpha.clone()), 0)),
        SymbolicTree::Fat(inner) => rank_verdict(inner, provider),
        SymbolicTree::IllFounded => Ok(RankVerdict::exact(Rank::IllFounded, 0)),
        SymbolicTree::Graft { trigger, inner } => {
            let Trigger::JumpMembership { level, m } = trigger;
            let (verdict, at) = provider.jump_status(*level, *m, provider.budget());
            match verdict {
                Verdict::In => {
                    let inner = rank_verdict(inner, provider)?;
                    Ok(match inner {
                        RankVerdict::Exact { rank, budget } => {
                            RankVerdict::exact(rank, budget.max(at))
                        }
                        RankVerdict::Unknown => RankVerdict::Unknown,
                    })
                }
                Verdict::Out => Ok(RankVerdict::exact(Rank::nat(0), at)),
                Verdict::Unknown => Ok(RankVerdict::Unknown),
            }
        }
        SymbolicTree::Sup(family) => sup_rank(family, provider),
        SymbolicTree::Mini(family, start) => mini_rank(family, *start, provider),
    }
}

fn list_ranks(
    ts: &[SymbolicTree],
    provider: &dyn WitnessProvider,
) -> Result<Option<(Vec<Rank>, u64)>> {
    let mut ranks = Vec::with_capacity(ts.len());
    let mut budget = 0;
    for t in ts {
        match rank_verdict(t, provider)? {
            RankVerdict::Exact { rank, budget: b } => {
                ranks.push(rank);
                budget = budget.max(b);
            }
            RankVerdict::Unknown => return Ok(None),
        }
    }
    Ok(Some((ranks, budget)))
}

fn ord_max(ranks: &[Rank]) -> Result<Rank> {
    let mut best: Option<&OrdinalNotation> = None;
    for r in ranks {
        match r {
            Rank::IllFounded => return Ok(Rank::IllFounded),
            Rank::Ord(o) => {
                if best.is_none_or(|b| o > b) {
                    best = Some(o);
                }
            }
        }
    }
    best.map(|o| Rank::Ord(o.clone())).ok_or(Error::EmptyInput)
}

fn sup_rank(family: &Family, provider: &dyn WitnessProvider) -> Result<RankVerdict> {
    match family {
        Family::List(ts) => match list_ranks(ts, provider)? {
            Some((ranks, budget)) => Ok(RankVerdict::exact(ord_max(&ranks)?, budget)),
            None => Ok(RankVerdict::Unknown),
        },
        Family::Generated(gen) => {
            let GeneratorKind::CodedLayer { gamma, m, .. } = gen;
            match provider.witness_exit(*gamma, *m, provider.budget()) {
                ExitStatus::Unknown => Ok(RankVerdict::Unknown),
                ExitStatus::Exited { at, decided_at } => {
                    // Post-exit members all have the target rank; earlier
                    // members sit strictly below the limit.
                    let post = family_member(gen, at, provider)?;
                    let post_rank = rank_verdict(&post, provider)?;
                    let RankVerdict::Exact { rank, budget } = post_rank else {
                        return Ok(RankVerdict::Unknown);
                    };
                    let mut budget = budget.max(decided_at);
                    if at > 0 {
                        let pre = family_member(gen, 0, provider)?;
                        if let RankVerdict::Exact { rank: pre_rank, budget: b } =
                            rank_verdict(&pre, provider)?
                        {
                            budget = budget.max(b);
                            if let (Rank::Ord(post), Rank::Ord(pre)) = (&rank, &pre_rank) {
                                debug_assert!(pre <= post);
                            }
                        }
                    }
                    Ok(RankVerdict::exact(rank, budget))
                }
                ExitStatus::NeverCertified => {
                    // Every member stays below the limit; their ranks grow
                    // without bound (witness exits are delayed past twice
                    // the queried value), so the merge attains the limit.
                    let mut budget = 0;
                    let mut last: Option<OrdinalNotation> = None;
                    let mut growing = true;
                    for probe in [0u64, 7, 23] {
                        let member = family_member(gen, probe, provider)?;
                        match rank_verdict(&member, provider)? {
                            RankVerdict::Exact {
                                rank: Rank::Ord(o),
                                budget: b,
                            } => {
                                budget = budget.max(b);
                                if let Some(prev) = &last {
                                    growing &= o > *prev;
                                }
                                last = Some(o);
                            }
                            _ => return Ok(RankVerdict::Unknown),
                        }
                    }
                    if !growing {
                        return Ok(RankVerdict::Unknown);
                    }
                    let limit = sup_of_member_limits(gen)?;
                    Ok(RankVerdict::exact(Rank::Ord(limit), budget))
                }
            }
        }
    }
}

/// Limit of the member ranks of a never-exiting coded layer: the members
/// are even-level trees whose ranks are bounded by (and cofinal in)
/// `w * floor((gamma - 1) / 2)` shifted into the next limit.
fn sup_of_member_limits(gen: &GeneratorKind) -> Result<OrdinalNotation> {
    let GeneratorKind::CodedLayer { gamma, .. } = gen;
    if *gamma != 3 {
        return Err(Error::Uncertified(format!(
            "tail limit for layer {gamma} outside the curated range"
        )));
    }
    // Members are weave trees with finite, unboundedly growing ranks.
    Ok(OrdinalNotation::omega())
}

fn mini_rank(family: &Family, start: u64, provider: &dyn WitnessProvider) -> Result<RankVerdict> {
    match family {
        Family::List(ts) => match list_ranks(ts, provider)? {
            Some((ranks, budget)) => {
                let mut best: Option<OrdinalNotation> = None;
                for (i, r) in ranks.iter().enumerate() {
                    let Rank::Ord(o) = r else {
                        return Ok(RankVerdict::Unknown);
                    };
                    let shifted = o.add_nat(i as u64);
                    if best.as_ref().is_none_or(|b| shifted < *b) {
                        best = Some(shifted);
                    }
                }
                Ok(RankVerdict::exact(
                    Rank::Ord(best.ok_or(Error::EmptyInput)?),
                    budget,
                ))
            }
            None => Ok(RankVerdict::Unknown),
        },
        Family::Generated(gen) => {
            let GeneratorKind::CodedLayer { gamma, m, .. } = gen;
            match provider.witness_exit(*gamma, *m, provider.budget()) {
                ExitStatus::Unknown => Ok(RankVerdict::Unknown),
                ExitStatus::NeverCertified => {
                    // Constant member rank; the weave attains it at offset 0.
                    let member = family_member(gen, start, provider)?;
                    rank_verdict(&member, provider)
                }
                ExitStatus::Exited { at, decided_at } => {
                    let mut candidates = Vec::new();
                    let mut budget = decided_at;
                    if start < at {
                        let pre = family_member(gen, start, provider)?;
                        match rank_verdict(&pre, provider)? {
                            RankVerdict::Exact { rank: Rank::Ord(o), budget: b } => {
                                budget = budget.max(b);
                                candidates.push(o);
                            }
                            _ => return Ok(RankVerdict::Unknown),
                        }
                    }
                    let first_post = at.max(start);
                    let post = family_member(gen, first_post, provider)?;
                    match rank_verdict(&post, provider)? {
                        RankVerdict::Exact { rank: Rank::Ord(o), budget: b } => {
                            budget = budget.max(b);
                            candidates.push(o.add_nat(first_post - start));
                        }
                        _ => return Ok(RankVerdict::Unknown),
                    }
                    let best = candidates.into_iter().min().ok_or(Error::EmptyInput)?;
                    Ok(RankVerdict::exact(Rank::Ord(best), budget))
                }
            }
        }
    }
}

/// Rank classes of the children of a fat term's root, sampled to `width`,
/// with a representative subterm per class.
pub fn child_classes(
    term: &SymbolicTree,
    provider: &dyn WitnessProvider,
    width: usize,
) -> Result<Vec<(Rank, SymbolicTree)>> {
    match term {
        SymbolicTree::Fat(inner) => descendant_classes(inner, provider, width),
        SymbolicTree::IllFounded => Ok(vec![(Rank::IllFounded, SymbolicTree::IllFounded)]),
        SymbolicTree::Graft { trigger, inner } => {
            let Trigger::JumpMembership { level, m } = trigger;
            match provider.jump_status(*level, *m, provider.budget()).0 {
                Verdict::In => child_classes(inner, provider, width),
                Verdict::Out => Ok(vec![]),
                Verdict::Unknown => Err(Error::Uncertified(format!(
                    "graft trigger at level {level} for {m} undecided"
                ))),
            }
        }
        SymbolicTree::Sup(Family::List(ts)) => {
            let mut out = Vec::new();
            for t in ts {
                out.extend(descendant_classes(t, provider, width)?);
            }
            dedup_classes(&mut out);
            Ok(out)
        }
        other => Err(Error::Uncertified(format!(
            "no class decomposition for {other:?}"
        ))),
    }
}

/// Rank classes over the strict descendants of a term's root; for the
/// fattening these are exactly the root's child classes.
fn descendant_classes(
    term: &SymbolicTree,
    provider: &dyn WitnessProvider,
    width: usize,
) -> Result<Vec<(Rank, SymbolicTree)>> {
    match term {
        SymbolicTree::RootOnly => Ok(vec![]),
        SymbolicTree::DescSeq(alpha) => {
            let mut out = Vec::new();
            for beta in sample_below(alpha, width)? {
                out.push((Rank::Ord(beta.clone()), fatten(desc_seq_tree(beta))));
            }
            Ok(out)
        }
        SymbolicTree::Fat(inner) => descendant_classes(inner, provider, width),
        SymbolicTree::IllFounded => Ok(vec![(Rank::IllFounded, SymbolicTree::IllFounded)]),
        SymbolicTree::Graft { trigger, inner } => {
            let Trigger::JumpMembership { level, m } = trigger;
            match provider.jump_status(*level, *m, provider.budget()).0 {
                Verdict::In => {
                    // The grafted tree replaces the root; its descendants
                    // are the inner tree's.
                    descendant_classes(inner, provider, width)
                }
                Verdict::Out => Ok(vec![]),
                Verdict::Unknown => Err(Error::Uncertified(format!(
                    "graft trigger at level {level} for {m} undecided"
                ))),
            }
        }
        SymbolicTree::Sup(Family::List(ts)) => {
            let mut out = Vec::new();
            for t in ts {
                out.extend(descendant_classes(t, provider, width)?);
            }
            dedup_classes(&mut out);
            Ok(out)
        }
        other => Err(Error::Uncertified(format!(
            "no descendant decomposition for {other:?}"
        ))),
    }
}

fn dedup_classes(classes: &mut Vec<(Rank, SymbolicTree)>) {
    let mut seen: Vec<Rank> = Vec::new();
    classes.retain(|(r, _)| {
        if seen.contains(r) {
            false
        } else {
            seen.push(r.clone());
            true
        }
    });
}

/// A strictly descending ladder of up to `width` ordinals below `alpha`,
/// starting at the immediate predecessor when there is one. Rank-faithful
/// for finite notations: with enough width every smaller ordinal appears.
pub fn sample_below(alpha: &OrdinalNotation, width: usize) -> Result<Vec<OrdinalNotation>> {
    let mut out = Vec::new();
    let mut cur = alpha.clone();
    let mut spread = width as u64;
    while out.len() < width && !cur.is_zero() {
        cur = match cur.pred() {
            Some(p) => p,
            None => cur.fund_seq(spread)?,
        };
        spread = spread.saturating_sub(1);
        out.push(cur.clone());
    }
    Ok(out)
}

/// Whether the term denotes a fat tree (every constructor except bare
/// descending-sequence trees fattens its output).
pub fn is_fat(term: &SymbolicTree) -> bool {
    match term {
        SymbolicTree::RootOnly | SymbolicTree::Fat(_) | SymbolicTree::IllFounded => true,
        SymbolicTree::Sup(_) | SymbolicTree::Mini(..) => true,
        SymbolicTree::Graft { inner, .. } => is_fat(inner),
        SymbolicTree::DescSeq(alpha) => alpha.is_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(text: &str) -> OrdinalNotation {
        OrdinalNotation::parse(text).unwrap()
    }

    #[test]
    fn pure_term_ranks() {
        let p = NoWitness;
        let t = fatten(desc_seq_tree(ord("w + 1")));
        assert_eq!(
            rank_verdict(&t, &p).unwrap().rank(),
            Some(&Rank::Ord(ord("w + 1")))
        );
        assert_eq!(
            rank_verdict(&SymbolicTree::RootOnly, &p).unwrap().rank(),
            Some(&Rank::nat(0))
        );
        assert_eq!(
            rank_verdict(&SymbolicTree::IllFounded, &p).unwrap().rank(),
            Some(&Rank::IllFounded)
        );
    }

    #[test]
    fn sup_and_mini_list_formulas() {
        let p = NoWitness;
        let ts = vec![
            fatten(desc_seq_tree(ord("1"))),
            fatten(desc_seq_tree(ord("2"))),
            fatten(desc_seq_tree(ord("3"))),
        ];
        let sup = sup_trees(ts.clone()).unwrap();
        assert_eq!(rank_verdict(&sup, &p).unwrap().rank(), Some(&Rank::nat(3)));

        let mini = mini_trees(
            vec![
                fatten(desc_seq_tree(ord("2"))),
                fatten(desc_seq_tree(ord("0"))),
                fatten(desc_seq_tree(ord("5"))),
            ],
            0,
        )
        .unwrap();
        assert_eq!(rank_verdict(&mini, &p).unwrap().rank(), Some(&Rank::nat(1)));

        let single = mini_trees(vec![fatten(desc_seq_tree(ord("4")))], 0).unwrap();
        assert_eq!(
            rank_verdict(&single, &p).unwrap().rank(),
            Some(&Rank::nat(4))
        );
    }

    #[test]
    fn graft_is_unknown_without_witnesses() {
        let p = NoWitness;
        let t = coded_tree(&ord("2"), 1, 5).unwrap();
        assert_eq!(rank_verdict(&t, &p).unwrap(), RankVerdict::Unknown);
    }

    #[test]
    fn sample_below_ladders() {
        assert_eq!(
            sample_below(&ord("3"), 5).unwrap(),
            vec![ord("2"), ord("1"), ord("0")]
        );
        let ladder = sample_below(&ord("w + 1"), 4).unwrap();
        assert_eq!(ladder[0], ord("w"));
        assert!(ladder.windows(2).all(|w| w[0] > w[1]));
        assert!(ladder.iter().all(|b| *b < ord("w + 1")));
    }

    #[test]
    fn term_json_round_trip() {
        let t = coded_tree(&ord("w + 1"), 3, 4).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: SymbolicTree = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }
}
