//! Staged expansion of symbolic terms into finite truncations.
//!
//! Truncations are rank-faithful within their caps: per node at least one
//! child of each sampled child-rank survives, and the max-rank witness
//! chain always fits the node budget. Grafted subtrees only use universe
//! ids above their discovery stage.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::machines::Verdict;
use crate::ordinals::OrdinalNotation;

use super::symbolic::{
    family_member, sample_below, ExitStatus, Family, SymbolicTree, Trigger, WitnessProvider,
};
use super::{fat_truncation, sup_merge_finite, FiniteTree};

/// Resolution caps for an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandParams {
    /// Budget for trigger and witness certificates; also the id horizon.
    pub stage: u64,
    /// Depth cap for descending-sequence trunks.
    pub depth: usize,
    /// Child-rank classes sampled per node.
    pub width: usize,
    /// Tag copies per class in fat layers.
    pub tags: usize,
    pub node_budget: usize,
    /// Members materialized from a generated family.
    pub members: usize,
}

impl Default for ExpandParams {
    fn default() -> Self {
        ExpandParams {
            stage: 256,
            depth: 6,
            width: 5,
            tags: 2,
            node_budget: 4000,
            members: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub tree: FiniteTree,
    /// True when no cap was hit and every trigger was decided, so the
    /// truncation is the whole denoted tree.
    pub complete: bool,
}

pub fn expand_term(
    term: &SymbolicTree,
    provider: &dyn WitnessProvider,
    p: &ExpandParams,
) -> Result<Expansion> {
    match term {
        SymbolicTree::RootOnly => Ok(Expansion {
            tree: FiniteTree::root_only(),
            complete: true,
        }),
        SymbolicTree::DescSeq(alpha) => {
            let mut tree = FiniteTree::root_only();
            let mut complete = true;
            expand_desc(alpha, &mut tree, 0, p.depth, p, &mut complete)?;
            Ok(Expansion { tree, complete })
        }
        SymbolicTree::Fat(inner) => {
            let trunk = expand_term(inner, provider, p)?;
            Ok(Expansion {
                tree: fat_truncation(&trunk.tree, p.width, p.tags, p.node_budget),
                complete: false,
            })
        }
        SymbolicTree::Graft { trigger, inner } => {
            let Trigger::JumpMembership { level, m } = trigger;
            let (verdict, at) = provider.jump_status(*level, *m, p.stage);
            match verdict {
                Verdict::Out => Ok(Expansion {
                    tree: FiniteTree::root_only(),
                    complete: true,
                }),
                Verdict::Unknown => Ok(Expansion {
                    tree: FiniteTree::root_only(),
                    complete: false,
                }),
                Verdict::In => {
                    let sub = expand_term(inner, provider, p)?;
                    Ok(Expansion {
                        tree: reid_above(&sub.tree, at),
                        complete: sub.complete,
                    })
                }
            }
        }
        SymbolicTree::IllFounded => {
            let mut tree = FiniteTree::root_only();
            let branch = (p.width * p.tags).max(2);
            let mut frontier = vec![0usize];
            for _ in 0..p.depth {
                let mut next = Vec::new();
                for &n in &frontier {
                    for _ in 0..branch {
                        if tree.len() >= p.node_budget {
                            break;
                        }
                        next.push(tree.add_child(n));
                    }
                }
                frontier = next;
            }
            Ok(Expansion {
                tree,
                complete: false,
            })
        }
        SymbolicTree::Sup(family) => {
            let (members, _) = materialize_members(family, 0, provider, p)?;
            let merged = sup_merge_finite(&members)?;
            Ok(Expansion {
                tree: fat_truncation(&merged, p.width, p.tags, p.node_budget),
                complete: false,
            })
        }
        SymbolicTree::Mini(family, start) => {
            let (members, _) = materialize_members(family, *start, provider, p)?;
            let (weave, _) = mini_weave_capped(&members, p.node_budget);
            Ok(Expansion {
                tree: fat_truncation(&weave, p.width, p.tags, p.node_budget),
                complete: false,
            })
        }
    }
}

fn expand_desc(
    beta: &OrdinalNotation,
    tree: &mut FiniteTree,
    node: usize,
    depth: usize,
    p: &ExpandParams,
    complete: &mut bool,
) -> Result<()> {
    if beta.is_zero() {
        return Ok(());
    }
    if depth == 0 {
        *complete = false;
        return Ok(());
    }
    let samples = sample_below(beta, p.width)?;
    match beta.as_nat() {
        Some(n) if n <= p.width as u64 => {}
        _ => *complete = false,
    }
    for gamma in samples {
        if tree.len() >= p.node_budget {
            *complete = false;
            return Ok(());
        }
        let child = tree.add_child(node);
        expand_desc(&gamma, tree, child, depth - 1, p, complete)?;
    }
    Ok(())
}

/// Rebuilds a tree so every non-root id exceeds `floor` (grafted elements
/// enter the universe only above their discovery stage).
fn reid_above(tree: &FiniteTree, floor: u64) -> FiniteTree {
    let mut out = FiniteTree::with_root_id(0);
    let mut map = vec![0usize; tree.len()];
    let mut next_id = floor + 1;
    for i in 1..tree.len() {
        map[i] = out.add_child_with_id(map[tree.parent_of(i)], next_id);
        next_id += 1;
    }
    out
}

fn materialize_members(
    family: &Family,
    start: u64,
    provider: &dyn WitnessProvider,
    p: &ExpandParams,
) -> Result<(Vec<FiniteTree>, bool)> {
    let member_params = ExpandParams {
        node_budget: (p.node_budget / (p.members + 1)).max(64),
        ..*p
    };
    match family {
        Family::List(ts) => {
            let mut out = Vec::with_capacity(ts.len());
            let mut complete = true;
            for t in ts {
                let e = expand_term(t, provider, &member_params)?;
                complete &= e.complete;
                out.push(e.tree);
            }
            Ok((out, complete))
        }
        Family::Generated(gen) => {
            let super::symbolic::GeneratorKind::CodedLayer { gamma, m, .. } = gen;
            // Keep stages contiguous so weave offsets stay truthful; reach
            // past the exit stage when there is one and it is near.
            let mut count = p.members as u64;
            let mut complete = true;
            match provider.witness_exit(*gamma, *m, p.stage) {
                ExitStatus::Exited { at, .. } if at >= start => {
                    let need = at - start + 2;
                    if need <= 64 {
                        count = count.max(need);
                    } else {
                        complete = false;
                    }
                }
                ExitStatus::Unknown => complete = false,
                _ => {}
            }
            let mut out = Vec::new();
            for s in start..start + count {
                let term = family_member(gen, s, provider)?;
                let e = expand_term(&term, provider, &member_params)?;
                complete &= e.complete;
                out.push(e.tree);
            }
            Ok((out, complete))
        }
    }
}

/// Breadth-first weave truncated at a node cap (no error on overflow);
/// the boolean reports whether the cap was never hit.
pub fn mini_weave_capped(members: &[FiniteTree], cap: usize) -> (FiniteTree, bool) {
    match super::mini_weave_finite(members, cap) {
        Ok(t) => (t, true),
        Err(_) => {
            // Retry with progressively smaller member lists; the weave over
            // a prefix is an induced subtree of the full weave.
            for take in (1..members.len()).rev() {
                if let Ok(t) = super::mini_weave_finite(&members[..take], cap) {
                    return (t, false);
                }
            }
            (FiniteTree::root_only(), false)
        }
    }
}

/// The full tree of descending natural sequences below `n` (an exact
/// finite oracle for small ranks).
pub fn desc_seq_finite(n: u64) -> FiniteTree {
    let mut tree = FiniteTree::root_only();
    fn go(tree: &mut FiniteTree, node: usize, below: u64) {
        for k in (0..below).rev() {
            let child = tree.add_child(node);
            go(tree, child, k);
        }
    }
    go(&mut tree, 0, n);
    tree
}

/// Monotone finite approximations of a symbolic tree.
///
/// `at_stage(s)` expands with the stage as both certificate budget and node
/// budget; over the stable constructors the stage-s tree is an
/// id-preserving induced subtree of the stage-(s+1) tree.
#[derive(Debug, Clone)]
pub struct StagedTree {
    pub term: SymbolicTree,
    pub params: ExpandParams,
}

impl StagedTree {
    pub fn new(term: SymbolicTree) -> StagedTree {
        StagedTree {
            term,
            params: ExpandParams::default(),
        }
    }

    pub fn at_stage(&self, stage: u64, provider: &dyn WitnessProvider) -> Result<FiniteTree> {
        let p = ExpandParams {
            stage,
            node_budget: (stage as usize).min(self.params.node_budget).max(1),
            ..self.params
        };
        Ok(expand_term(&self.term, provider, &p)?.tree)
    }
}
