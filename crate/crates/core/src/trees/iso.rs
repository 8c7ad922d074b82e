//! Bounded back-and-forth: rank-guided isomorphism evidence and forth-only
//! embedding search on truncations.
//!
//! Verdicts are conservative. `Distinguished` needs certified standard
//! ranks that differ or a completed expansion that separates; full
//! isomorphism of infinite trees is never claimed, only consistency to the
//! explored bound.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::expand::{expand_term, ExpandParams};
use super::symbolic::WitnessProvider;
use super::symbolic::{child_classes, is_fat, rank_verdict, Rank, RankVerdict, SymbolicTree};
use super::FiniteTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsoVerdict {
    IsomorphicToBound,
    Distinguished,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbedVerdict {
    EmbedsToBound,
    Obstructed,
    Inconclusive,
}

/// Rank-guided bounded isomorphism check.
pub fn bounded_iso(
    a: &SymbolicTree,
    b: &SymbolicTree,
    provider: &dyn WitnessProvider,
    depth: usize,
    width: usize,
) -> Result<IsoVerdict> {
    let ra = rank_verdict(a, provider)?;
    let rb = rank_verdict(b, provider)?;
    let (RankVerdict::Exact { rank: ra, .. }, RankVerdict::Exact { rank: rb, .. }) = (ra, rb)
    else {
        return Ok(IsoVerdict::Inconclusive);
    };
    match (&ra, &rb) {
        (Rank::Ord(oa), Rank::Ord(ob)) if oa != ob => return Ok(IsoVerdict::Distinguished),
        (Rank::IllFounded, Rank::Ord(_)) | (Rank::Ord(_), Rank::IllFounded) => {
            // Separating well-founded from ill-founded needs more than any
            // finite bound shows.
            return Ok(IsoVerdict::Inconclusive);
        }
        _ => {}
    }
    if is_fat(a) && is_fat(b) {
        return match class_match(a, b, provider, depth, width) {
            Ok(()) => Ok(IsoVerdict::IsomorphicToBound),
            Err(_) => Ok(IsoVerdict::Inconclusive),
        };
    }
    // Equal-rank non-fat terms: decide exactly when both expansions are
    // complete, otherwise stay agnostic.
    let p = ExpandParams {
        depth: depth.max(8),
        width: width.max(8),
        ..ExpandParams::default()
    };
    let ea = expand_term(a, provider, &p)?;
    let eb = expand_term(b, provider, &p)?;
    if ea.complete && eb.complete {
        if canonical_form(&ea.tree) == canonical_form(&eb.tree) {
            Ok(IsoVerdict::IsomorphicToBound)
        } else {
            Ok(IsoVerdict::Distinguished)
        }
    } else {
        Ok(IsoVerdict::Inconclusive)
    }
}

/// Matches child rank classes of two fat terms down to the depth bound;
/// classes present on both sides must match recursively, classes seen on
/// one side only are absorbed by fatness.
fn class_match(
    a: &SymbolicTree,
    b: &SymbolicTree,
    provider: &dyn WitnessProvider,
    depth: usize,
    width: usize,
) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    let ca = child_classes(a, provider, width)?;
    let cb = child_classes(b, provider, width)?;
    for (rank_a, rep_a) in &ca {
        if let Some((_, rep_b)) = cb.iter().find(|(rank_b, _)| rank_b == rank_a) {
            class_match(rep_a, rep_b, provider, depth - 1, width)?;
        }
    }
    Ok(())
}

/// AHU canonical form of a finite tree.
fn canonical_form(t: &FiniteTree) -> String {
    let table = t.children_table();
    fn go(t: &FiniteTree, table: &[Vec<usize>], node: usize) -> String {
        let mut parts: Vec<String> = table[node].iter().map(|c| go(t, table, *c)).collect();
        parts.sort();
        format!("({})", parts.join(""))
    }
    go(t, &table, 0)
}

/// Forth-only bounded embedding check of `s` into `t`.
pub fn bounded_embed(
    s: &SymbolicTree,
    t: &SymbolicTree,
    provider: &dyn WitnessProvider,
    depth: usize,
    width: usize,
) -> Result<EmbedVerdict> {
    let ps = ExpandParams {
        depth,
        width,
        tags: 1,
        ..ExpandParams::default()
    };
    let pt = ExpandParams {
        depth: depth + 1,
        width: width + 1,
        tags: width.max(2),
        node_budget: 20_000,
        ..ExpandParams::default()
    };
    let es = expand_term(s, provider, &ps)?;
    let et = expand_term(t, provider, &pt)?;
    if embeds_into(&es.tree, &et.tree) {
        return Ok(EmbedVerdict::EmbedsToBound);
    }
    // No embedding at this bound; call it an obstruction only when the
    // certified ranks justify one.
    let rs = rank_verdict(s, provider)?;
    let rt = rank_verdict(t, provider)?;
    if let (
        RankVerdict::Exact {
            rank: Rank::Ord(os),
            ..
        },
        RankVerdict::Exact {
            rank: Rank::Ord(ot),
            ..
        },
    ) = (rs, rt)
    {
        if os > ot {
            return Ok(EmbedVerdict::Obstructed);
        }
    }
    Ok(EmbedVerdict::Inconclusive)
}

/// Exhaustive parent-preserving embedding search (root to root), by
/// bipartite matching of children with memoized feasibility.
pub fn embeds_into(s: &FiniteTree, t: &FiniteTree) -> bool {
    let s_kids = s.children_table();
    let t_kids = t.children_table();
    let mut memo: HashMap<(usize, usize), bool> = HashMap::new();
    feasible(s, t, &s_kids, &t_kids, 0, 0, &mut memo)
}

fn feasible(
    s: &FiniteTree,
    t: &FiniteTree,
    s_kids: &[Vec<usize>],
    t_kids: &[Vec<usize>],
    sn: usize,
    tn: usize,
    memo: &mut HashMap<(usize, usize), bool>,
) -> bool {
    if let Some(hit) = memo.get(&(sn, tn)) {
        return *hit;
    }
    let sc = &s_kids[sn];
    let tc = &t_kids[tn];
    let ok = if sc.is_empty() {
        true
    } else if sc.len() > tc.len() {
        false
    } else {
        // Feasibility matrix, then maximum bipartite matching.
        let mut can = vec![vec![false; tc.len()]; sc.len()];
        for (i, &sci) in sc.iter().enumerate() {
            for (j, &tcj) in tc.iter().enumerate() {
                can[i][j] = feasible(s, t, s_kids, t_kids, sci, tcj, memo);
            }
        }
        let mut matched_to: Vec<Option<usize>> = vec![None; tc.len()];
        let mut size = 0;
        for i in 0..sc.len() {
            let mut visited = vec![false; tc.len()];
            if augment(i, &can, &mut matched_to, &mut visited) {
                size += 1;
            }
        }
        size == sc.len()
    };
    memo.insert((sn, tn), ok);
    ok
}

fn augment(
    i: usize,
    can: &[Vec<bool>],
    matched_to: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for j in 0..can[i].len() {
        if can[i][j] && !visited[j] {
            visited[j] = true;
            if matched_to[j].is_none() || augment(matched_to[j].unwrap(), can, matched_to, visited)
            {
                matched_to[j] = Some(i);
                return true;
            }
        }
    }
    false
}

/// Verifies a claimed rank by truncation evidence: finite claims by exact
/// brute force, infinite claims by truncation ranks passing every probe
/// while the certified verdict agrees with the claim.
pub fn verify_rank_claim(
    term: &SymbolicTree,
    claimed: &Rank,
    provider: &dyn WitnessProvider,
    probes: &[usize],
) -> Result<bool> {
    match claimed {
        Rank::IllFounded => Err(Error::Uncertified(
            "ill-founded rank claims have no finite evidence".into(),
        )),
        Rank::Ord(o) => {
            if let Some(n) = o.as_nat() {
                let p = ExpandParams {
                    depth: (n as usize + 2).max(6),
                    width: (n as usize + 2).max(6),
                    node_budget: 60_000,
                    ..ExpandParams::default()
                };
                let e = expand_term(term, provider, &p)?;
                return Ok(e.tree.rank() == n);
            }
            for &probe in probes {
                let p = ExpandParams {
                    depth: probe + 2,
                    width: probe + 2,
                    node_budget: 120_000,
                    ..ExpandParams::default()
                };
                let e = expand_term(term, provider, &p)?;
                if e.tree.rank() < probe as u64 {
                    return Ok(false);
                }
            }
            match rank_verdict(term, provider)? {
                RankVerdict::Exact {
                    rank: Rank::Ord(got),
                    ..
                } => Ok(&got == o),
                _ => Ok(false),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinals::OrdinalNotation;
    use crate::trees::symbolic::{desc_seq_tree, fatten, NoWitness};
    use crate::trees::SymbolicTree as T;

    fn ord(text: &str) -> OrdinalNotation {
        OrdinalNotation::parse(text).unwrap()
    }

    fn t_alpha(text: &str) -> T {
        fatten(desc_seq_tree(ord(text)))
    }

    #[test]
    fn equal_rank_fat_trees_match_to_bound() {
        let a = t_alpha("2");
        let b = t_alpha("2");
        assert_eq!(
            bounded_iso(&a, &b, &NoWitness, 4, 5).unwrap(),
            IsoVerdict::IsomorphicToBound
        );
    }

    #[test]
    fn unequal_ranks_distinguish() {
        assert_eq!(
            bounded_iso(&t_alpha("2"), &t_alpha("3"), &NoWitness, 4, 5).unwrap(),
            IsoVerdict::Distinguished
        );
        assert_eq!(
            bounded_iso(&t_alpha("w"), &t_alpha("w + 1"), &NoWitness, 4, 5).unwrap(),
            IsoVerdict::Distinguished
        );
    }

    #[test]
    fn markers_match_to_any_bound() {
        assert_eq!(
            bounded_iso(&T::IllFounded, &T::IllFounded, &NoWitness, 6, 6).unwrap(),
            IsoVerdict::IsomorphicToBound
        );
        assert_eq!(
            bounded_iso(&T::IllFounded, &t_alpha("3"), &NoWitness, 4, 4).unwrap(),
            IsoVerdict::Inconclusive
        );
    }

    #[test]
    fn embedding_examples() {
        // S_2 into T_5 embeds.
        assert_eq!(
            bounded_embed(&desc_seq_tree(ord("2")), &t_alpha("5"), &NoWitness, 3, 5).unwrap(),
            EmbedVerdict::EmbedsToBound
        );
        // S_3 into T_2 fails with a rank obstruction.
        assert_eq!(
            bounded_embed(&desc_seq_tree(ord("3")), &t_alpha("2"), &NoWitness, 3, 5).unwrap(),
            EmbedVerdict::Obstructed
        );
        // Root-only embeds into anything.
        assert_eq!(
            bounded_embed(&T::RootOnly, &t_alpha("2"), &NoWitness, 3, 3).unwrap(),
            EmbedVerdict::EmbedsToBound
        );
    }

    #[test]
    fn embeds_into_is_an_honest_search() {
        let path3 = FiniteTree::path(3);
        let path2 = FiniteTree::path(2);
        assert!(embeds_into(&path2, &path3));
        assert!(!embeds_into(&path3, &path2));
        let mut bush = FiniteTree::root_only();
        bush.add_child(0);
        bush.add_child(0);
        // Two children cannot inject into one.
        assert!(!embeds_into(&bush, &path3));
    }

    #[test]
    fn rank_claims_verified_by_truncation() {
        assert!(verify_rank_claim(&t_alpha("3"), &Rank::nat(3), &NoWitness, &[]).unwrap());
        assert!(!verify_rank_claim(&t_alpha("3"), &Rank::nat(2), &NoWitness, &[]).unwrap());
        assert!(verify_rank_claim(
            &t_alpha("w"),
            &Rank::Ord(ord("w")),
            &NoWitness,
            &[3, 6, 9]
        )
        .unwrap());
    }
}
