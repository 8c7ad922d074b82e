//! Rooted trees: finite trees with parent functions, the fattening
//! operation, root-merge and weave combinators, and bounded rank
//! computation. Symbolic (possibly infinite) trees live in [`symbolic`];
//! staged expansion in [`expand`]; bounded back-and-forth in [`iso`].

mod expand;
mod iso;
mod symbolic;

pub use expand::{desc_seq_finite, expand_term, mini_weave_capped, ExpandParams, Expansion, StagedTree};
pub use iso::{bounded_embed, bounded_iso, embeds_into, verify_rank_claim, EmbedVerdict, IsoVerdict};
pub use symbolic::{
    child_classes, family_member, is_fat, sample_below,
    coded_tree, desc_seq_tree, fatten, mini_trees, rank_verdict, sup_trees, ExitStatus, Family,
    GeneratorKind, NoWitness, Rank, RankVerdict, SymbolicTree, Trigger, WitnessProvider,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite rooted tree with an explicit parent function.
///
/// Node 0 is the root and is its own parent; children always carry larger
/// indices than their parents. Every node has a universe id, strictly
/// increasing in insertion order, which staged constructions use as Godel
/// numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTree {
    parent: Vec<u32>,
    ids: Vec<u64>,
}

impl Default for FiniteTree {
    fn default() -> Self {
        FiniteTree::root_only()
    }
}

impl FiniteTree {
    pub fn root_only() -> FiniteTree {
        FiniteTree {
            parent: vec![0],
            ids: vec![0],
        }
    }

    pub fn with_root_id(id: u64) -> FiniteTree {
        FiniteTree {
            parent: vec![0],
            ids: vec![id],
        }
    }

    /// A path with `len` edges; rank and height equal `len`.
    pub fn path(len: usize) -> FiniteTree {
        let mut t = FiniteTree::root_only();
        let mut cur = 0;
        for _ in 0..len {
            cur = t.add_child(cur);
        }
        t
    }

    pub fn add_child(&mut self, parent: usize) -> usize {
        assert!(parent < self.parent.len());
        let idx = self.parent.len();
        self.parent.push(parent as u32);
        let id = self.ids.last().map_or(0, |m| m + 1);
        self.ids.push(id);
        idx
    }

    pub fn add_child_with_id(&mut self, parent: usize, id: u64) -> usize {
        assert!(parent < self.parent.len());
        assert!(self.ids.last().is_none_or(|m| *m < id), "ids must increase");
        let idx = self.parent.len();
        self.parent.push(parent as u32);
        self.ids.push(id);
        idx
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent_of(&self, node: usize) -> usize {
        self.parent[node] as usize
    }

    pub fn id_of(&self, node: usize) -> u64 {
        self.ids[node]
    }

    pub fn node_by_id(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|i| *i != 0 && self.parent[*i] as usize == node)
            .collect()
    }

    pub fn children_table(&self) -> Vec<Vec<usize>> {
        let mut table = vec![Vec::new(); self.len()];
        for i in 1..self.len() {
            table[self.parent[i] as usize].push(i);
        }
        table
    }

    /// Strict descendants of a node, in index order.
    pub fn descendants(&self, node: usize) -> Vec<usize> {
        let mut in_subtree = vec![false; self.len()];
        in_subtree[node] = true;
        let mut out = Vec::new();
        for i in (node + 1)..self.len() {
            if in_subtree[self.parent[i] as usize] {
                in_subtree[i] = true;
                out.push(i);
            }
        }
        out
    }

    /// Bottom-up rank of every node; for finite trees rank equals height.
    pub fn ranks(&self) -> Vec<u64> {
        let mut ranks = vec![0u64; self.len()];
        for i in (1..self.len()).rev() {
            let p = self.parent[i] as usize;
            ranks[p] = ranks[p].max(ranks[i] + 1);
        }
        ranks
    }

    pub fn rank(&self) -> u64 {
        self.ranks().first().copied().unwrap_or(0)
    }

    pub fn height_of(&self, node: usize) -> u64 {
        let mut h = 0;
        let mut cur = node;
        while cur != 0 {
            cur = self.parent[cur] as usize;
            h += 1;
        }
        h
    }

    /// True when `self` appears inside `other` as an induced subtree that
    /// preserves ids, parents, and the root.
    pub fn is_id_preserving_prefix_of(&self, other: &FiniteTree) -> bool {
        if self.ids[0] != other.ids[0] {
            return false;
        }
        for i in 1..self.len() {
            let Some(j) = other.node_by_id(self.ids[i]) else {
                return false;
            };
            let my_parent_id = self.ids[self.parent[i] as usize];
            if other.ids[other.parent_of(j)] != my_parent_id {
                return false;
            }
        }
        true
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n");
        for i in 0..self.len() {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", i, self.ids[i]));
        }
        for i in 1..self.len() {
            out.push_str(&format!("  n{} -> n{};\n", self.parent[i], i));
        }
        out.push_str("}\n");
        out
    }
}

/// Brute-force rank of a finite tree (root height), the oracle the
/// symbolic calculus is checked against.
pub fn rank_finite(t: &FiniteTree) -> u64 {
    t.rank()
}

/// Root-merge of finite trees: disjoint union with the roots identified.
pub fn sup_merge_finite(members: &[FiniteTree]) -> Result<FiniteTree> {
    if members.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = FiniteTree::root_only();
    for m in members {
        let mut map = vec![0usize; m.len()];
        for i in 1..m.len() {
            let p = m.parent_of(i);
            map[i] = out.add_child(map[p]);
        }
    }
    Ok(out)
}

/// The weave of a tree list: strings of column chains where column `i`
/// starts at the root of the i-th tree and every level extends each live
/// column strictly upward and opens the next column.
///
/// Lists shorter than the weave's height are extended by repeating the
/// last tree, which keeps the finite construction aligned with the rank
/// formula `min_i (rank(T_i) + i)`.
pub fn mini_weave_finite(members: &[FiniteTree], node_cap: usize) -> Result<FiniteTree> {
    if members.is_empty() {
        return Err(Error::EmptyInput);
    }
    let level_bound = members
        .iter()
        .enumerate()
        .map(|(i, t)| t.rank() as usize + i)
        .min()
        .unwrap_or(0)
        + 2;

    let desc_tables: Vec<Vec<Vec<usize>>> = members
        .iter()
        .map(|t| (0..t.len()).map(|n| t.descendants(n)).collect())
        .collect();
    let desc = |i: usize, node: usize| -> &Vec<usize> {
        &desc_tables[i.min(members.len() - 1)][node]
    };

    // Weave nodes are column-position vectors; build breadth-first.
    let mut out = FiniteTree::root_only();
    let mut states: Vec<Vec<usize>> = vec![vec![0]];
    let mut frontier: Vec<usize> = vec![0];
    for _level in 1..=level_bound {
        let mut next = Vec::new();
        for &node in &frontier {
            let state = states[node].clone();
            // Extension choices per existing column.
            let mut choice_sets: Vec<&Vec<usize>> = Vec::with_capacity(state.len());
            let mut dead = false;
            for (col, &pos) in state.iter().enumerate() {
                let d = desc(col, pos);
                if d.is_empty() {
                    dead = true;
                    break;
                }
                choice_sets.push(d);
            }
            if dead {
                continue;
            }
            let mut picks = vec![0usize; choice_sets.len()];
            'product: loop {
                if out.len() >= node_cap {
                    return Err(Error::Malformed(format!(
                        "weave exceeds node cap {node_cap}"
                    )));
                }
                let mut new_state: Vec<usize> = picks
                    .iter()
                    .zip(&choice_sets)
                    .map(|(p, set)| set[*p])
                    .collect();
                new_state.push(0); // next column starts at its root
                let idx = out.add_child(node);
                states.push(new_state);
                next.push(idx);
                // Advance the product counter.
                for slot in 0..picks.len() {
                    picks[slot] += 1;
                    if picks[slot] < choice_sets[slot].len() {
                        continue 'product;
                    }
                    picks[slot] = 0;
                }
                break;
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(out)
}

/// Deterministic random tree for test harnesses: `n` nodes, parents drawn
/// uniformly among earlier nodes.
pub fn random_tree(rng: &mut impl rand::Rng, nodes: usize) -> FiniteTree {
    let mut t = FiniteTree::root_only();
    for i in 1..nodes.max(1) {
        let parent = rng.gen_range(0..i);
        t.add_child(parent);
    }
    t
}

/// Random tree with rank exactly `rank` (a witness path plus noise).
pub fn random_tree_of_rank(rng: &mut impl rand::Rng, rank: u64, extra: usize) -> FiniteTree {
    let mut t = FiniteTree::path(rank as usize);
    for _ in 0..extra {
        // Attach below nodes with headroom so the rank is kept.
        let candidates: Vec<usize> = (0..t.len())
            .filter(|&n| t.height_of(n) + 1 <= rank)
            .collect();
        if candidates.is_empty() {
            break;
        }
        let pick = candidates[rng.gen_range(0..candidates.len())];
        t.add_child(pick);
    }
    debug_assert_eq!(t.rank(), rank);
    t
}

/// Rank-faithful truncation of the fattening of a finite tree.
///
/// Children of a fat-tree node ending at `x` are tagged strict descendants
/// of `x`; the truncation keeps, per node, up to `width` representatives of
/// every achievable child rank with `tags` tag copies each, visiting rank
/// classes in descending order so the rank-witness chain always fits the
/// node budget.
pub fn fat_truncation(
    t: &FiniteTree,
    width: usize,
    tags: usize,
    node_budget: usize,
) -> FiniteTree {
    let ranks = t.ranks();
    let mut out = FiniteTree::root_only();
    let mut budget = node_budget.saturating_sub(1);

    fn go(
        t: &FiniteTree,
        ranks: &[u64],
        out: &mut FiniteTree,
        out_node: usize,
        src: usize,
        width: usize,
        tags: usize,
        budget: &mut usize,
    ) {
        let descendants = t.descendants(src);
        let my_rank = ranks[src];
        if my_rank == 0 {
            return;
        }
        for class in (0..my_rank).rev() {
            let mut taken = 0;
            for &d in &descendants {
                if ranks[d] != class {
                    continue;
                }
                for _tag in 0..tags {
                    if *budget == 0 {
                        return;
                    }
                    *budget -= 1;
                    let child = out.add_child(out_node);
                    go(t, ranks, out, child, d, width, tags, budget);
                }
                taken += 1;
                if taken >= width {
                    break;
                }
            }
        }
    }

    go(t, &ranks, &mut out, 0, 0, width, tags, &mut budget);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rank_of_paths_and_bushes() {
        assert_eq!(FiniteTree::root_only().rank(), 0);
        assert_eq!(FiniteTree::path(3).rank(), 3);
        // Root with children of ranks 0 and 2 has rank 3.
        let mut t = FiniteTree::root_only();
        t.add_child(0);
        let c = t.add_child(0);
        let d = t.add_child(c);
        t.add_child(d);
        assert_eq!(t.rank(), 3);
    }

    #[test]
    fn fat_truncation_preserves_rank() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 1 + rng.gen_range(0..30);
            let t = random_tree(&mut rng, n);
            let fat = fat_truncation(&t, 2, 2, 3000);
            assert_eq!(fat.rank(), t.rank(), "tree: {t:?}");
        }
    }

    #[test]
    fn fat_truncation_of_path_has_expected_rank() {
        let fat = fat_truncation(&FiniteTree::path(2), 3, 3, 1000);
        assert_eq!(fat.rank(), 2);
        assert_eq!(fat_truncation(&FiniteTree::root_only(), 3, 3, 100).rank(), 0);
    }

    #[test]
    fn fat_truncation_is_fat_at_small_scale() {
        // Every non-leaf node of rank r keeps at least one child of each
        // rank below r when the budget allows.
        let s3 = crate::trees::expand::desc_seq_finite(3);
        let fat = fat_truncation(&s3, 2, 2, 5000);
        let ranks = fat.ranks();
        let table = fat.children_table();
        for (node, kids) in table.iter().enumerate() {
            if ranks[node] == 0 {
                continue;
            }
            for below in 0..ranks[node] {
                assert!(
                    kids.iter().any(|k| ranks[*k] == below),
                    "node {node} of rank {} lacks a rank-{below} child",
                    ranks[node]
                );
            }
        }
    }

    #[test]
    fn sup_merge_rank_is_max() {
        let members = vec![FiniteTree::path(1), FiniteTree::path(3), FiniteTree::path(2)];
        let merged = sup_merge_finite(&members).unwrap();
        assert_eq!(merged.rank(), 3);
        assert!(sup_merge_finite(&[]).is_err());
    }

    #[test]
    fn mini_weave_formula_examples() {
        // ranks (2,0,5) -> min(2+0, 0+1, 5+2) = 1
        let members = vec![FiniteTree::path(2), FiniteTree::path(0), FiniteTree::path(5)];
        let weave = mini_weave_finite(&members, 100_000).unwrap();
        assert_eq!(weave.rank(), 1);
        // single member of rank r -> r
        for r in 0..5 {
            let weave = mini_weave_finite(&[FiniteTree::path(r)], 100_000).unwrap();
            assert_eq!(weave.rank(), r as u64);
        }
        assert!(mini_weave_finite(&[], 10).is_err());
    }

    #[test]
    fn mini_weave_formula_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let k = rng.gen_range(1..4);
            let mut members = Vec::new();
            for _ in 0..k {
                let r = rng.gen_range(0..4);
                members.push(random_tree_of_rank(&mut rng, r, 2));
            }
            let expected = members
                .iter()
                .enumerate()
                .map(|(i, t)| t.rank() + i as u64)
                .min()
                .unwrap();
            let weave = mini_weave_finite(&members, 500_000).unwrap();
            assert_eq!(weave.rank(), expected, "members {members:?}");
        }
    }

    #[test]
    fn ids_increase_and_prefix_checks_work() {
        let mut t = FiniteTree::root_only();
        let a = t.add_child(0);
        t.add_child(a);
        let mut bigger = t.clone();
        bigger.add_child(a);
        assert!(t.is_id_preserving_prefix_of(&bigger));
        assert!(!bigger.is_id_preserving_prefix_of(&t));
    }
}
