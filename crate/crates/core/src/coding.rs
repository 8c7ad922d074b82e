//! Flower-graph coding of finite-set families and its decoder.
//!
//! A finite set `F` becomes a flower: a center vertex with one cycle of
//! length `n + 3` through it per `n` in `F`. A staged family becomes a
//! bouquet: disjoint flowers (with a copy multiplicity) plus isolated
//! vertices. The decoder inverts both, with stated conventions for the
//! single-cycle and single-vertex ambiguities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph over u64 vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: BTreeMap<u64, BTreeSet<u64>>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn add_vertex(&mut self, v: u64) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, a: u64, b: u64) {
        assert_ne!(a, b, "no loops");
        self.adj.entry(a).or_default().insert(b);
        self.adj.entry(b).or_default().insert(a);
    }

    pub fn has_edge(&self, a: u64, b: u64) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn vertices(&self) -> impl Iterator<Item = u64> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, v: u64) -> usize {
        self.adj.get(&v).map_or(0, |n| n.len())
    }

    pub fn neighbours(&self, v: u64) -> impl Iterator<Item = u64> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn edges(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for (v, ns) in &self.adj {
            for n in ns {
                if v < n {
                    out.push((*v, *n));
                }
            }
        }
        out
    }

    /// Connected components as vertex sets.
    pub fn components(&self) -> Vec<BTreeSet<u64>> {
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.adj.keys() {
            if seen.contains(v) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![*v];
            while let Some(x) = stack.pop() {
                if !comp.insert(x) {
                    continue;
                }
                seen.insert(x);
                stack.extend(self.neighbours(x));
            }
            out.push(comp);
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for v in self.vertices() {
            out.push_str(&format!("  v{v};\n"));
        }
        for (a, b) in self.edges() {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// Edge-list JSON: vertices plus (a, b) pairs.
    pub fn to_edge_list_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices().collect::<Vec<_>>(),
            "edges": self.edges(),
        })
    }
}

/// A flower graph: one center, one cycle of length `n + 3` per set element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowerGraph {
    pub graph: Graph,
    pub center: u64,
}

/// Builds the flower of a finite set with vertex ids from `base`.
pub fn flower_from(set: &BTreeSet<u64>, base: u64) -> FlowerGraph {
    let mut graph = Graph::new();
    let center = base;
    graph.add_vertex(center);
    let mut next = base + 1;
    for n in set {
        // A cycle of length n + 3 through the center: n + 2 fresh vertices.
        let len = n + 3;
        let mut prev = center;
        for _ in 0..len - 1 {
            graph.add_edge(prev, next);
            prev = next;
            next += 1;
        }
        graph.add_edge(prev, center);
    }
    FlowerGraph { graph, center }
}

pub fn flower(set: &BTreeSet<u64>) -> FlowerGraph {
    flower_from(set, 0)
}

/// Decoded content of a bouquet graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedFamily {
    /// Multiset of decoded finite sets, sorted for determinism.
    pub sets: Vec<BTreeSet<u64>>,
    pub isolated: usize,
}

/// Decodes a disjoint union of flowers and isolated vertices.
///
/// Conventions: a single vertex decodes as isolated (not as an empty
/// flower); a bare cycle of length `l` decodes as the singleton set
/// `{l - 3}` even though its center is ambiguous. Anything else with two
/// vertices of degree at least 3, or with non-cycle structure, is
/// malformed.
pub fn decode(graph: &Graph) -> Result<DecodedFamily> {
    let mut out = DecodedFamily::default();
    for comp in graph.components() {
        if comp.len() == 1 {
            out.isolated += 1;
            continue;
        }
        out.sets.push(decode_component(graph, &comp)?);
    }
    out.sets.sort();
    Ok(out)
}

fn decode_component(graph: &Graph, comp: &BTreeSet<u64>) -> Result<BTreeSet<u64>> {
    let centers: Vec<u64> = comp.iter().copied().filter(|v| graph.degree(*v) >= 3).collect();
    let center = match centers.as_slice() {
        [] => {
            // Every vertex degree 2: must be one bare cycle.
            if comp.iter().any(|v| graph.degree(*v) != 2) {
                return Err(Error::Malformed(
                    "component with dangling vertices is not a flower".into(),
                ));
            }
            let len = comp.len() as u64;
            if !cycle_check(graph, comp) {
                return Err(Error::Malformed("degree-2 component is not a cycle".into()));
            }
            if len < 3 {
                return Err(Error::Malformed(format!("cycle of length {len} too short")));
            }
            return Ok([len - 3].into_iter().collect());
        }
        [c] => *c,
        _ => {
            return Err(Error::Malformed(format!(
                "component has {} vertices of degree >= 3",
                centers.len()
            )))
        }
    };
    // Remove the center; the petals must fall apart into paths whose ends
    // are the center's neighbours.
    let mut petals: Vec<u64> = Vec::new();
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    for v in comp {
        if *v == center || seen.contains(v) {
            continue;
        }
        if graph.degree(*v) != 2 {
            return Err(Error::Malformed(format!(
                "petal vertex {v} has degree {}",
                graph.degree(*v)
            )));
        }
        // Walk the path through v avoiding the center.
        let mut path = vec![*v];
        seen.insert(*v);
        for start_dir in graph.neighbours(*v) {
            if start_dir == center {
                continue;
            }
            let mut prev = *v;
            let mut cur = start_dir;
            while cur != center {
                if !seen.insert(cur) {
                    return Err(Error::Malformed("petals intersect off-center".into()));
                }
                path.push(cur);
                let next = graph
                    .neighbours(cur)
                    .find(|n| *n != prev)
                    .ok_or_else(|| Error::Malformed("petal path dead-ends".into()))?;
                prev = cur;
                cur = next;
            }
        }
        // Path of p vertices closes a cycle of length p + 1 through the
        // center; cycle length n + 3 codes n.
        let ends_at_center = path
            .iter()
            .filter(|x| graph.has_edge(**x, center))
            .count();
        if ends_at_center < 2 {
            return Err(Error::Malformed("petal does not close at the center".into()));
        }
        let cycle_len = path.len() as u64 + 1;
        if cycle_len < 3 {
            return Err(Error::Malformed("petal cycle too short".into()));
        }
        petals.push(cycle_len - 3);
    }
    let set: BTreeSet<u64> = petals.iter().copied().collect();
    if set.len() != petals.len() {
        return Err(Error::Malformed(
            "duplicate cycle lengths in one flower".into(),
        ));
    }
    Ok(set)
}

fn cycle_check(graph: &Graph, comp: &BTreeSet<u64>) -> bool {
    // Connected and all degrees 2 implies a single cycle; connectivity is
    // given (components), so check the edge count.
    let edges: usize = comp.iter().map(|v| graph.degree(*v)).sum::<usize>() / 2;
    edges == comp.len()
}

/// One monotone column of a staged enumeration: (stage, value) events.
pub type StagedColumn = Vec<(u64, u64)>;

/// A staged enumeration with columns; columns grow monotonely in stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StagedEnumeration {
    pub columns: Vec<StagedColumn>,
}

impl StagedEnumeration {
    pub fn column_at(&self, n: usize, stage: u64) -> BTreeSet<u64> {
        self.columns[n]
            .iter()
            .filter(|(s, _)| *s <= stage)
            .map(|(_, v)| *v)
            .collect()
    }
}

/// Delta log entry of a staged graph presentation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDelta {
    pub stage: u64,
    pub new_vertices: Vec<u64>,
    pub new_edges: Vec<(u64, u64)>,
}

/// Staged bouquet presentation produced by the encoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StagedPresentation {
    pub deltas: Vec<GraphDelta>,
    pub copies: u64,
}

impl StagedPresentation {
    pub fn snapshot(&self, stage: u64) -> Graph {
        let mut g = Graph::new();
        for d in self.deltas.iter().filter(|d| d.stage <= stage) {
            for v in &d.new_vertices {
                g.add_vertex(*v);
            }
            for (a, b) in &d.new_edges {
                g.add_edge(*a, *b);
            }
        }
        g
    }
}

/// Stage-machine encoder: maintains, per column and copy, a flower that
/// gains a fresh cycle of length `v + 3` whenever `v` enters the column,
/// plus `copies` isolated vertices per stage block.
pub fn encode_enumeration(
    source: &StagedEnumeration,
    stages: u64,
    copies: u64,
) -> StagedPresentation {
    let mut deltas = Vec::new();
    let mut next_id: u64 = 0;
    let mut fresh = |k: u64, next_id: &mut u64| {
        let v = *next_id;
        *next_id += k;
        v
    };
    // Flower centers for every (column, copy) exist from stage 0.
    let mut centers = BTreeMap::new();
    let mut initial = GraphDelta {
        stage: 0,
        new_vertices: vec![],
        new_edges: vec![],
    };
    for (n, _) in source.columns.iter().enumerate() {
        for copy in 0..copies {
            let c = fresh(1, &mut next_id);
            centers.insert((n, copy), c);
            initial.new_vertices.push(c);
        }
    }
    deltas.push(initial);

    for stage in 1..=stages {
        let mut delta = GraphDelta {
            stage,
            new_vertices: vec![],
            new_edges: vec![],
        };
        for (n, column) in source.columns.iter().enumerate() {
            for (event_stage, value) in column {
                if *event_stage != stage {
                    continue;
                }
                for copy in 0..copies {
                    let center = centers[&(n, copy)];
                    let len = value + 3;
                    let first = fresh(len - 1, &mut next_id);
                    let mut prev = center;
                    for i in 0..len - 1 {
                        let v = first + i;
                        delta.new_vertices.push(v);
                        delta.new_edges.push((prev, v));
                        prev = v;
                    }
                    delta.new_edges.push((prev, center));
                }
            }
        }
        // One block of isolated vertices per stage.
        for _ in 0..copies {
            let v = fresh(1, &mut next_id);
            delta.new_vertices.push(v);
        }
        deltas.push(delta);
    }
    StagedPresentation { deltas, copies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(xs: &[u64]) -> BTreeSet<u64> {
        xs.iter().copied().collect()
    }

    #[test]
    fn flower_shapes() {
        assert_eq!(flower(&set(&[])).graph.vertex_count(), 1);
        let triangle = flower(&set(&[0]));
        assert_eq!(triangle.graph.vertex_count(), 3);
        assert_eq!(triangle.graph.edge_count(), 3);
        let two = flower(&set(&[0, 2]));
        assert_eq!(two.graph.vertex_count(), 7);
    }

    #[test]
    fn decode_round_trip_examples() {
        let f = flower(&set(&[1, 4]));
        let d = decode(&f.graph).unwrap();
        assert_eq!(d.sets, vec![set(&[1, 4])]);
        assert_eq!(d.isolated, 0);

        let mut single = Graph::new();
        single.add_vertex(9);
        let d = decode(&single).unwrap();
        assert_eq!(d.isolated, 1);
        assert!(d.sets.is_empty());
    }

    #[test]
    fn decode_rejects_shared_edge_triangles() {
        // Two triangles sharing an edge: vertices a,b shared by cycles.
        let mut g = Graph::new();
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 0);
        g.add_edge(1, 3);
        g.add_edge(3, 0);
        assert!(decode(&g).is_err());
    }

    #[test]
    fn vertex_count_formula() {
        for s in [set(&[]), set(&[0]), set(&[0, 2]), set(&[1, 3, 7])] {
            let f = flower(&s);
            let expected = 1 + s.iter().map(|n| n + 2).sum::<u64>();
            assert_eq!(f.graph.vertex_count() as u64, expected);
        }
    }

    #[test]
    fn encoder_stage_examples() {
        // Column {0} entering at stage 2, one copy.
        let source = StagedEnumeration {
            columns: vec![vec![(2, 0)]],
        };
        let pres = encode_enumeration(&source, 3, 1);
        let at1 = pres.snapshot(1);
        let d1 = decode(&at1).unwrap();
        assert!(d1.sets.is_empty()); // bare center counts as isolated
        let at3 = pres.snapshot(3);
        let d3 = decode(&at3).unwrap();
        assert_eq!(d3.sets, vec![set(&[0])]);
    }

    #[test]
    fn encoder_empty_and_copies() {
        let source = StagedEnumeration {
            columns: vec![vec![(1, 1)], vec![(1, 1)]],
        };
        let pres = encode_enumeration(&source, 2, 2);
        let d = decode(&pres.snapshot(2)).unwrap();
        assert_eq!(d.sets.len(), 4); // two identical columns x two copies
        assert!(d.sets.iter().all(|s| *s == set(&[1])));

        let empty = StagedEnumeration { columns: vec![] };
        let pres = encode_enumeration(&empty, 3, 2);
        let d = decode(&pres.snapshot(3)).unwrap();
        assert!(d.sets.is_empty());
        assert_eq!(d.isolated, 6);
    }

    proptest! {
        #[test]
        fn decode_inverts_flower(xs in prop::collection::btree_set(0u64..30, 0..6)) {
            let f = flower(&xs);
            let d = decode(&f.graph).unwrap();
            if xs.is_empty() {
                prop_assert_eq!(d.isolated, 1);
                prop_assert!(d.sets.is_empty());
            } else {
                prop_assert_eq!(&d.sets, &vec![xs.clone()]);
            }
        }

        #[test]
        fn encoder_decoder_coherent(
            cols in prop::collection::vec(
                prop::collection::vec((1u64..6, 0u64..12), 0..4),
                0..4
            )
        ) {
            let source = StagedEnumeration {
                columns: cols
                    .iter()
                    .map(|c| {
                        let mut dedup: Vec<(u64, u64)> = Vec::new();
                        for (s, v) in c {
                            if !dedup.iter().any(|(_, w)| w == v) {
                                dedup.push((*s, *v));
                            }
                        }
                        dedup
                    })
                    .collect(),
            };
            let stage = 6;
            let pres = encode_enumeration(&source, stage, 1);
            let decoded = decode(&pres.snapshot(stage)).unwrap();
            let mut expected: Vec<BTreeSet<u64>> = source
                .columns
                .iter()
                .enumerate()
                .map(|(n, _)| source.column_at(n, stage))
                .filter(|s| !s.is_empty())
                .collect();
            expected.sort();
            prop_assert_eq!(decoded.sets, expected);
        }
    }
}
