//! Whitehead graphs of a collection at a vertex, and admissible cuts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::cover::{self, LinkPoint, Turn};
use crate::error::Result;
use crate::graph::{AllowedFamily, MarkedGraph, VertexId};
use crate::words::BassWord;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteheadGraph {
    pub vertex: VertexId,
    /// Link of the standard lift, in deterministic order.
    pub points: Vec<LinkPoint>,
    /// Pairs of indices into `points`, smaller index first.
    pub edges: BTreeSet<(usize, usize)>,
    /// Generator of the vertex group, as a permutation of indices.
    pub action: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutKind {
    /// A component whose translates are pairwise disjoint; `stabilizer_index`
    /// is the size of its orbit.
    Component { component: BTreeSet<LinkPoint>, stabilizer_index: u64 },
    /// A cut point and a component of its component minus the point that
    /// avoids the orbit of the point.
    CutPoint { point: LinkPoint, side: BTreeSet<LinkPoint> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleCut {
    pub vertex: VertexId,
    pub kind: CutKind,
}

/// Canonical turn orbits crossed by the axes of the collection.
pub fn collection_turns(g: &MarkedGraph, collection: &[BassWord]) -> Result<BTreeSet<Turn>> {
    let mut turns = BTreeSet::new();
    for w in collection {
        turns.extend(cover::period_turn_orbits(g, w)?);
    }
    Ok(turns)
}

pub fn whitehead_graph(g: &MarkedGraph, collection: &[BassWord], v: VertexId) -> Result<WhiteheadGraph> {
    Ok(whitehead_from_turns(g, &collection_turns(g, collection)?, v))
}

pub(crate) fn whitehead_from_turns(g: &MarkedGraph, turns: &BTreeSet<Turn>, v: VertexId) -> WhiteheadGraph {
    let points = cover::link_points(g, v);
    let index: BTreeMap<LinkPoint, usize> = points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let action = points.iter().map(|p| index[&p.shift(g, 1)]).collect();
    let mut edges = BTreeSet::new();
    for t in turns.iter().filter(|t| t.vertex == v) {
        for u in t.orbit(g) {
            let (x, y) = u.points();
            let (i, j) = (index[&x], index[&y]);
            edges.insert((i.min(j), i.max(j)));
        }
    }
    WhiteheadGraph { vertex: v, points, edges, action }
}

impl WhiteheadGraph {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.points.len()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Components of the graph restricted to `within` with `removed` deleted,
    /// ordered by least element.
    fn components(&self, adj: &[Vec<usize>], within: &BTreeSet<usize>, removed: Option<usize>) -> Vec<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in within {
            if Some(s) == removed || seen.contains(&s) {
                continue;
            }
            let mut comp = BTreeSet::from([s]);
            let mut stack = vec![s];
            seen.insert(s);
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if Some(y) != removed && within.contains(&y) && seen.insert(y) {
                        comp.insert(y);
                        stack.push(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn connected_components(&self) -> Vec<BTreeSet<usize>> {
        let all = (0..self.points.len()).collect();
        self.components(&self.neighbours(), &all, None)
    }

    fn translate(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().map(|&i| self.action[i]).collect()
    }

    /// Orbit of `i` under the vertex group.
    pub fn orbit_of_point(&self, i: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([i]);
        let mut j = self.action[i];
        while j != i {
            out.insert(j);
            j = self.action[j];
        }
        out
    }

    /// Least `n >= 1` with `σ^n(set) = set`.
    pub fn orbit_size(&self, set: &BTreeSet<usize>) -> u64 {
        let mut cur = self.translate(set);
        let mut n = 1;
        while cur != *set {
            cur = self.translate(&cur);
            n += 1;
        }
        n
    }

    pub fn point_set(&self, set: &BTreeSet<usize>) -> BTreeSet<LinkPoint> {
        set.iter().map(|&i| self.points[i]).collect()
    }

    pub fn is_invariant_edge_set(&self) -> bool {
        self.edges.iter().all(|&(i, j)| {
            let (x, y) = (self.action[i], self.action[j]);
            self.edges.contains(&(x.min(y), x.max(y)))
        })
    }
}

pub fn has_isolated_link_vertex(w: &WhiteheadGraph) -> bool {
    let mut deg = vec![0usize; w.points.len()];
    for &(i, j) in &w.edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg.contains(&0)
}

/// First admissible cut in the fixed scan order: components before cut points.
pub fn find_admissible_cut(w: &WhiteheadGraph, a: &AllowedFamily) -> Option<AdmissibleCut> {
    let adj = w.neighbours();
    let all: BTreeSet<usize> = (0..w.points.len()).collect();
    let comps = w.components(&adj, &all, None);
    if comps.len() > 1 {
        for c in &comps {
            let n = w.orbit_size(c);
            if a.allows(w.vertex, n) {
                return Some(AdmissibleCut {
                    vertex: w.vertex,
                    kind: CutKind::Component { component: w.point_set(c), stabilizer_index: n },
                });
            }
        }
    }
    for p in 0..w.points.len() {
        let home = comps.iter().find(|c| c.contains(&p)).expect("every point lies in a component");
        let sides = w.components(&adj, home, Some(p));
        if sides.len() < 2 {
            continue;
        }
        let orbit = w.orbit_of_point(p);
        if let Some(side) = sides.iter().find(|s| s.is_disjoint(&orbit)) {
            return Some(AdmissibleCut {
                vertex: w.vertex,
                kind: CutKind::CutPoint { point: w.points[p], side: w.point_set(side) },
            });
        }
    }
    None
}

/// Scans vertices by name and returns the first admissible cut.
pub fn find_cut_anywhere(g: &MarkedGraph, a: &AllowedFamily, collection: &[BassWord]) -> Result<Option<AdmissibleCut>> {
    let turns = collection_turns(g, collection)?;
    let mut vertices: Vec<VertexId> = g.vertex_ids().collect();
    vertices.sort_by_key(|&v| g.vertex_name(v).to_string());
    for v in vertices {
        if let Some(cut) = find_admissible_cut(&whitehead_from_turns(g, &turns, v), a) {
            return Ok(Some(cut));
        }
    }
    Ok(None)
}

/// Graphviz rendering; cut component or side in light blue, cut point in red.
pub fn to_dot(g: &MarkedGraph, w: &WhiteheadGraph, cut: Option<&AdmissibleCut>) -> String {
    let (marked, point) = match cut.map(|c| &c.kind) {
        Some(CutKind::Component { component, .. }) => (component.clone(), None),
        Some(CutKind::CutPoint { point, side }) => (side.clone(), Some(*point)),
        None => (BTreeSet::new(), None),
    };
    let mut out = String::new();
    writeln!(out, "graph \"{}\" {{", g.vertex_name(w.vertex)).unwrap();
    for p in &w.points {
        let name = p.display(g);
        let colour = if Some(*p) == point {
            " style=filled fillcolor=red"
        } else if marked.contains(p) {
            " style=filled fillcolor=lightblue"
        } else {
            ""
        };
        writeln!(out, "  \"{name}\" [label=\"{name}\"{colour}];").unwrap();
    }
    for &(i, j) in &w.edges {
        writeln!(out, "  \"{}\" -- \"{}\";", w.points[i].display(g), w.points[j].display(g)).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, EdgeId};
    use crate::words::parse_word;

    fn manual(n: usize, edges: &[(usize, usize)], action: Vec<usize>) -> WhiteheadGraph {
        let points = (0..n).map(|k| LinkPoint { edge: EdgeId(0), coset: k as u64 }).collect();
        WhiteheadGraph {
            vertex: VertexId(0),
            points,
            edges: edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect(),
            action,
        }
    }

    #[test]
    fn component_cut() {
        // two components swapped by the action: orbit size 2
        let w = manual(4, &[(0, 1), (2, 3)], vec![2, 3, 0, 1]);
        let a = AllowedFamily::from_sets(vec![BTreeSet::from([2])]).unwrap();
        match find_admissible_cut(&w, &a).unwrap().kind {
            CutKind::Component { stabilizer_index, component } => {
                assert_eq!(stabilizer_index, 2);
                assert_eq!(component.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn path_graph_cut_point() {
        let w = manual(3, &[(0, 1), (1, 2)], vec![0, 1, 2]);
        let a = AllowedFamily::from_sets(vec![BTreeSet::from([1])]).unwrap();
        let cut = find_admissible_cut(&w, &a).unwrap();
        assert_eq!(
            cut.kind,
            CutKind::CutPoint { point: w.points[1], side: BTreeSet::from([w.points[0]]) }
        );
    }

    #[test]
    fn cycle_has_no_cut() {
        let w = manual(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![1, 2, 3, 0]);
        let a = AllowedFamily::from_sets(vec![BTreeSet::from([1])]).unwrap();
        assert!(find_admissible_cut(&w, &a).is_none());
        assert!(!has_isolated_link_vertex(&w));
        assert!(has_isolated_link_vertex(&manual(2, &[], vec![0, 1])));
    }

    #[test]
    fn subdivided_bs12_whitehead_graph() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nvertex w\nedge e1 v w 1 1\nedge e2 w v 1 2\nbasepoint v\n").unwrap();
        let word = parse_word(&g, "e1 e2").unwrap();
        let w = whitehead_graph(&g, std::slice::from_ref(&word), VertexId(1)).unwrap();
        assert_eq!(w.points.len(), 2);
        assert_eq!(w.edges.len(), 1);
        let at_v = whitehead_graph(&g, &[word], VertexId(0)).unwrap();
        assert_eq!(at_v.points.len(), 3);
        assert!(at_v.is_invariant_edge_set());
    }

    #[test]
    fn bs24_whitehead_graph() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 2 4\nbasepoint v\n").unwrap();
        let word = parse_word(&g, "e v ~e v").unwrap();
        let w = whitehead_graph(&g, &[word], VertexId(0)).unwrap();
        assert_eq!(w.points.len(), 6);
        assert!(w.is_invariant_edge_set());
        let comps = w.connected_components();
        assert_eq!(comps.len(), 2);
        // the e-fibre is one component, fixed by the action
        let e_fibre: BTreeSet<usize> = (0..6).filter(|&i| !w.points[i].edge.is_reversed()).collect();
        assert!(comps.contains(&e_fibre));
        let amin = g.amin_sets().unwrap();
        assert!(find_admissible_cut(&w, &amin).is_none());
        let all = AllowedFamily::all_cyclic(1);
        assert!(matches!(
            find_admissible_cut(&w, &all).unwrap().kind,
            CutKind::Component { stabilizer_index: 1, .. }
        ));
    }

    #[test]
    fn dot_export_lists_every_point() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 2 3\nbasepoint v\n").unwrap();
        let w = whitehead_graph(&g, &[parse_word(&g, "e").unwrap()], VertexId(0)).unwrap();
        let dot = to_dot(&g, &w, None);
        assert_eq!(dot.matches("[label=").count(), 5);
        assert_eq!(dot.matches(" -- ").count(), w.edges.len());
    }
}
