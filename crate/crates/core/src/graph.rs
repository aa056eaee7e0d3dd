//! Labelled graphs of infinite cyclic groups.
//!
//! A [`MarkedGraph`] stores each unoriented edge once; an [`EdgeId`] names one
//! orientation of it. The label `λ(e)` of an oriented edge is the index of the
//! edge group in the vertex group at the origin of `e`, with its sign.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::words::{self, BassWord, Syllable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// An oriented edge: `2 * index` is the stored orientation, `2 * index + 1` its reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn forward(index: usize) -> Self {
        EdgeId(2 * index)
    }

    pub fn rev(self) -> Self {
        EdgeId(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0 >> 1
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub origin: VertexId,
    pub terminus: VertexId,
    pub label_origin: i64,
    pub label_terminus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    pub(crate) vertices: Vec<String>,
    pub(crate) edges: Vec<Edge>,
    pub(crate) basepoint: VertexId,
    pub(crate) marking: Vec<(String, BassWord)>,
}

/// Per-vertex index sets `I_v`: a subgroup of `G_v` is allowed as an edge
/// group when its index is a multiple of some element of `I_v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllowedFamily {
    sets: Vec<BTreeSet<u64>>,
}

pub fn normalize_indices(set: impl IntoIterator<Item = u64>) -> BTreeSet<u64> {
    let sorted: BTreeSet<u64> = set.into_iter().filter(|&i| i > 0).collect();
    let mut kept: BTreeSet<u64> = BTreeSet::new();
    for i in sorted {
        if !kept.iter().any(|k| i % k == 0) {
            kept.insert(i);
        }
    }
    kept
}

impl AllowedFamily {
    /// `I_v = {1}` everywhere: every cyclic subgroup is an allowed edge group.
    pub fn all_cyclic(vertex_count: usize) -> Self {
        AllowedFamily { sets: vec![BTreeSet::from([1]); vertex_count] }
    }

    pub fn from_sets(sets: Vec<BTreeSet<u64>>) -> Result<Self> {
        let sets: Vec<_> = sets.into_iter().map(normalize_indices).collect();
        if sets.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidInput("empty allowed set".into()));
        }
        Ok(AllowedFamily { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn at(&self, v: VertexId) -> &BTreeSet<u64> {
        &self.sets[v.0]
    }

    pub fn allows(&self, v: VertexId, index: u64) -> bool {
        self.sets[v.0].iter().any(|i| index.is_multiple_of(*i))
    }

    pub(crate) fn push(&mut self, set: BTreeSet<u64>) {
        self.sets.push(normalize_indices(set));
    }

    pub(crate) fn set(&mut self, v: VertexId, set: BTreeSet<u64>) {
        self.sets[v.0] = normalize_indices(set);
    }

    pub(crate) fn remove(&mut self, v: VertexId) {
        self.sets.remove(v.0);
    }

    /// Family on `⟨a_v^n⟩` induced from the family at `v`.
    pub fn restricted_to_power(&self, v: VertexId, n: u64) -> BTreeSet<u64> {
        normalize_indices(self.sets[v.0].iter().map(|&i| i / gcd(i, n)))
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    Z,
    Z2,
    KleinBottle,
    SolvableBS(i64),
    NonElementarySolvableFree,
}

impl Elementary {
    /// `Z`, `Z²` and the Klein bottle group.
    pub fn is_elementary(self) -> bool {
        matches!(self, Elementary::Z | Elementary::Z2 | Elementary::KleinBottle)
    }
}

pub(crate) fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl MarkedGraph {
    /// Builds a graph from parts, checking names, labels and connectivity.
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, basepoint: VertexId) -> Result<Self> {
        let g = MarkedGraph { vertices, edges, basepoint, marking: Vec::new() };
        g.check()?;
        Ok(g)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for n in self.vertices.iter().chain(self.edges.iter().map(|e| &e.name)) {
            if !is_name(n) {
                return Err(Error::InvalidInput(format!("bad name {n:?}")));
            }
            if !names.insert(n.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate name {n}")));
            }
        }
        if self.vertices.is_empty() || self.basepoint.0 >= self.vertices.len() {
            return Err(Error::InvalidInput("missing basepoint".into()));
        }
        for e in &self.edges {
            if e.label_origin == 0 || e.label_terminus == 0 {
                return Err(Error::InvalidInput(format!("zero label on {}", e.name)));
            }
            if e.origin.0 >= self.vertices.len() || e.terminus.0 >= self.vertices.len() {
                return Err(Error::InvalidInput(format!("dangling edge {}", e.name)));
            }
        }
        if !self.is_connected() {
            return Err(Error::InvalidInput("disconnected graph".into()));
        }
        for (name, w) in &self.marking {
            if !w.is_loop_at(self, self.basepoint) {
                return Err(Error::InvalidInput(format!("marking word {name} is not a loop")));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    /// All oriented edges, both orientations of each stored edge.
    pub fn oriented_edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..2 * self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn marking(&self) -> &[(String, BassWord)] {
        &self.marking
    }

    pub fn set_marking(&mut self, marking: Vec<(String, BassWord)>) -> Result<()> {
        for (name, w) in &marking {
            if !w.is_loop_at(self, self.basepoint) {
                return Err(Error::InvalidInput(format!("marking word {name} is not a loop")));
            }
        }
        self.marking = marking;
        Ok(())
    }

    pub fn origin(&self, e: EdgeId) -> VertexId {
        let d = self.edge(e);
        if e.is_reversed() {
            d.terminus
        } else {
            d.origin
        }
    }

    pub fn terminus(&self, e: EdgeId) -> VertexId {
        self.origin(e.rev())
    }

    /// Signed label of `e` at its origin.
    pub fn label(&self, e: EdgeId) -> i64 {
        let d = self.edge(e);
        if e.is_reversed() {
            d.label_terminus
        } else {
            d.label_origin
        }
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        self.origin(e) == self.terminus(e)
    }

    /// `e` for the stored orientation, `~e` for the reverse.
    pub fn edge_name(&self, e: EdgeId) -> String {
        let d = self.edge(e);
        if e.is_reversed() {
            format!("~{}", d.name)
        } else {
            d.name.clone()
        }
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name).map(VertexId)
    }

    /// Resolves `e` or `~e`.
    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        let (base, reversed) = match name.strip_prefix('~') {
            Some(rest) => (rest, true),
            None => (name, false),
        };
        let i = self.edges.iter().position(|e| e.name == base)?;
        let id = EdgeId::forward(i);
        Some(if reversed { id.rev() } else { id })
    }

    /// Oriented edges with origin `v`, ordered by display name.
    pub fn edges_from(&self, v: VertexId) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.oriented_edges().filter(|&e| self.origin(e) == v).collect();
        out.sort_by_key(|&e| self.edge_name(e));
        out
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.oriented_edges().filter(|&e| self.origin(e) == v).count()
    }

    fn is_connected(&self) -> bool {
        let all: BTreeSet<VertexId> = self.vertex_ids().collect();
        self.component_of(VertexId(0), &BTreeSet::new()).len() == all.len()
    }

    /// Vertices reachable from `start` without crossing the `excluded` edge indices.
    pub(crate) fn component_of(&self, start: VertexId, excluded: &BTreeSet<usize>) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in self.oriented_edges() {
                if excluded.contains(&e.index()) || self.origin(e) != v {
                    continue;
                }
                let t = self.terminus(e);
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Shortest edge path from `from` to `to` staying inside `allowed_edges`
    /// (edge indices), as a word with no vertex powers.
    pub(crate) fn tree_path(
        &self,
        from: VertexId,
        to: VertexId,
        allowed_edges: Option<&BTreeSet<usize>>,
    ) -> Option<BassWord> {
        let mut prev: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for e in self.edges_from(v) {
                if allowed_edges.is_some_and(|a| !a.contains(&e.index())) {
                    continue;
                }
                let t = self.terminus(e);
                if seen.insert(t) {
                    prev.insert(t, e);
                    queue.push_back(t);
                }
            }
        }
        if !seen.contains(&to) {
            return None;
        }
        let mut letters = Vec::new();
        let mut cur = to;
        while cur != from {
            let e = prev[&cur];
            letters.push(Syllable::Edge(e));
            cur = self.origin(e);
        }
        letters.reverse();
        Some(BassWord::new(from, letters))
    }

    /// `|E| - |V| + 1` for the underlying graph.
    pub fn betti_number(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub(crate) fn fresh_name(&self, base: &str) -> String {
        (1..)
            .map(|k| format!("{base}_x{k}"))
            .find(|n| !self.vertices.contains(n) && !self.edges.iter().any(|e| &e.name == n))
            .expect("unbounded counter")
    }

    /// Classification of the presented group, read off the reduced form.
    pub fn classify_elementary(&self) -> Elementary {
        let a = AllowedFamily::all_cyclic(self.vertex_count());
        let (reduced, _, _) = crate::moves::reduce_graph(self, &a).expect("reduction of a valid graph");
        classify_reduced(&reduced)
    }

    /// `𝒜_min`: absolute values of the labels at each vertex of a reduced graph.
    pub fn amin_sets(&self) -> Result<AllowedFamily> {
        if crate::moves::first_collapsible(self).is_some() {
            return Err(Error::NotReduced);
        }
        let sets = self
            .vertex_ids()
            .map(|v| {
                let labels: BTreeSet<u64> = self.edges_from(v).iter().map(|&e| self.label(e).unsigned_abs()).collect();
                if labels.is_empty() {
                    BTreeSet::from([1])
                } else {
                    labels
                }
            })
            .collect();
        AllowedFamily::from_sets(sets)
    }

    /// Replaces every loop by a path of length two through a new vertex.
    pub fn subdivide_loops(&self, allowed: &AllowedFamily) -> (MarkedGraph, AllowedFamily) {
        let (g, a, _) = crate::moves::subdivide_loops(self, allowed).expect("subdivision of a valid graph");
        (g, a)
    }
}

pub(crate) fn classify_reduced(g: &MarkedGraph) -> Elementary {
    match (g.vertex_count(), g.edge_count()) {
        (1, 0) => Elementary::Z,
        (1, 1) => {
            let e = &g.edges[0];
            let (p, q) = (e.label_origin, e.label_terminus);
            match (p.abs() == 1, q.abs() == 1) {
                (true, true) if p == q => Elementary::Z2,
                (true, true) => Elementary::KleinBottle,
                (true, false) => Elementary::SolvableBS(q * p),
                (false, true) => Elementary::SolvableBS(p * q),
                (false, false) => Elementary::NonElementarySolvableFree,
            }
        }
        _ => Elementary::NonElementarySolvableFree,
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a `gbs v1` document.
pub fn parse_graph(text: &str) -> Result<(MarkedGraph, AllowedFamily)> {
    let last = text.lines().count().max(1);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "gbs v1")) => {}
        Some((n, _)) => return Err(parse_err(n, "expected header `gbs v1`")),
        None => return Err(parse_err(1, "empty document")),
    }

    let mut vertices: Vec<String> = Vec::new();
    let mut raw_edges: Vec<(usize, String, String, String, i64, i64)> = Vec::new();
    let mut basepoint: Option<(usize, String)> = None;
    let mut allowed: Vec<(usize, String, Vec<u64>)> = Vec::new();
    let mut gens: Vec<(usize, String, String)> = Vec::new();

    for (n, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "vertex" => {
                if tokens.len() != 2 || !is_name(tokens[1]) {
                    return Err(parse_err(n, "expected `vertex <name>`"));
                }
                vertices.push(tokens[1].to_string());
            }
            "edge" => {
                if tokens.len() != 6 || !is_name(tokens[1]) {
                    return Err(parse_err(n, "expected `edge <name> <origin> <terminus> <label> <label>`"));
                }
                let parse_label = |s: &str| -> Result<i64> {
                    let v: i64 = s.parse().map_err(|_| parse_err(n, format!("bad label {s:?}")))?;
                    if v == 0 {
                        return Err(parse_err(n, "zero label"));
                    }
                    Ok(v)
                };
                let p = parse_label(tokens[4])?;
                let q = parse_label(tokens[5])?;
                raw_edges.push((n, tokens[1].into(), tokens[2].into(), tokens[3].into(), p, q));
            }
            "basepoint" => {
                if tokens.len() != 2 {
                    return Err(parse_err(n, "expected `basepoint <vertex>`"));
                }
                if basepoint.is_some() {
                    return Err(parse_err(n, "duplicate basepoint"));
                }
                basepoint = Some((n, tokens[1].into()));
            }
            "allowed" => {
                if tokens.len() < 3 {
                    return Err(parse_err(n, "expected `allowed <vertex> <i1> ...`"));
                }
                let values = tokens[2..]
                    .iter()
                    .map(|s| match s.parse::<u64>() {
                        Ok(v) if v > 0 => Ok(v),
                        _ => Err(parse_err(n, format!("bad allowed index {s:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                allowed.push((n, tokens[1].into(), values));
            }
            "gen" => {
                if tokens.len() < 3 || tokens[2] != "=" || !is_name(tokens[1]) {
                    return Err(parse_err(n, "expected `gen <name> = <word>`"));
                }
                gens.push((n, tokens[1].into(), tokens[3..].join(" ")));
            }
            other => return Err(parse_err(n, format!("unknown directive {other:?}"))),
        }
    }

    let mut seen = BTreeSet::new();
    for v in &vertices {
        if !seen.insert(v.clone()) {
            return Err(parse_err(last, format!("duplicate vertex {v}")));
        }
    }
    let lookup = |n: usize, name: &str| -> Result<VertexId> {
        vertices
            .iter()
            .position(|v| v == name)
            .map(VertexId)
            .ok_or_else(|| parse_err(n, format!("dangling vertex reference {name:?}")))
    };
    let mut edges = Vec::new();
    for (n, name, o, t, p, q) in &raw_edges {
        if !seen.insert(name.clone()) {
            return Err(parse_err(*n, format!("duplicate name {name}")));
        }
        edges.push(Edge {
            name: name.clone(),
            origin: lookup(*n, o)?,
            terminus: lookup(*n, t)?,
            label_origin: *p,
            label_terminus: *q,
        });
    }
    let (bn, bname) = basepoint.ok_or_else(|| parse_err(last, "missing basepoint"))?;
    let base = lookup(bn, &bname)?;

    let mut graph = MarkedGraph { vertices: vertices.clone(), edges, basepoint: base, marking: Vec::new() };
    if !graph.is_connected() {
        return Err(parse_err(last, "disconnected graph"));
    }

    let mut sets = vec![BTreeSet::from([1u64]); graph.vertex_count()];
    let mut assigned = BTreeSet::new();
    for (n, v, values) in allowed {
        let id = lookup(n, &v)?;
        if !assigned.insert(id) {
            return Err(parse_err(n, format!("duplicate allowed line for {v}")));
        }
        sets[id.0] = values.into_iter().collect();
    }
    let family = AllowedFamily::from_sets(sets)?;

    let mut marking = Vec::new();
    for (n, name, word) in gens {
        if marking.iter().any(|(m, _): &(String, BassWord)| *m == name) {
            return Err(parse_err(n, format!("duplicate generator {name}")));
        }
        let w = words::parse_word(&graph, &word).map_err(|e| parse_err(n, e.to_string()))?;
        if !w.is_loop_at(&graph, graph.basepoint) {
            return Err(parse_err(n, format!("generator {name} is not a loop at the basepoint")));
        }
        marking.push((name, w));
    }
    graph.marking = marking;
    Ok((graph, family))
}

/// Writes a `gbs v1` document; `parse_graph` reads it back unchanged.
pub fn serialize_graph(g: &MarkedGraph, a: &AllowedFamily) -> String {
    let mut out = String::from("gbs v1\n");
    for v in &g.vertices {
        writeln!(out, "vertex {v}").unwrap();
    }
    for e in &g.edges {
        writeln!(
            out,
            "edge {} {} {} {} {}",
            e.name, g.vertices[e.origin.0], g.vertices[e.terminus.0], e.label_origin, e.label_terminus
        )
        .unwrap();
    }
    writeln!(out, "basepoint {}", g.vertices[g.basepoint.0]).unwrap();
    for v in g.vertex_ids() {
        let set: Vec<String> = a.at(v).iter().map(|i| i.to_string()).collect();
        writeln!(out, "allowed {} {}", g.vertices[v.0], set.join(" ")).unwrap();
    }
    for (name, w) in &g.marking {
        writeln!(out, "gen {name} = {}", words::format_word(g, w)).unwrap();
    }
    out
}
