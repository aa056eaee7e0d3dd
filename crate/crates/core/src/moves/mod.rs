//! Moves inside a deformation space, each carrying the marking isomorphisms.

mod fold;
mod log;
mod unfold;

use std::collections::{BTreeMap, BTreeSet};

pub use fold::{
    fold_edges, fold_type_c, isomorphic, label_product, segment_complexity, topological_chains, unfold_type_c,
    FoldType,
};
pub use log::{replay_log, write_log};
pub use unfold::{unfold_step, InverseMove, UnfoldCase};

use crate::cover::LinkPoint;
use crate::error::{Error, Result};
use crate::graph::{AllowedFamily, Edge, EdgeId, MarkedGraph, VertexId};
use crate::words::{self, BassWord, Int};

/// A map between fundamental groups given on letters.
///
/// `vertex_images[v]` is the image of `a_v`, a loop at `vertex_map[v]`;
/// `edge_images[i]` is the image of `t_e` for the stored orientation of edge `i`.
/// `base_shift` runs from the target basepoint to the image of the source basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub vertex_map: Vec<VertexId>,
    pub vertex_images: Vec<BassWord>,
    pub edge_images: Vec<BassWord>,
    pub base_shift: BassWord,
}

impl Morphism {
    /// Image of a path of the source in the target, reduced.
    pub fn apply_path(&self, target: &MarkedGraph, w: &BassWord) -> Result<BassWord> {
        let edge = |e: EdgeId| {
            let img = &self.edge_images[e.index()];
            if e.is_reversed() {
                img.inverse(target).expect("edge images are valid paths")
            } else {
                img.clone()
            }
        };
        let power = |v: VertexId| self.vertex_images[v.0].clone();
        words::substitute(target, w, self.vertex_map[w.start().0], &power, &edge)
    }

    /// Image of a loop at the source basepoint, as a loop at the target basepoint.
    pub fn apply_loop(&self, target: &MarkedGraph, w: &BassWord) -> Result<BassWord> {
        let img = self.apply_path(target, w)?;
        let s = &self.base_shift;
        let s_end = s.end(target)?;
        words::reduce_path(target, &BassWord::concat_all(s.start(), [s, &img, &s.inverse_from(s_end)]))
    }

    /// `other ∘ self`, where `self: A → B` and `other: B → C`; `c` is the graph `C`.
    pub fn then(&self, other: &Morphism, c: &MarkedGraph) -> Result<Morphism> {
        Ok(Morphism {
            vertex_map: self.vertex_map.iter().map(|v| other.vertex_map[v.0]).collect(),
            vertex_images: self.vertex_images.iter().map(|w| other.apply_path(c, w)).collect::<Result<_>>()?,
            edge_images: self.edge_images.iter().map(|w| other.apply_path(c, w)).collect::<Result<_>>()?,
            base_shift: words::reduce_path(c, &other.base_shift.concat(&other.apply_path(c, &self.base_shift)?))?,
        })
    }

    pub fn identity(g: &MarkedGraph) -> Morphism {
        Morphism {
            vertex_map: g.vertex_ids().collect(),
            vertex_images: g.vertex_ids().map(|v| BassWord::power(v, 1)).collect(),
            edge_images: (0..g.edge_count()).map(|i| BassWord::edge(g, EdgeId::forward(i))).collect(),
            base_shift: BassWord::empty(g.basepoint()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Collapse { edge: String },
    Expand { vertex: String, index: u64, subset: Vec<(String, u64)> },
    Subdivide,
    Fold { kind: FoldType, edges: Vec<String>, divisor: u64 },
    UnfoldTypeC { edge: String, factor: u64 },
    Unfold { case: UnfoldCase, vertex: String, inverse: InverseMove },
}

#[derive(Clone, Debug)]
pub struct MoveRecord {
    pub kind: MoveKind,
    pub source: MarkedGraph,
    pub target: MarkedGraph,
    pub forward: Morphism,
    pub backward: Morphism,
    /// Constituent moves of a composite move, in order.
    pub sub: Vec<MoveRecord>,
}

impl MoveRecord {
    fn new(kind: MoveKind, source: &MarkedGraph, target: MarkedGraph, forward: Morphism, backward: Morphism) -> Self {
        MoveRecord { kind, source: source.clone(), target, forward, backward, sub: Vec::new() }
    }

    /// Composes a nonempty sequence of moves into one record.
    fn composite(kind: MoveKind, parts: Vec<MoveRecord>) -> Result<Self> {
        let mut forward = parts[0].forward.clone();
        let mut backward = parts[0].backward.clone();
        for p in &parts[1..] {
            forward = forward.then(&p.forward, &p.target)?;
            backward = p.backward.then(&backward, &parts[0].source)?;
        }
        Ok(MoveRecord {
            kind,
            source: parts[0].source.clone(),
            target: parts.last().unwrap().target.clone(),
            forward,
            backward,
            sub: parts,
        })
    }

    /// Checks that `backward ∘ forward` is the identity on the marking of the source
    /// and `forward ∘ backward` on the marking of the target.
    pub fn verify_isomorphism(&self) -> Result<bool> {
        for (_, w) in self.source.marking() {
            let back = self.backward.apply_loop(&self.source, &self.forward.apply_loop(&self.target, w)?)?;
            if !words::elements_equal(&self.source, &back, w)? {
                return Ok(false);
            }
        }
        for (_, w) in self.target.marking() {
            let there = self.forward.apply_loop(&self.target, &self.backward.apply_loop(&self.source, w)?)?;
            if !words::elements_equal(&self.target, &there, w)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Transports the marking of `source` into `target` along `forward`.
fn carry_marking(source: &MarkedGraph, target: &mut MarkedGraph, forward: &Morphism) -> Result<()> {
    let marking = source
        .marking()
        .iter()
        .map(|(n, w)| Ok((n.clone(), forward.apply_loop(target, w)?)))
        .collect::<Result<Vec<_>>>()?;
    target.set_marking(marking)
}

fn pow(v: VertexId, k: Int) -> BassWord {
    if k == 0 {
        BassWord::empty(v)
    } else {
        BassWord::power(v, k)
    }
}

fn path(start: VertexId, parts: &[words::Syllable]) -> BassWord {
    BassWord::new(
        start,
        parts.iter().copied().filter(|s| !matches!(s, words::Syllable::Power(_, 0))).collect(),
    )
}

/// Least collapsible oriented edge by display name: a non-loop `ε` with `|λ(ε̄)| = 1`.
pub fn first_collapsible(g: &MarkedGraph) -> Option<EdgeId> {
    g.oriented_edges()
        .filter(|&e| !g.is_loop(e) && g.label(e.rev()).abs() == 1)
        .min_by_key(|&e| g.edge_name(e))
}

/// Collapses `ε` from `v` to `w`, absorbing `w` into `v`.
pub fn collapse_edge(g: &MarkedGraph, a: &AllowedFamily, eps: EdgeId) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    if eps.index() >= g.edge_count() || g.is_loop(eps) || g.label(eps.rev()).abs() != 1 {
        return Err(Error::NotCollapsible(if eps.index() < g.edge_count() { g.edge_name(eps) } else { "?".into() }));
    }
    let (v, w) = (g.origin(eps), g.terminus(eps));
    let s = g.label(eps.rev());
    let factor = s * g.label(eps);

    let new_v = |x: VertexId| -> VertexId {
        let x = if x == w { v } else { x };
        VertexId(if x.0 > w.0 { x.0 - 1 } else { x.0 })
    };
    let vertices: Vec<String> = g.vertex_ids().filter(|&x| x != w).map(|x| g.vertex_name(x).to_string()).collect();
    let mut edges = Vec::new();
    let mut old_of_new = Vec::new();
    let mut new_of_old = vec![usize::MAX; g.edge_count()];
    for (i, e) in g.edges().iter().enumerate() {
        if i == eps.index() {
            continue;
        }
        new_of_old[i] = edges.len();
        old_of_new.push(i);
        edges.push(Edge {
            name: e.name.clone(),
            origin: new_v(e.origin),
            terminus: new_v(e.terminus),
            label_origin: if e.origin == w { e.label_origin * factor } else { e.label_origin },
            label_terminus: if e.terminus == w { e.label_terminus * factor } else { e.label_terminus },
        });
    }
    let mut h = MarkedGraph::new(vertices, edges, new_v(g.basepoint()))?;

    let nv = new_v(v);
    let forward = Morphism {
        vertex_map: g.vertex_ids().map(new_v).collect(),
        vertex_images: g
            .vertex_ids()
            .map(|x| if x == w { pow(nv, factor as Int) } else { pow(new_v(x), 1) })
            .collect(),
        edge_images: (0..g.edge_count())
            .map(|i| {
                if i == eps.index() {
                    BassWord::empty(nv)
                } else {
                    BassWord::edge(&h, EdgeId::forward(new_of_old[i]))
                }
            })
            .collect(),
        base_shift: BassWord::empty(h.basepoint()),
    };
    let old_v = |x: VertexId| VertexId(if x.0 >= w.0 { x.0 + 1 } else { x.0 });
    let backward = Morphism {
        vertex_map: h.vertex_ids().map(old_v).collect(),
        vertex_images: h.vertex_ids().map(|x| pow(old_v(x), 1)).collect(),
        edge_images: old_of_new
            .iter()
            .map(|&i| {
                let f = EdgeId::forward(i);
                let mut parts = Vec::new();
                if g.origin(f) == w {
                    parts.push(words::Syllable::Edge(eps));
                }
                parts.push(words::Syllable::Edge(f));
                if g.terminus(f) == w {
                    parts.push(words::Syllable::Edge(eps.rev()));
                }
                path(old_v(h.origin(EdgeId::forward(new_of_old[i]))), &parts)
            })
            .collect(),
        base_shift: if g.basepoint() == w { BassWord::edge(g, eps.rev()) } else { BassWord::empty(g.basepoint()) },
    };
    carry_marking(g, &mut h, &forward)?;

    let mut b = a.clone();
    let mut merged: BTreeSet<u64> = a.at(v).clone();
    merged.extend(a.at(w).iter().map(|i| i * g.label(eps).unsigned_abs()));
    b.set(v, merged);
    b.remove(w);

    let record = MoveRecord::new(MoveKind::Collapse { edge: g.edge_name(eps) }, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

/// Expansion at `v`: the link points in `subset` are moved onto a new edge
/// `ε` with labels `n` at `v` and `1` at the new vertex.
pub fn expand(
    g: &MarkedGraph,
    a: &AllowedFamily,
    v: VertexId,
    n: u64,
    subset: &BTreeSet<LinkPoint>,
) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    let bad = |m: &str| Err(Error::InvalidExpansion(m.to_string()));
    let link: BTreeSet<LinkPoint> = crate::cover::link_points(g, v).into_iter().collect();
    if n == 0 {
        return bad("index must be positive");
    }
    if subset.is_empty() || !subset.is_subset(&link) || subset.len() == link.len() {
        return bad("subset must be a nonempty proper part of the link");
    }
    if let Some(p) = subset.iter().find(|p| g.is_loop(p.edge)) {
        return Err(Error::LoopEdgePresent(g.edge_name(p.edge)));
    }
    let shifted = |j: u64| -> BTreeSet<LinkPoint> { subset.iter().map(|p| p.shift(g, j)).collect() };
    if shifted(n) != *subset {
        return bad("subset is not invariant under the index-n subgroup");
    }
    if (1..n).any(|j| !shifted(j).is_disjoint(subset)) {
        return bad("subset meets one of its translates");
    }
    let mut offset: BTreeMap<EdgeId, u64> = BTreeMap::new();
    for p in subset {
        if !g.label(p.edge).unsigned_abs().is_multiple_of(n) {
            return bad("index does not divide a moved label");
        }
        let c = offset.entry(p.edge).or_insert(p.coset);
        *c = (*c).min(p.coset);
    }
    if !a.allows(v, n) {
        return Err(Error::NotAllowed(format!("{} with index {n}", g.vertex_name(v))));
    }

    let vname = g.vertex_name(v).to_string();
    let mut vertices = g.vertex_names().to_vec();
    let mut probe = g.clone();
    let w_name = probe.fresh_name(&vname);
    probe.vertices.push(w_name.clone());
    let eps_name = probe.fresh_name(&vname);
    vertices.push(w_name);
    let w = VertexId(vertices.len() - 1);
    let mut edges = g.edges().to_vec();
    for &e in offset.keys() {
        let d = &mut edges[e.index()];
        if e.is_reversed() {
            d.terminus = w;
            d.label_terminus /= n as i64;
        } else {
            d.origin = w;
            d.label_origin /= n as i64;
        }
    }
    edges.push(Edge { name: eps_name, origin: v, terminus: w, label_origin: n as i64, label_terminus: 1 });
    let eps = EdgeId::forward(edges.len() - 1);
    let mut h = MarkedGraph::new(vertices, edges, g.basepoint())?;

    let fwd_edge = |i: usize| -> BassWord {
        let f = EdgeId::forward(i);
        if let Some(&c) = offset.get(&f) {
            path(v, &[words::Syllable::Power(v, -(c as Int)), words::Syllable::Edge(eps), words::Syllable::Edge(f)])
        } else if let Some(&c) = offset.get(&f.rev()) {
            path(g.origin(f), &[words::Syllable::Edge(f), words::Syllable::Edge(eps.rev()), words::Syllable::Power(v, c as Int)])
        } else {
            BassWord::edge(&h, f)
        }
    };
    let forward = Morphism {
        vertex_map: g.vertex_ids().collect(),
        vertex_images: g.vertex_ids().map(|x| pow(x, 1)).collect(),
        edge_images: (0..g.edge_count()).map(fwd_edge).collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    let backward = Morphism {
        vertex_map: h.vertex_ids().map(|x| if x == w { v } else { x }).collect(),
        vertex_images: h.vertex_ids().map(|x| if x == w { pow(v, n as Int) } else { pow(x, 1) }).collect(),
        edge_images: (0..h.edge_count())
            .map(|i| {
                let f = EdgeId::forward(i);
                if f == eps {
                    BassWord::empty(v)
                } else if let Some(&c) = offset.get(&f) {
                    path(v, &[words::Syllable::Power(v, c as Int), words::Syllable::Edge(f)])
                } else if let Some(&c) = offset.get(&f.rev()) {
                    path(g.origin(f), &[words::Syllable::Edge(f), words::Syllable::Power(v, -(c as Int))])
                } else {
                    BassWord::edge(g, f)
                }
            })
            .collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    carry_marking(g, &mut h, &forward)?;

    let mut b = a.clone();
    b.push(a.restricted_to_power(v, n));

    let mut listed: Vec<(String, u64)> = subset.iter().map(|p| (g.edge_name(p.edge), p.coset)).collect();
    listed.sort();
    let kind = MoveKind::Expand { vertex: vname, index: n, subset: listed };
    let record = MoveRecord::new(kind, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

/// Replaces each loop `e` with labels `(p, q)` by `e: v(p) → w(1)` and a new
/// edge `w(1) → v(q)`. Returns `None` for the record when there is no loop.
pub fn subdivide_loops(g: &MarkedGraph, a: &AllowedFamily) -> Result<(MarkedGraph, AllowedFamily, Option<MoveRecord>)> {
    let loops: Vec<usize> = (0..g.edge_count()).filter(|&i| g.is_loop(EdgeId::forward(i))).collect();
    if loops.is_empty() {
        return Ok((g.clone(), a.clone(), None));
    }
    let mut probe = g.clone();
    let mut edges = g.edges().to_vec();
    let mut b = a.clone();
    let mut added = Vec::new();
    for &i in &loops {
        let name = edges[i].name.clone();
        let w_name = probe.fresh_name(&name);
        probe.vertices.push(w_name);
        let w = VertexId(probe.vertices.len() - 1);
        let e2_name = probe.fresh_name(&name);
        let v = edges[i].origin;
        let q = edges[i].label_terminus;
        edges[i].terminus = w;
        edges[i].label_terminus = 1;
        let e2 = Edge { name: e2_name, origin: w, terminus: v, label_origin: 1, label_terminus: q };
        probe.edges.push(e2.clone());
        edges.push(e2);
        b.push(a.restricted_to_power(v, edges[i].label_origin.unsigned_abs()));
        added.push((i, w, v, q));
    }
    let mut h = MarkedGraph::new(probe.vertices.clone(), edges, g.basepoint())?;
    let new_edge = |k: usize| EdgeId::forward(g.edge_count() + k);

    let forward = Morphism {
        vertex_map: g.vertex_ids().collect(),
        vertex_images: g.vertex_ids().map(|x| pow(x, 1)).collect(),
        edge_images: (0..g.edge_count())
            .map(|i| match loops.iter().position(|&l| l == i) {
                Some(k) => path(g.origin(EdgeId::forward(i)), &[
                    words::Syllable::Edge(EdgeId::forward(i)),
                    words::Syllable::Edge(new_edge(k)),
                ]),
                None => BassWord::edge(&h, EdgeId::forward(i)),
            })
            .collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    let owner = |x: VertexId| added.iter().find(|t| t.1 == x).map(|t| (t.2, t.3));
    let backward = Morphism {
        vertex_map: h.vertex_ids().map(|x| owner(x).map_or(x, |(v, _)| v)).collect(),
        vertex_images: h
            .vertex_ids()
            .map(|x| match owner(x) {
                Some((v, q)) => pow(v, q as Int),
                None => pow(x, 1),
            })
            .collect(),
        edge_images: (0..h.edge_count())
            .map(|i| {
                if i < g.edge_count() {
                    BassWord::edge(g, EdgeId::forward(i))
                } else {
                    BassWord::empty(added[i - g.edge_count()].2)
                }
            })
            .collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    carry_marking(g, &mut h, &forward)?;
    let record = MoveRecord::new(MoveKind::Subdivide, g, h.clone(), forward, backward);
    Ok((h, b, Some(record)))
}

/// Collapses collapsible edges, least display name first, until none is left.
pub fn reduce_graph(g: &MarkedGraph, a: &AllowedFamily) -> Result<(MarkedGraph, AllowedFamily, Vec<MoveRecord>)> {
    let mut cur = (g.clone(), a.clone());
    let mut records = Vec::new();
    while let Some(e) = first_collapsible(&cur.0) {
        let (h, b, r) = collapse_edge(&cur.0, &cur.1, e)?;
        records.push(r);
        cur = (h, b);
    }
    Ok((cur.0, cur.1, records))
}

/// Composite forward map of a sequence of moves starting at `g`.
pub fn compose_forward(g: &MarkedGraph, records: &[MoveRecord]) -> Result<Morphism> {
    let mut m = Morphism::identity(g);
    for r in records {
        m = m.then(&r.forward, &r.target)?;
    }
    Ok(m)
}
