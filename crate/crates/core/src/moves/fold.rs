use std::collections::BTreeSet;

use num_bigint::BigUint;

use super::{carry_marking, path, pow, Morphism, MoveKind, MoveRecord};
use crate::error::{Error, Result};
use crate::graph::{gcd, AllowedFamily, Edge, EdgeId, MarkedGraph, VertexId};
use crate::words::{BassWord, Int, Syllable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldType {
    A,
    B,
    C,
}

impl FoldType {
    pub fn code(self) -> &'static str {
        match self {
            FoldType::A => "A",
            FoldType::B => "B",
            FoldType::C => "C",
        }
    }
}

/// `(x, y)` with `x a + y b = gcd(a, b)`, for `a, b > 0`.
fn bezout(a: i64, b: i64) -> (i64, i64) {
    let (mut r0, mut r1, mut x0, mut x1, mut y0, mut y1) = (a, b, 1i64, 0i64, 0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    (x0, y0)
}

/// The graph with vertex `from` merged into `into` and edge `dropped` removed.
/// Ends at `from` get their labels multiplied by `scale`.
struct Merged {
    graph: MarkedGraph,
    new_v: Vec<VertexId>,
    old_v: Vec<VertexId>,
    new_e: Vec<Option<usize>>,
    old_e: Vec<usize>,
}

fn merge_vertex(g: &MarkedGraph, edges: &[Edge], from: VertexId, into: VertexId, dropped: usize, scale: i64) -> Result<Merged> {
    let new_v: Vec<VertexId> = g
        .vertex_ids()
        .map(|x| {
            let x = if x == from { into } else { x };
            VertexId(if x.0 > from.0 { x.0 - 1 } else { x.0 })
        })
        .collect();
    let old_v: Vec<VertexId> = g.vertex_ids().filter(|&x| x != from).collect();
    let vertices = old_v.iter().map(|&x| g.vertex_name(x).to_string()).collect();
    let mut out = Vec::new();
    let mut new_e = vec![None; edges.len()];
    let mut old_e = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if i == dropped {
            continue;
        }
        new_e[i] = Some(out.len());
        old_e.push(i);
        out.push(Edge {
            name: e.name.clone(),
            origin: new_v[e.origin.0],
            terminus: new_v[e.terminus.0],
            label_origin: if e.origin == from { e.label_origin * scale } else { e.label_origin },
            label_terminus: if e.terminus == from { e.label_terminus * scale } else { e.label_terminus },
        });
    }
    let graph = MarkedGraph::new(vertices, out, new_v[g.basepoint().0])?;
    Ok(Merged { graph, new_v, old_v, new_e, old_e })
}

fn check_pair(g: &MarkedGraph, e1: EdgeId, e2: EdgeId) -> Result<()> {
    if e1.index() >= g.edge_count() || e2.index() >= g.edge_count() {
        return Err(Error::InvalidFold("unknown edge".into()));
    }
    if e1.index() == e2.index() || g.origin(e1) != g.origin(e2) {
        return Err(Error::InvalidFold("edges must be distinct with a common origin".into()));
    }
    if g.is_loop(e1) || g.is_loop(e2) || g.terminus(e1) == g.terminus(e2) {
        return Err(Error::InvalidFold("termini must be distinct from each other and from the origin".into()));
    }
    Ok(())
}

/// Folds two edges with a common origin; the type is read off the labels
/// (type A preferred when both A and B apply).
pub fn fold_edges(g: &MarkedGraph, a: &AllowedFamily, e1: EdgeId, e2: EdgeId) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    check_pair(g, e1, e2)?;
    let (l1, l2) = (g.label(e1), g.label(e2));
    let (s1, s2) = (g.label(e1.rev()), g.label(e2.rev()));
    if s1.abs() == 1 && s2.abs() == 1 {
        fold_a(g, a, e1, e2)
    } else if s2.abs() == 1 && l2 % l1 == 0 {
        fold_b(g, a, e1, e2)
    } else if s1.abs() == 1 && l1 % l2 == 0 {
        fold_b(g, a, e2, e1)
    } else {
        Err(Error::InvalidFold(format!(
            "labels of {} and {} fit none of the fold types",
            g.edge_name(e1),
            g.edge_name(e2)
        )))
    }
}

fn fold_a(g: &MarkedGraph, a: &AllowedFamily, e1: EdgeId, e2: EdgeId) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    let u = g.origin(e1);
    let (v1, v2) = (g.terminus(e1), g.terminus(e2));
    let (l1, l2) = (g.label(e1), g.label(e2));
    let (s1, s2) = (g.label(e1.rev()), g.label(e2.rev()));
    let d = gcd(l1.unsigned_abs(), l2.unsigned_abs()) as i64;
    let (k1, k2) = (s1 * l1 / d, s2 * l2 / d);

    let mut edges = g.edges().to_vec();
    for (i, e) in edges.iter_mut().enumerate() {
        if i == e1.index() {
            continue;
        }
        if e.origin == v1 {
            e.label_origin *= k1;
        }
        if e.terminus == v1 {
            e.label_terminus *= k1;
        }
    }
    {
        let e = &mut edges[e1.index()];
        if e1.is_reversed() {
            e.label_terminus = d;
            e.label_origin = 1;
        } else {
            e.label_origin = d;
            e.label_terminus = 1;
        }
    }
    let m = merge_vertex(g, &edges, v2, v1, e2.index(), k2)?;
    let mut h = m.graph;
    let vm = m.new_v[v1.0];
    let f1 = EdgeId(2 * m.new_e[e1.index()].unwrap() + (e1.0 & 1));

    let forward = Morphism {
        vertex_map: m.new_v.clone(),
        vertex_images: g
            .vertex_ids()
            .map(|x| {
                if x == v1 {
                    pow(vm, k1 as Int)
                } else if x == v2 {
                    pow(vm, k2 as Int)
                } else {
                    pow(m.new_v[x.0], 1)
                }
            })
            .collect(),
        edge_images: (0..g.edge_count())
            .map(|i| {
                let img = if i == e2.index() { f1 } else { EdgeId::forward(m.new_e[i].unwrap()) };
                let w = BassWord::edge(&h, img);
                if i == e2.index() && e2.is_reversed() {
                    w.inverse(&h).unwrap()
                } else {
                    w
                }
            })
            .collect(),
        base_shift: BassWord::empty(h.basepoint()),
    };

    // a_m = a_{v1}^{s1 x} (t_ē1 t_e2 a_{v2}^{s2 y} t_ē2 t_e1) with x l1/d + y l2/d = 1
    let (x, y) = bezout(l1.abs() / d, l2.abs() / d);
    let (x, y) = (x * l1.signum(), y * l2.signum());
    let through = |tail: &[Syllable]| -> Vec<Syllable> {
        let mut p = vec![Syllable::Edge(e1.rev()), Syllable::Edge(e2)];
        p.extend_from_slice(tail);
        p
    };
    let am = path(v1, &{
        let mut p = vec![Syllable::Power(v1, (s1 * x) as Int)];
        p.extend(through(&[
            Syllable::Power(v2, (s2 * y) as Int),
            Syllable::Edge(e2.rev()),
            Syllable::Edge(e1),
        ]));
        p
    });
    let backward = Morphism {
        vertex_map: m.old_v.clone(),
        vertex_images: m.old_v.iter().map(|&x| if x == v1 { am.clone() } else { pow(x, 1) }).collect(),
        edge_images: m
            .old_e
            .iter()
            .map(|&i| {
                let f = EdgeId::forward(i);
                let mut p = Vec::new();
                let start = if g.origin(f) == v2 { v1 } else { g.origin(f) };
                if g.origin(f) == v2 {
                    p.extend(through(&[]));
                }
                p.push(Syllable::Edge(f));
                if g.terminus(f) == v2 {
                    p.extend([Syllable::Edge(e2.rev()), Syllable::Edge(e1)]);
                }
                path(start, &p)
            })
            .collect(),
        base_shift: if g.basepoint() == v2 {
            path(v2, &[Syllable::Edge(e2.rev()), Syllable::Edge(e1)])
        } else {
            BassWord::empty(g.basepoint())
        },
    };
    carry_marking(g, &mut h, &forward)?;
    let mut b = a.clone();
    b.set(v1, a.restricted_to_power(u, d as u64));
    b.remove(v2);
    let kind = MoveKind::Fold { kind: FoldType::A, edges: vec![g.edge_name(e1), g.edge_name(e2)], divisor: 1 };
    let record = MoveRecord::new(kind, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

fn fold_b(g: &MarkedGraph, a: &AllowedFamily, e1: EdgeId, e2: EdgeId) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    let (v1, v2) = (g.terminus(e1), g.terminus(e2));
    let (l1, l2) = (g.label(e1), g.label(e2));
    let s2 = g.label(e2.rev());
    let k = s2 * g.label(e1.rev()) * (l2 / l1);
    let m = merge_vertex(g, g.edges(), v2, v1, e2.index(), k)?;
    let mut h = m.graph;
    let vm = m.new_v[v1.0];
    let f1 = EdgeId(2 * m.new_e[e1.index()].unwrap() + (e1.0 & 1));

    let forward = Morphism {
        vertex_map: m.new_v.clone(),
        vertex_images: g.vertex_ids().map(|x| if x == v2 { pow(vm, k as Int) } else { pow(m.new_v[x.0], 1) }).collect(),
        edge_images: (0..g.edge_count())
            .map(|i| {
                if i == e2.index() {
                    let w = BassWord::edge(&h, f1);
                    if e2.is_reversed() {
                        w.inverse(&h).unwrap()
                    } else {
                        w
                    }
                } else {
                    BassWord::edge(&h, EdgeId::forward(m.new_e[i].unwrap()))
                }
            })
            .collect(),
        base_shift: BassWord::empty(h.basepoint()),
    };
    let backward = Morphism {
        vertex_map: m.old_v.clone(),
        vertex_images: m.old_v.iter().map(|&x| pow(x, 1)).collect(),
        edge_images: m
            .old_e
            .iter()
            .map(|&i| {
                let f = EdgeId::forward(i);
                let mut p = Vec::new();
                let start = if g.origin(f) == v2 { v1 } else { g.origin(f) };
                if g.origin(f) == v2 {
                    p.extend([Syllable::Edge(e1.rev()), Syllable::Edge(e2)]);
                }
                p.push(Syllable::Edge(f));
                if g.terminus(f) == v2 {
                    p.extend([Syllable::Edge(e2.rev()), Syllable::Edge(e1)]);
                }
                path(start, &p)
            })
            .collect(),
        base_shift: if g.basepoint() == v2 {
            path(v2, &[Syllable::Edge(e2.rev()), Syllable::Edge(e1)])
        } else {
            BassWord::empty(g.basepoint())
        },
    };
    carry_marking(g, &mut h, &forward)?;
    let mut b = a.clone();
    b.remove(v2);
    let kind = MoveKind::Fold { kind: FoldType::B, edges: vec![g.edge_name(e1), g.edge_name(e2)], divisor: 1 };
    let record = MoveRecord::new(kind, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

/// Labels after rescaling at `t(e)`: `λ(e) ↦ λ(e)·num/den`, other labels at `t(e)` `↦ ·den/num`.
fn rescale(g: &MarkedGraph, e: EdgeId, num: i64, den: i64) -> Vec<Edge> {
    let w = g.terminus(e);
    let mut edges = g.edges().to_vec();
    for (i, d) in edges.iter_mut().enumerate() {
        if i == e.index() {
            if e.is_reversed() {
                d.label_terminus = d.label_terminus * num / den;
            } else {
                d.label_origin = d.label_origin * num / den;
            }
            continue;
        }
        if d.origin == w {
            d.label_origin = d.label_origin * den / num;
        }
        if d.terminus == w {
            d.label_terminus = d.label_terminus * den / num;
        }
    }
    edges
}

fn check_c(g: &MarkedGraph, e: EdgeId, d: u64) -> Result<()> {
    if e.index() >= g.edge_count() || g.is_loop(e) || g.label(e.rev()).abs() != 1 || d == 0 {
        return Err(Error::InvalidFold("type C needs a non-loop edge with label ±1 at its terminus".into()));
    }
    Ok(())
}

/// `a_w ↦ (t_ē a_u^{k} t_e)^{±1}`: the generator of the vertex group at
/// `w = t(e)` written through the edge, where `a_u^k` crosses `e`.
fn through_edge(g: &MarkedGraph, e: EdgeId, k: i64) -> BassWord {
    let s = g.label(e.rev());
    path(g.terminus(e), &[Syllable::Edge(e.rev()), Syllable::Power(g.origin(e), (s * k) as Int), Syllable::Edge(e)])
}

/// Type C fold along `e` with factor `d`: `λ(e) ↦ λ(e)/d`, other labels at `t(e)` multiplied by `d`.
pub fn fold_type_c(g: &MarkedGraph, a: &AllowedFamily, e: EdgeId, d: u64) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    check_c(g, e, d)?;
    if !g.label(e).unsigned_abs().is_multiple_of(d) {
        return Err(Error::InvalidFold(format!("{d} does not divide the label of {}", g.edge_name(e))));
    }
    let d = d as i64;
    let w = g.terminus(e);
    let mut h = MarkedGraph::new(g.vertex_names().to_vec(), rescale(g, e, 1, d), g.basepoint())?;
    let forward = Morphism {
        vertex_map: g.vertex_ids().collect(),
        vertex_images: g.vertex_ids().map(|x| pow(x, if x == w { d as Int } else { 1 })).collect(),
        edge_images: (0..g.edge_count()).map(|i| BassWord::edge(&h, EdgeId::forward(i))).collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    let backward = Morphism {
        vertex_map: h.vertex_ids().collect(),
        vertex_images: h.vertex_ids().map(|x| if x == w { through_edge(g, e, h.label(e)) } else { pow(x, 1) }).collect(),
        edge_images: (0..g.edge_count()).map(|i| BassWord::edge(g, EdgeId::forward(i))).collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    carry_marking(g, &mut h, &forward)?;
    let mut b = a.clone();
    b.set(w, a.restricted_to_power(g.origin(e), h.label(e).unsigned_abs()));
    let kind = MoveKind::Fold { kind: FoldType::C, edges: vec![g.edge_name(e)], divisor: d as u64 };
    let record = MoveRecord::new(kind, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

/// Inverse of [`fold_type_c`]: `λ(e) ↦ λ(e)·d`, other labels at `t(e)` divided by `d`.
pub fn unfold_type_c(g: &MarkedGraph, a: &AllowedFamily, e: EdgeId, d: u64) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    check_c(g, e, d)?;
    let w = g.terminus(e);
    let others: Vec<EdgeId> = g.oriented_edges().filter(|&f| f != e.rev() && g.origin(f) == w).collect();
    if others.is_empty() || others.iter().any(|&f| !g.label(f).unsigned_abs().is_multiple_of(d)) {
        return Err(Error::InvalidFold(format!("{d} does not divide every other label at {}", g.vertex_name(w))));
    }
    let d = d as i64;
    let mut h = MarkedGraph::new(g.vertex_names().to_vec(), rescale(g, e, d, 1), g.basepoint())?;
    let forward = Morphism {
        vertex_map: g.vertex_ids().collect(),
        vertex_images: g.vertex_ids().map(|x| if x == w { through_edge(&h, e, g.label(e)) } else { pow(x, 1) }).collect(),
        edge_images: (0..g.edge_count()).map(|i| BassWord::edge(&h, EdgeId::forward(i))).collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    let backward = Morphism {
        vertex_map: h.vertex_ids().collect(),
        vertex_images: h.vertex_ids().map(|x| pow(x, if x == w { d as Int } else { 1 })).collect(),
        edge_images: (0..g.edge_count()).map(|i| BassWord::edge(g, EdgeId::forward(i))).collect(),
        base_shift: BassWord::empty(g.basepoint()),
    };
    carry_marking(g, &mut h, &forward)?;
    let mut b = a.clone();
    b.set(w, a.restricted_to_power(g.origin(e), h.label(e).unsigned_abs()));
    let kind = MoveKind::UnfoldTypeC { edge: g.edge_name(e), factor: d as u64 };
    let record = MoveRecord::new(kind, g, h.clone(), forward, backward);
    Ok((h, b, record))
}

/// `Π |λ(e)|` over oriented edges.
pub fn label_product(g: &MarkedGraph) -> BigUint {
    g.oriented_edges().map(|e| BigUint::from(g.label(e).unsigned_abs())).product()
}

/// `K(c) = Π |λ(e_i)|^i · Π |λ(ē_i)|^{n+1-i}` for a chain `e_1 … e_n`.
pub fn segment_complexity(g: &MarkedGraph, chain: &[EdgeId]) -> Result<BigUint> {
    if chain.windows(2).any(|p| g.terminus(p[0]) != g.origin(p[1])) {
        return Err(Error::InvalidInput("chain is not a path".into()));
    }
    let n = chain.len() as u32;
    let mut k = BigUint::from(1u32);
    for (i, &e) in chain.iter().enumerate() {
        let i = i as u32 + 1;
        k *= BigUint::from(g.label(e).unsigned_abs()).pow(i);
        k *= BigUint::from(g.label(e.rev()).unsigned_abs()).pow(n + 1 - i);
    }
    Ok(k)
}

/// Topological edges: maximal paths whose interior vertices have valence 2.
/// On a circle the breakpoints are the vertices with no label `±1`, or the
/// first vertex when there is none.
pub fn topological_chains(g: &MarkedGraph) -> Vec<Vec<EdgeId>> {
    let mut breaks: BTreeSet<VertexId> = g.vertex_ids().filter(|&v| g.valence(v) != 2).collect();
    if breaks.is_empty() {
        breaks = g
            .vertex_ids()
            .filter(|&v| g.edges_from(v).iter().all(|&e| g.label(e).abs() != 1))
            .collect();
        if breaks.is_empty() {
            breaks.insert(VertexId(0));
        }
    }
    let mut used = BTreeSet::new();
    let mut chains = Vec::new();
    for &b in &breaks {
        for start in g.edges_from(b) {
            if used.contains(&start.index()) {
                continue;
            }
            let mut chain = vec![start];
            used.insert(start.index());
            let mut cur = start;
            while !breaks.contains(&g.terminus(cur)) {
                let next = g
                    .edges_from(g.terminus(cur))
                    .into_iter()
                    .find(|&f| f != cur.rev())
                    .expect("valence-2 vertex");
                used.insert(next.index());
                chain.push(next);
                cur = next;
            }
            chains.push(chain);
        }
    }
    chains
}

type EdgeKey = ((usize, u64), (usize, u64));

fn edge_keys(g: &MarkedGraph, map: &[usize]) -> Vec<EdgeKey> {
    let mut keys: Vec<EdgeKey> = g
        .edges()
        .iter()
        .map(|e| {
            let x = (map[e.origin.0], e.label_origin.unsigned_abs());
            let y = (map[e.terminus.0], e.label_terminus.unsigned_abs());
            if x <= y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    keys.sort();
    keys
}

fn signature(g: &MarkedGraph, v: VertexId) -> Vec<(u64, u64, bool)> {
    let mut s: Vec<_> = g
        .edges_from(v)
        .iter()
        .map(|&e| (g.label(e).unsigned_abs(), g.label(e.rev()).unsigned_abs(), g.is_loop(e)))
        .collect();
    s.sort();
    s
}

/// Isomorphism of underlying labelled graphs, up to the signs of labels.
pub fn isomorphic(g: &MarkedGraph, h: &MarkedGraph) -> bool {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    let sg: Vec<_> = g.vertex_ids().map(|v| signature(g, v)).collect();
    let sh: Vec<_> = h.vertex_ids().map(|v| signature(h, v)).collect();
    let target = edge_keys(h, &(0..h.vertex_count()).collect::<Vec<_>>());
    let mut map = vec![usize::MAX; g.vertex_count()];
    let mut taken = vec![false; h.vertex_count()];
    fn search(
        i: usize,
        g: &MarkedGraph,
        sg: &[Vec<(u64, u64, bool)>],
        sh: &[Vec<(u64, u64, bool)>],
        target: &[EdgeKey],
        map: &mut Vec<usize>,
        taken: &mut Vec<bool>,
    ) -> bool {
        if i == map.len() {
            return edge_keys(g, map) == target;
        }
        for j in 0..taken.len() {
            if taken[j] || sg[i] != sh[j] {
                continue;
            }
            taken[j] = true;
            map[i] = j;
            if search(i + 1, g, sg, sh, target, map, taken) {
                return true;
            }
            taken[j] = false;
        }
        false
    }
    search(0, g, &sg, &sh, &target, &mut map, &mut taken)
}
