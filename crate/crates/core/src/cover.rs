//! Local pieces of the Bass-Serre tree: vertex links, the stabilizer action
//! on them, and lifts of axes.
//!
//! A cover vertex is a class of paths `γ` from the basepoint modulo right
//! multiplication by the end vertex group. The edges leaving it are the
//! classes `γ a^k t_e` with `0 <= k < |λ(e)|`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MarkedGraph, VertexId};
use crate::words::{self, BassWord, Int};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoverVertex {
    path: BassWord,
    vertex: VertexId,
}

impl CoverVertex {
    /// The class of `path`, which must start at the basepoint.
    pub fn from_path(g: &MarkedGraph, path: &BassWord) -> Result<Self> {
        if path.start() != g.basepoint() {
            return Err(Error::InvalidPath("cover vertices are paths from the basepoint".into()));
        }
        let mut nf = words::normal_form(g, path)?;
        *nf.powers.last_mut().unwrap() = 0;
        let vertex = nf.vertex_at(g, nf.edges.len());
        Ok(CoverVertex { path: nf.to_word(g), vertex })
    }

    /// The lift of `v` along the breadth-first spanning tree from the basepoint.
    pub fn standard_lift(g: &MarkedGraph, v: VertexId) -> Self {
        let path = g.tree_path(g.basepoint(), v, None).expect("connected graph");
        CoverVertex { path, vertex: v }
    }

    pub fn path(&self) -> &BassWord {
        &self.path
    }

    pub fn quotient_vertex(&self) -> VertexId {
        self.vertex
    }
}

/// An edge leaving a cover vertex, in coordinates `(e, k)` for `a^k t_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkPoint {
    pub edge: EdgeId,
    pub coset: u64,
}

impl LinkPoint {
    /// The image under the generator of the vertex group.
    pub fn shift(self, g: &MarkedGraph, j: u64) -> LinkPoint {
        let m = g.label(self.edge).unsigned_abs();
        LinkPoint { edge: self.edge, coset: (self.coset + j % m) % m }
    }

    pub fn display(&self, g: &MarkedGraph) -> String {
        format!("{}:{}", g.edge_name(self.edge), self.coset)
    }

    /// Deterministic order: edge display name, then coset.
    pub fn sort_key(&self, g: &MarkedGraph) -> (String, u64) {
        (g.edge_name(self.edge), self.coset)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkElement {
    pub base: CoverVertex,
    pub point: LinkPoint,
}

/// Link points at `v` in the deterministic order.
pub fn link_points(g: &MarkedGraph, v: VertexId) -> Vec<LinkPoint> {
    let mut out = Vec::new();
    for e in g.edges_from(v) {
        for k in 0..g.label(e).unsigned_abs() {
            out.push(LinkPoint { edge: e, coset: k });
        }
    }
    out
}

/// The link of `x` and the permutation induced by the generator of `G_x`,
/// as indices into the element list.
pub fn link_of(g: &MarkedGraph, x: &CoverVertex) -> (Vec<LinkElement>, Vec<usize>) {
    let points = link_points(g, x.vertex);
    let action = points
        .iter()
        .map(|p| {
            let q = p.shift(g, 1);
            points.iter().position(|r| *r == q).unwrap()
        })
        .collect();
    let elements = points.into_iter().map(|point| LinkElement { base: x.clone(), point }).collect();
    (elements, action)
}

/// An unordered pair of distinct link points at a lift of `vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn {
    pub vertex: VertexId,
    pub a: (EdgeId, u64),
    pub b: (EdgeId, u64),
}

impl Turn {
    pub fn new(vertex: VertexId, x: LinkPoint, y: LinkPoint) -> Self {
        let (p, q) = ((x.edge, x.coset), (y.edge, y.coset));
        let (a, b) = if p <= q { (p, q) } else { (q, p) };
        Turn { vertex, a, b }
    }

    pub fn points(&self) -> (LinkPoint, LinkPoint) {
        (
            LinkPoint { edge: self.a.0, coset: self.a.1 },
            LinkPoint { edge: self.b.0, coset: self.b.1 },
        )
    }

    /// All translates of this turn under the vertex group.
    pub fn orbit(&self, g: &MarkedGraph) -> BTreeSet<Turn> {
        let (x, y) = self.points();
        let n = lcm(g.label(x.edge).unsigned_abs(), g.label(y.edge).unsigned_abs());
        (0..n).map(|j| Turn::new(self.vertex, x.shift(g, j), y.shift(g, j))).collect()
    }

    /// Least element of the orbit; equal keys mean equal orbits.
    pub fn canonical(&self, g: &MarkedGraph) -> Turn {
        *self.orbit(g).iter().next().unwrap()
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::graph::gcd(a, b) * b
}

/// A lift of the axis of `g²` for a loxodromic `w`.
#[derive(Clone, Debug)]
pub struct AxisDomain {
    /// Initial vertex of the lift.
    pub base: CoverVertex,
    /// Consecutive oriented steps: the vertex left and the link point used.
    pub steps: Vec<(CoverVertex, LinkPoint)>,
    /// Turns at the interior vertices of the lift, in order.
    pub turns: Vec<Turn>,
    /// Translation length of `w`.
    pub length: usize,
}

struct CoreLift {
    start: VertexId,
    powers: Vec<Int>,
    edges: Vec<EdgeId>,
    length: usize,
}

fn lift_square(g: &MarkedGraph, w: &BassWord) -> Result<(CoreLift, BassWord)> {
    let (core, conj) = words::cyclically_reduce(g, w)?;
    let n = core.edge_count();
    if n == 0 {
        return Err(Error::EllipticElement(words::format_word(g, w)));
    }
    let nf = words::normal_form(g, &core.concat(&core))?;
    debug_assert_eq!(nf.edges.len(), 2 * n);
    Ok((CoreLift { start: nf.start, powers: nf.powers, edges: nf.edges, length: n }, conj))
}

impl CoreLift {
    /// Turn at the `i`-th interior vertex, `1 <= i < 2n`.
    fn turn(&self, g: &MarkedGraph, i: usize) -> Turn {
        let incoming = LinkPoint { edge: self.edges[i - 1].rev(), coset: 0 };
        let next = self.edges[i];
        let outgoing = LinkPoint { edge: next, coset: self.powers[i].rem_euclid(g.label(next).abs() as Int) as u64 };
        Turn::new(g.terminus(self.edges[i - 1]), incoming, outgoing)
    }
}

/// Lifts the cyclically reduced core of `w²` into the cover.
pub fn axis_fundamental_domain(g: &MarkedGraph, w: &BassWord) -> Result<AxisDomain> {
    let (lift, conj) = lift_square(g, w)?;
    let conj_end = conj.end(g)?;
    let to_core = conj.inverse_from(conj_end);
    let mut prefix = to_core.clone();
    let mut steps = Vec::new();
    let base = CoverVertex::from_path(g, &to_core)?;
    for (i, &e) in lift.edges.iter().enumerate() {
        let here = CoverVertex::from_path(g, &prefix)?;
        let v = if i == 0 { lift.start } else { g.terminus(lift.edges[i - 1]) };
        if lift.powers[i] != 0 {
            prefix.push(words::Syllable::Power(v, lift.powers[i]));
        }
        prefix.push(words::Syllable::Edge(e));
        // coordinates relative to the normalized representative of `here`
        let nf = words::normal_form(g, &prefix)?;
        let k = nf.powers[nf.edges.len() - 1];
        steps.push((here, LinkPoint { edge: e, coset: k as u64 }));
    }
    let turns = (1..lift.edges.len()).map(|i| lift.turn(g, i)).collect();
    Ok(AxisDomain { base, steps, turns, length: lift.length })
}

/// Canonical turn orbits crossed by the axis of `w`, one period's worth.
pub fn period_turn_orbits(g: &MarkedGraph, w: &BassWord) -> Result<BTreeSet<Turn>> {
    let (lift, _) = lift_square(g, w)?;
    Ok((1..=lift.length).map(|i| lift.turn(g, i).canonical(g)).collect())
}

/// Quotient edge indices crossed by the axis of `w`.
pub fn axis_edges(g: &MarkedGraph, w: &BassWord) -> Result<BTreeSet<usize>> {
    let (core, _) = words::cyclically_reduce(g, w)?;
    if core.edge_count() == 0 {
        return Err(Error::EllipticElement(words::format_word(g, w)));
    }
    Ok(core.edges().map(|e| e.index()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::words::parse_word;

    #[test]
    fn link_sizes() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 2 4\nbasepoint v\n").unwrap();
        let x = CoverVertex::standard_lift(&g, VertexId(0));
        let (elements, action) = link_of(&g, &x);
        assert_eq!(elements.len(), 6);
        // orbit of (e, 0) has size |λ(e)|
        let start = elements.iter().position(|l| l.point == LinkPoint { edge: EdgeId(0), coset: 0 }).unwrap();
        let mut i = action[start];
        let mut size = 1;
        while i != start {
            i = action[i];
            size += 1;
        }
        assert_eq!(size, 2);

        let (h, _) = parse_graph("gbs v1\nvertex v\nvertex w\nedge e v w 1 3\nbasepoint v\n").unwrap();
        let (elements, action) = link_of(&h, &CoverVertex::standard_lift(&h, VertexId(0)));
        assert_eq!(elements.len(), 1);
        assert_eq!(action, vec![0]);
    }

    #[test]
    fn subdivided_bs24_link() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nvertex w\nedge e v w 2 1\nedge f w v 1 4\nbasepoint v\n").unwrap();
        assert_eq!(link_points(&g, VertexId(0)).len(), 6);
    }

    #[test]
    fn cover_vertex_equality_ignores_trailing_power() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 2 4\nbasepoint v\n").unwrap();
        let a = CoverVertex::from_path(&g, &parse_word(&g, "e v^3").unwrap()).unwrap();
        let b = CoverVertex::from_path(&g, &parse_word(&g, "e").unwrap()).unwrap();
        let c = CoverVertex::from_path(&g, &parse_word(&g, "v^2 e v^-4").unwrap()).unwrap();
        let d = CoverVertex::from_path(&g, &parse_word(&g, "v e").unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_ne!(b, d);
    }

    #[test]
    fn bs12_axis() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 1 2\nbasepoint v\n").unwrap();
        let dom = axis_fundamental_domain(&g, &parse_word(&g, "e").unwrap()).unwrap();
        assert_eq!(dom.steps.len(), 2);
        assert_eq!(dom.turns.len(), 1);
        assert_eq!(dom.length, 1);
        for t in &dom.turns {
            assert_ne!(t.a, t.b);
        }
        for w in dom.steps.windows(2) {
            assert_eq!(w[1].0.path().edge_count(), w[0].0.path().edge_count() + 1);
        }
    }

    #[test]
    fn turns_are_conjugation_invariant() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 2 3\nbasepoint v\n").unwrap();
        let w = parse_word(&g, "e v ~e v e").unwrap();
        let u = parse_word(&g, "v e v^2").unwrap();
        let conj = words::reduce_path(
            &g,
            &BassWord::concat_all(VertexId(0), [&u, &w, &u.inverse(&g).unwrap()]),
        )
        .unwrap();
        assert_eq!(period_turn_orbits(&g, &w).unwrap(), period_turn_orbits(&g, &conj).unwrap());
    }

    #[test]
    fn elliptic_has_no_axis() {
        let (g, _) = parse_graph("gbs v1\nvertex v\nedge e v v 1 2\nbasepoint v\n").unwrap();
        assert!(matches!(
            axis_fundamental_domain(&g, &parse_word(&g, "v^5").unwrap()),
            Err(Error::EllipticElement(_))
        ));
    }
}
