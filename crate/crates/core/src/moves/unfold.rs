use std::collections::BTreeSet;

use super::{collapse_edge, expand, MoveKind, MoveRecord};
use crate::cover::{self, LinkPoint};
use crate::error::{Error, Result};
use crate::graph::{AllowedFamily, EdgeId, MarkedGraph, VertexId};
use crate::whitehead::{self, AdmissibleCut, CutKind};
use crate::words::{self, BassWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnfoldCase {
    /// Admissible component: one expansion.
    Component,
    /// Invariant cut point, the orbit of the side misses part of the link.
    InvariantTypeA,
    /// Invariant cut point, the orbit of the side covers the rest of the link.
    InvariantTypeC,
    /// Cut point with a nontrivial orbit.
    Orbit,
}

impl UnfoldCase {
    pub fn code(self) -> &'static str {
        match self {
            UnfoldCase::Component => "1",
            UnfoldCase::InvariantTypeA => "2A",
            UnfoldCase::InvariantTypeC => "2C",
            UnfoldCase::Orbit => "3",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "1" => UnfoldCase::Component,
            "2A" => UnfoldCase::InvariantTypeA,
            "2C" => UnfoldCase::InvariantTypeC,
            "3" => UnfoldCase::Orbit,
            _ => return None,
        })
    }

    /// Change in the number of edges.
    pub fn edge_delta(self) -> usize {
        match self {
            UnfoldCase::InvariantTypeC => 0,
            _ => 1,
        }
    }
}

/// The move undoing an unfold step, named by edges of the result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InverseMove {
    Collapse(String),
    FoldA(String, String),
    FoldB(String, String),
    FoldC(String, u64),
}

fn orbit_under(g: &MarkedGraph, set: &BTreeSet<LinkPoint>, step: u64, period: u64) -> BTreeSet<LinkPoint> {
    let mut out = BTreeSet::new();
    let mut j = 0;
    while j < period {
        out.extend(set.iter().map(|p| p.shift(g, j)));
        j += step;
    }
    out
}

fn link_period(g: &MarkedGraph, v: VertexId) -> u64 {
    g.edges_from(v).iter().fold(1, |acc, &e| {
        let m = g.label(e).unsigned_abs();
        acc / crate::graph::gcd(acc, m) * m
    })
}

fn orbit_size(g: &MarkedGraph, set: &BTreeSet<LinkPoint>) -> u64 {
    let mut n = 1;
    loop {
        let s: BTreeSet<LinkPoint> = set.iter().map(|p| p.shift(g, n)).collect();
        if s == *set {
            return n;
        }
        n += 1;
    }
}

fn new_edge_name(g: &MarkedGraph) -> String {
    g.edges().last().expect("an expansion adds an edge").name.clone()
}

/// Performs the unfolding dictated by `cut` at `cut.vertex`.
pub fn unfold_step(
    g: &MarkedGraph,
    a: &AllowedFamily,
    collection: &[BassWord],
    cut: &AdmissibleCut,
) -> Result<(MarkedGraph, AllowedFamily, MoveRecord)> {
    if let Some(e) = g.oriented_edges().find(|&e| g.is_loop(e)) {
        return Err(Error::LoopEdgePresent(g.edge_name(e)));
    }
    let v = cut.vertex;
    let current = whitehead::find_admissible_cut(&whitehead::whitehead_graph(g, collection, v)?, a);
    if current.as_ref() != Some(cut) {
        return Err(Error::StaleCut);
    }
    let vname = g.vertex_name(v).to_string();
    let link: BTreeSet<LinkPoint> = cover::link_points(g, v).into_iter().collect();

    let (case, parts, inverse) = match &cut.kind {
        CutKind::Component { component, stabilizer_index } => {
            let (g1, a1, r1) = expand(g, a, v, *stabilizer_index, component)?;
            let inv = InverseMove::Collapse(new_edge_name(&g1));
            (UnfoldCase::Component, vec![(g1, a1, r1)], inv)
        }
        CutKind::CutPoint { point, side } if g.label(point.edge).abs() == 1 => {
            let ep = point.edge;
            let period = link_period(g, v);
            let spread = orbit_under(g, side, 1, period);
            let mut rest = link.clone();
            rest.remove(point);
            if spread != rest {
                let other: BTreeSet<LinkPoint> = rest.difference(&spread).copied().collect();
                let (g1, a1, r1) = expand(g, a, v, 1, &spread)?;
                let name_a = new_edge_name(&g1);
                let (g2, a2, r2) = expand(&g1, &a1, v, 1, &other)?;
                let name_b = new_edge_name(&g2);
                let (g3, a3, r3) = collapse_edge(&g2, &a2, ep.rev())?;
                let inv = InverseMove::FoldA(name_a, name_b);
                (UnfoldCase::InvariantTypeA, vec![(g1, a1, r1), (g2, a2, r2), (g3, a3, r3)], inv)
            } else {
                let n = orbit_size(g, side);
                let (g1, a1, r1) = expand(g, a, v, n, side)?;
                let name = new_edge_name(&g1);
                let (g2, a2, r2) = collapse_edge(&g1, &a1, ep.rev())?;
                (UnfoldCase::InvariantTypeC, vec![(g1, a1, r1), (g2, a2, r2)], InverseMove::FoldC(name, n))
            }
        }
        CutKind::CutPoint { point, side } => {
            let ep = point.edge;
            let m = g.label(ep).unsigned_abs();
            let period = link_period(g, v);
            let spread = orbit_under(g, side, m, period);
            let mut first = spread.clone();
            first.insert(*point);
            let (g1, a1, r1) = expand(g, a, v, m, &first)?;
            let w = VertexId(g1.vertex_count() - 1);
            let name1 = new_edge_name(&g1);
            let moved: BTreeSet<EdgeId> = spread.iter().map(|p| p.edge).collect();
            let fibres: BTreeSet<LinkPoint> =
                cover::link_points(&g1, w).into_iter().filter(|p| moved.contains(&p.edge)).collect();
            let (g2, a2, r2) = expand(&g1, &a1, w, 1, &fibres)?;
            let name2 = new_edge_name(&g2);
            let (g3, a3, r3) = collapse_edge(&g2, &a2, ep.rev())?;
            let inv = InverseMove::FoldB(format!("~{name1}"), name2);
            (UnfoldCase::Orbit, vec![(g1, a1, r1), (g2, a2, r2), (g3, a3, r3)], inv)
        }
    };

    let (h, b, _) = parts.last().cloned().unwrap();
    let records: Vec<MoveRecord> = parts.into_iter().map(|p| p.2).collect();
    let kind = MoveKind::Unfold { case, vertex: vname, inverse };
    let record = MoveRecord::composite(kind, records)?;

    if h.edge_count() != g.edge_count() + case.edge_delta() {
        return Err(Error::Internal(format!("unfold case {} changed the edge count unexpectedly", case.code())));
    }
    for w in collection {
        let image = record.forward.apply_loop(&h, w)?;
        if words::translation_length(&h, &image)? != words::translation_length(g, w)? {
            return Err(Error::Internal(format!("unfold case {} changed a translation length", case.code())));
        }
    }
    Ok((h, b, record))
}
