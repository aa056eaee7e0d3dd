//! Line-based move log. Composite moves list their constituents indented by
//! two spaces; each top-level move is followed by the images of the marking.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{
    collapse_edge, expand, fold_edges, fold_type_c, subdivide_loops, unfold_type_c, MoveKind, MoveRecord,
};
use crate::cover::LinkPoint;
use crate::error::{Error, Result};
use crate::graph::{AllowedFamily, MarkedGraph};
use crate::words::{self, format_word};

fn move_line(kind: &MoveKind) -> String {
    match kind {
        MoveKind::Collapse { edge } => format!("COLLAPSE {edge}"),
        MoveKind::Expand { vertex, index, subset } => {
            let s: Vec<String> = subset.iter().map(|(e, k)| format!("{e}:{k}")).collect();
            format!("EXPAND {vertex} {index} {}", s.join(","))
        }
        MoveKind::Subdivide => "SUBDIVIDE".into(),
        MoveKind::Fold { kind, edges, divisor } => match kind {
            super::FoldType::C => format!("FOLD C {} {divisor}", edges[0]),
            other => format!("FOLD {} {}", other.code(), edges.join(" ")),
        },
        MoveKind::UnfoldTypeC { edge, factor } => format!("UNFOLDC {edge} {factor}"),
        MoveKind::Unfold { case, vertex, .. } => format!("UNFOLD {} {vertex}", case.code()),
    }
}

fn write_record(out: &mut String, r: &MoveRecord, indent: &str) {
    writeln!(out, "{indent}{}", move_line(&r.kind)).unwrap();
    for s in &r.sub {
        write_record(out, s, "  ");
    }
}

/// Serializes moves, each followed by `ISO <gen> = <word>` lines.
pub fn write_log(records: &[MoveRecord]) -> String {
    let mut out = String::new();
    for r in records {
        write_record(&mut out, r, "");
        for (name, w) in r.target.marking() {
            writeln!(out, "ISO {name} = {}", format_word(&r.target, w)).unwrap();
        }
    }
    out
}

fn apply_line(g: &MarkedGraph, a: &AllowedFamily, line: &str) -> Result<Option<(MarkedGraph, AllowedFamily)>> {
    let bad = |m: String| Error::InvalidInput(format!("log: {m}"));
    let t: Vec<&str> = line.split_whitespace().collect();
    let edge = |name: &str| g.edge_by_name(name).ok_or_else(|| bad(format!("unknown edge {name}")));
    let number = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad number {s}")));
    let res = match t.as_slice() {
        ["COLLAPSE", e] => collapse_edge(g, a, edge(e)?)?,
        ["EXPAND", v, n, subset] => {
            let v = g.vertex_by_name(v).ok_or_else(|| bad(format!("unknown vertex {v}")))?;
            let mut s = BTreeSet::new();
            for item in subset.split(',') {
                let (e, k) = item.split_once(':').ok_or_else(|| bad(format!("bad link point {item}")))?;
                s.insert(LinkPoint { edge: edge(e)?, coset: number(k)? });
            }
            expand(g, a, v, number(n)?, &s)?
        }
        ["SUBDIVIDE"] => {
            let (h, b, _) = subdivide_loops(g, a)?;
            return Ok(Some((h, b)));
        }
        ["FOLD", "C", e, d] => fold_type_c(g, a, edge(e)?, number(d)?)?,
        ["FOLD", "A" | "B", e1, e2] => fold_edges(g, a, edge(e1)?, edge(e2)?)?,
        ["UNFOLDC", e, d] => unfold_type_c(g, a, edge(e)?, number(d)?)?,
        ["UNFOLD", ..] => return Ok(None),
        _ => return Err(bad(format!("unrecognized line {line:?}"))),
    };
    Ok(Some((res.0, res.1)))
}

/// Replays a log from `(g, a)`, checking every `ISO` line against the
/// transported marking.
pub fn replay_log(g: &MarkedGraph, a: &AllowedFamily, text: &str) -> Result<(MarkedGraph, AllowedFamily)> {
    let mut cur = (g.clone(), a.clone());
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("ISO ") {
            let (name, word) = rest
                .split_once(" = ")
                .ok_or_else(|| Error::InvalidInput(format!("log: bad ISO line {line:?}")))?;
            let expected = words::parse_word(&cur.0, word.trim())?;
            let actual = cur
                .0
                .marking()
                .iter()
                .find(|(n, _)| n == name.trim())
                .map(|(_, w)| w.clone())
                .ok_or_else(|| Error::InvalidInput(format!("log: unknown generator {name}")))?;
            if !words::elements_equal(&cur.0, &expected, &actual)? {
                return Err(Error::Internal(format!("log: marking of {name} does not match")));
            }
            continue;
        }
        if let Some(next) = apply_line(&cur.0, &cur.1, line)? {
            cur = next;
        }
    }
    Ok(cur)
}
