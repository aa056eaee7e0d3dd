//! Words in the Bass group: paths and loops in a graph of cyclic groups.
//!
//! A path alternates vertex powers `a_v^k` and edge letters `t_e`. The
//! relation used throughout is `a_o^{λ(e)k} t_e = t_e a_t^{λ(ē)k}`.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MarkedGraph, VertexId};

/// Exponent type. Exponents grow multiplicatively when pushed through edges.
pub type Int = i128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Syllable {
    Power(VertexId, Int),
    Edge(EdgeId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BassWord {
    start: VertexId,
    syllables: Vec<Syllable>,
}

impl BassWord {
    pub fn new(start: VertexId, syllables: Vec<Syllable>) -> Self {
        BassWord { start, syllables }
    }

    pub fn empty(start: VertexId) -> Self {
        BassWord { start, syllables: Vec::new() }
    }

    pub fn power(v: VertexId, k: Int) -> Self {
        BassWord { start: v, syllables: vec![Syllable::Power(v, k)] }
    }

    pub fn edge(g: &MarkedGraph, e: EdgeId) -> Self {
        BassWord { start: g.origin(e), syllables: vec![Syllable::Edge(e)] }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of edge letters.
    pub fn edge_count(&self) -> usize {
        self.syllables.iter().filter(|s| matches!(s, Syllable::Edge(_))).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.syllables.iter().filter_map(|s| match s {
            Syllable::Edge(e) => Some(*e),
            Syllable::Power(..) => None,
        })
    }

    /// Checks path continuity and returns the end vertex.
    pub fn end(&self, g: &MarkedGraph) -> Result<VertexId> {
        let mut cur = self.start;
        if cur.0 >= g.vertex_count() {
            return Err(Error::InvalidPath("unknown start vertex".into()));
        }
        for s in &self.syllables {
            match *s {
                Syllable::Power(v, _) => {
                    if v != cur {
                        return Err(Error::InvalidPath(format!(
                            "power of {} at vertex {}",
                            g.vertex_name(v),
                            g.vertex_name(cur)
                        )));
                    }
                }
                Syllable::Edge(e) => {
                    if e.index() >= g.edge_count() {
                        return Err(Error::InvalidPath("unknown edge".into()));
                    }
                    if g.origin(e) != cur {
                        return Err(Error::InvalidPath(format!(
                            "edge {} does not start at {}",
                            g.edge_name(e),
                            g.vertex_name(cur)
                        )));
                    }
                    cur = g.terminus(e);
                }
            }
        }
        Ok(cur)
    }

    pub fn is_loop_at(&self, g: &MarkedGraph, v: VertexId) -> bool {
        self.start == v && self.end(g).ok() == Some(v)
    }

    /// Formal inverse; `end` is the end vertex of `self`, which becomes the start.
    pub fn inverse_from(&self, end: VertexId) -> BassWord {
        let syllables = self
            .syllables
            .iter()
            .rev()
            .map(|s| match *s {
                Syllable::Power(v, k) => Syllable::Power(v, -k),
                Syllable::Edge(e) => Syllable::Edge(e.rev()),
            })
            .collect();
        BassWord { start: end, syllables }
    }

    pub fn inverse(&self, g: &MarkedGraph) -> Result<BassWord> {
        Ok(self.inverse_from(self.end(g)?))
    }

    /// Concatenation without any check; the caller guarantees compatibility.
    pub fn concat(&self, other: &BassWord) -> BassWord {
        let mut syllables = self.syllables.clone();
        syllables.extend_from_slice(&other.syllables);
        BassWord { start: self.start, syllables }
    }

    pub fn concat_all<'a>(start: VertexId, parts: impl IntoIterator<Item = &'a BassWord>) -> BassWord {
        let mut out = BassWord::empty(start);
        for p in parts {
            out.syllables.extend_from_slice(&p.syllables);
        }
        out
    }

    pub(crate) fn push(&mut self, s: Syllable) {
        self.syllables.push(s);
    }
}

/// Normal form `a^{p_0} t_{e_1} a^{p_1} ... t_{e_n} a^{p_n}` with
/// `0 <= p_{i-1} < |λ(e_i)|` and no reducible subword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct NormalForm {
    pub start: VertexId,
    pub powers: Vec<Int>,
    pub edges: Vec<EdgeId>,
}

impl NormalForm {
    fn new(start: VertexId) -> Self {
        NormalForm { start, powers: vec![0], edges: Vec::new() }
    }

    pub fn vertex_at(&self, g: &MarkedGraph, i: usize) -> VertexId {
        if i == 0 {
            self.start
        } else {
            g.terminus(self.edges[i - 1])
        }
    }

    fn push(&mut self, g: &MarkedGraph, s: Syllable) {
        match s {
            Syllable::Power(_, k) => *self.powers.last_mut().unwrap() += k,
            Syllable::Edge(e) => {
                let m = *self.powers.last().unwrap();
                let le = g.label(e) as Int;
                if let Some(&last) = self.edges.last() {
                    if e == last.rev() && m % le == 0 {
                        self.edges.pop();
                        self.powers.pop();
                        *self.powers.last_mut().unwrap() += g.label(last) as Int * (m / le);
                        return;
                    }
                }
                let r = m.rem_euclid(le.abs());
                let k = (m - r) / le;
                *self.powers.last_mut().unwrap() = r;
                self.edges.push(e);
                self.powers.push(g.label(e.rev()) as Int * k);
            }
        }
    }

    pub fn to_word(&self, g: &MarkedGraph) -> BassWord {
        let mut w = BassWord::empty(self.start);
        for (i, &p) in self.powers.iter().enumerate() {
            if i > 0 {
                w.push(Syllable::Edge(self.edges[i - 1]));
            }
            if p != 0 {
                w.push(Syllable::Power(self.vertex_at(g, i), p));
            }
        }
        w
    }
}

pub(crate) fn normal_form(g: &MarkedGraph, w: &BassWord) -> Result<NormalForm> {
    w.end(g)?;
    let mut nf = NormalForm::new(w.start);
    for &s in &w.syllables {
        nf.push(g, s);
    }
    Ok(nf)
}

/// Rewrites `w` to its reduced normal form.
pub fn reduce_path(g: &MarkedGraph, w: &BassWord) -> Result<BassWord> {
    Ok(normal_form(g, w)?.to_word(g))
}

fn is_cyclically_reduced(g: &MarkedGraph, core: &BassWord) -> bool {
    let n = core.edge_count();
    n == 0 || normal_form(g, &core.concat(core)).map(|nf| nf.edges.len() == 2 * n).unwrap_or(false)
}

/// Returns `(core, conj)` with `core` cyclically reduced and `w = conj⁻¹ core conj`.
/// `conj` runs from the base of `core` to the start of `w`.
pub fn cyclically_reduce(g: &MarkedGraph, w: &BassWord) -> Result<(BassWord, BassWord)> {
    if !w.is_loop_at(g, w.start) {
        w.end(g)?;
        return Err(Error::NotALoop);
    }
    let mut core = reduce_path(g, w)?;
    let mut conj = BassWord::empty(w.start);
    while !is_cyclically_reduced(g, &core) {
        // γ = a^{p_0} t_{e_1}; conjugating by γ moves the base one step along the loop
        let mut gamma = BassWord::empty(core.start);
        for &s in &core.syllables {
            gamma.push(s);
            if matches!(s, Syllable::Edge(_)) {
                break;
            }
        }
        let gamma_end = gamma.end(g)?;
        let gamma_inv = gamma.inverse_from(gamma_end);
        core = reduce_path(g, &BassWord::concat_all(gamma_end, [&gamma_inv, &core, &gamma]))?;
        conj = reduce_path(g, &gamma_inv.concat(&conj))?;
    }
    Ok((core, conj))
}

pub fn translation_length(g: &MarkedGraph, w: &BassWord) -> Result<usize> {
    Ok(cyclically_reduce(g, w)?.0.edge_count())
}

pub fn is_loxodromic(g: &MarkedGraph, w: &BassWord) -> Result<bool> {
    Ok(translation_length(g, w)? > 0)
}

/// Equality in the Bass group of two paths with common endpoints.
pub fn elements_equal(g: &MarkedGraph, w1: &BassWord, w2: &BassWord) -> Result<bool> {
    let e1 = w1.end(g)?;
    let e2 = w2.end(g)?;
    if w1.start != w2.start || e1 != e2 {
        return Err(Error::InvalidPath("endpoint mismatch".into()));
    }
    Ok(reduce_path(g, &w1.concat(&w2.inverse_from(e2)))?.is_empty())
}

/// `ᾱ w α` for a path `α` from the base of `w` to a new base.
pub fn change_basepoint(g: &MarkedGraph, alpha: &BassWord, w: &BassWord) -> Result<BassWord> {
    let target = alpha.end(g)?;
    if alpha.start != w.start || !w.is_loop_at(g, w.start) {
        return Err(Error::InvalidPath("basepoint change path does not start at the loop base".into()));
    }
    reduce_path(g, &BassWord::concat_all(target, [&alpha.inverse_from(target), w, alpha]))
}

/// `w^k` for a loop `w`, computed on the cyclic core so large exponents stay cheap
/// for elliptic `w`.
pub fn loop_power(g: &MarkedGraph, w: &BassWord, k: Int) -> Result<BassWord> {
    let (core, conj) = cyclically_reduce(g, w)?;
    let base = core.start;
    let body = if core.edge_count() == 0 {
        let exp: Int = core
            .syllables
            .iter()
            .map(|s| match s {
                Syllable::Power(_, p) => *p,
                Syllable::Edge(_) => 0,
            })
            .sum();
        if exp == 0 {
            BassWord::empty(base)
        } else {
            BassWord::power(base, exp * k)
        }
    } else {
        let unit = if k < 0 { core.inverse_from(base) } else { core };
        let mut out = BassWord::empty(base);
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&unit);
        }
        out
    };
    let conj_end = conj.end(g)?;
    reduce_path(g, &BassWord::concat_all(conj_end, [&conj.inverse_from(conj_end), &body, &conj]))
}

/// Applies a letter substitution: `power(v)` is the image of `a_v` (a loop),
/// `edge(e)` the image of `t_e`. The result lives in `target` and is reduced there.
pub(crate) fn substitute(
    target: &MarkedGraph,
    w: &BassWord,
    start: VertexId,
    power: &dyn Fn(VertexId) -> BassWord,
    edge: &dyn Fn(EdgeId) -> BassWord,
) -> Result<BassWord> {
    let mut out = BassWord::empty(start);
    for &s in &w.syllables {
        let piece = match s {
            Syllable::Power(v, k) => loop_power(target, &power(v), k)?,
            Syllable::Edge(e) => edge(e),
        };
        out = out.concat(&piece);
    }
    let out = reduce_path(target, &out)?;
    Ok(out)
}

/// Parses a word; an empty word, or `1`, is the trivial path at `start`
/// (the basepoint when `start` is `None`).
pub fn parse_word_from(g: &MarkedGraph, start: Option<VertexId>, text: &str) -> Result<BassWord> {
    let mut syllables = Vec::new();
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        if let Some(name) = tok.strip_prefix('~') {
            let e = g
                .edge_by_name(name)
                .ok_or_else(|| Error::InvalidPath(format!("unknown edge {name:?}")))?;
            syllables.push(Syllable::Edge(e.rev()));
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, k)) => {
                let k: Int = k.parse().map_err(|_| Error::InvalidPath(format!("bad exponent in {tok:?}")))?;
                (n, Some(k))
            }
            None => (tok, None),
        };
        if let Some(v) = g.vertex_by_name(name) {
            syllables.push(Syllable::Power(v, exp.unwrap_or(1)));
        } else if let (Some(e), None) = (g.edge_by_name(name), exp) {
            syllables.push(Syllable::Edge(e));
        } else {
            return Err(Error::InvalidPath(format!("unknown token {tok:?}")));
        }
    }
    let start = match (syllables.first(), start) {
        (Some(Syllable::Power(v, _)), _) => *v,
        (Some(Syllable::Edge(e)), _) => g.origin(*e),
        (None, Some(v)) => v,
        (None, None) => g.basepoint(),
    };
    let w = BassWord { start, syllables };
    w.end(g)?;
    Ok(w)
}

pub fn parse_word(g: &MarkedGraph, text: &str) -> Result<BassWord> {
    parse_word_from(g, None, text)
}

/// Parses a words file: one word per line, `#` comments, blank lines skipped.
pub fn parse_words(g: &MarkedGraph, text: &str) -> Result<Vec<BassWord>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, l)| parse_word(g, l).map_err(|e| Error::Parse { line: n, message: e.to_string() }))
        .collect()
}

pub fn format_word(g: &MarkedGraph, w: &BassWord) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.syllables
        .iter()
        .map(|s| match *s {
            Syllable::Power(v, 1) => g.vertex_name(v).to_string(),
            Syllable::Power(v, k) => format!("{}^{}", g.vertex_name(v), k),
            Syllable::Edge(e) => g.edge_name(e),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Display adaptor for a word in a graph.
pub struct WordDisplay<'a>(pub &'a MarkedGraph, pub &'a BassWord);

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(self.0, self.1))
    }
}
