//! Decision procedure for simplicity and the minimal system of special factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::cover;
use crate::error::{Error, Result};
use crate::graph::{self, AllowedFamily, Edge, EdgeId, MarkedGraph, VertexId};
use crate::moves::{self, Morphism, MoveRecord, UnfoldCase};
use crate::whitehead;
use crate::words::{self, BassWord, Syllable};

/// Safety net on top of the edge-count bound.
const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComplexityTriple {
    pub b1: u64,
    pub m: u64,
    pub sigma: u64,
}

impl fmt::Display for ComplexityTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.b1, self.m, self.sigma)
    }
}

/// `(b1, m, sigma)` of the reduced form; `(0, 0, 0)` for elementary groups.
pub fn complexity(g: &MarkedGraph) -> ComplexityTriple {
    if g.classify_elementary().is_elementary() {
        return ComplexityTriple { b1: 0, m: 0, sigma: 0 };
    }
    let a = AllowedFamily::all_cyclic(g.vertex_count());
    let (r, _, _) = moves::reduce_graph(g, &a).expect("reduction of a valid graph");
    let mut m = 0;
    let mut sigma = 0;
    for v in r.vertex_ids() {
        let labels: Vec<u64> = r.edges_from(v).iter().map(|&e| r.label(e).unsigned_abs()).collect();
        if !labels.is_empty() && labels.iter().all(|&l| l != 1) {
            m += 1;
            sigma += labels.iter().fold(0, |acc, &l| graph::gcd(acc, l));
        }
    }
    ComplexityTriple { b1: r.betti_number() as u64, m, sigma }
}

/// Quotient edges crossed by no axis of the collection.
pub fn avoided_edge_orbits(g: &MarkedGraph, collection: &[BassWord]) -> Result<BTreeSet<usize>> {
    let mut crossed = BTreeSet::new();
    for w in collection {
        crossed.extend(cover::axis_edges(g, w)?);
    }
    Ok((0..g.edge_count()).filter(|i| !crossed.contains(i)).collect())
}

/// One level of the passage from a parent graph to a factor: the parent is
/// carried to `final_graph` by moves, where the factor is the subgraph on
/// `vertices` and `edges`.
#[derive(Clone, Debug)]
pub struct Lift {
    pub forward: Morphism,
    pub backward: Morphism,
    pub final_graph: MarkedGraph,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<usize>,
    /// From the basepoint of `final_graph` to the factor basepoint.
    pub base_path: BassWord,
    /// The factor graph at this level.
    pub factor: MarkedGraph,
}

enum Located {
    Elliptic,
    Outside,
    /// `d` runs in the final graph from the factor basepoint to its basepoint;
    /// `d x d⁻¹` is `word`, a loop of the factor graph.
    Inside { d: BassWord, word: BassWord },
}

impl Lift {
    fn factor_vertex(&self, v: VertexId) -> Option<VertexId> {
        self.vertices.iter().position(|&x| x == v).map(VertexId)
    }

    fn factor_edge(&self, e: EdgeId) -> Option<EdgeId> {
        let j = self.edges.iter().position(|&i| i == e.index())?;
        Some(EdgeId(2 * j + (e.0 & 1)))
    }

    /// Rewrites a final-graph path supported on the component.
    fn to_factor(&self, w: &BassWord) -> Option<BassWord> {
        let mut syllables = Vec::new();
        for s in w.syllables() {
            syllables.push(match *s {
                Syllable::Power(v, k) => Syllable::Power(self.factor_vertex(v)?, k),
                Syllable::Edge(e) => Syllable::Edge(self.factor_edge(e)?),
            });
        }
        Some(BassWord::new(self.factor_vertex(w.start())?, syllables))
    }

    fn to_final(&self, w: &BassWord) -> BassWord {
        let syllables = w
            .syllables()
            .iter()
            .map(|s| match *s {
                Syllable::Power(v, k) => Syllable::Power(self.vertices[v.0], k),
                Syllable::Edge(e) => Syllable::Edge(EdgeId(2 * self.edges[e.index()] + (e.0 & 1))),
            })
            .collect();
        BassWord::new(self.vertices[w.start().0], syllables)
    }

    /// Inclusion of the factor graph into `final_graph`.
    fn inclusion_into_final(&self, factor: &MarkedGraph) -> Morphism {
        Morphism {
            vertex_map: self.vertices.clone(),
            vertex_images: self.vertices.iter().map(|&v| BassWord::power(v, 1)).collect(),
            edge_images: (0..factor.edge_count())
                .map(|j| BassWord::edge(&self.final_graph, EdgeId::forward(self.edges[j])))
                .collect(),
            base_shift: self.base_path.clone(),
        }
    }

    /// Where a loop of the level parent sits with respect to the factor.
    fn locate(&self, factor: &MarkedGraph, x: &BassWord) -> Result<Located> {
        let y = self.forward.apply_loop(&self.final_graph, x)?;
        let (core, conj) = words::cyclically_reduce(&self.final_graph, &y)?;
        if core.edge_count() == 0 {
            return Ok(Located::Elliptic);
        }
        let Some(s) = self.factor_vertex(core.start()) else {
            return Ok(Located::Outside);
        };
        if core.edges().any(|e| !self.edges.contains(&e.index())) {
            return Ok(Located::Outside);
        }
        let tau = factor.tree_path(factor.basepoint(), s, None).expect("factor graphs are connected");
        let d = words::reduce_path(&self.final_graph, &self.to_final(&tau).concat(&conj))?;
        match self.exact(factor, &d, x)? {
            Some(word) => Ok(Located::Inside { d, word }),
            None => Err(Error::Internal("axis inside a factor but conjugate outside it".into())),
        }
    }

    /// `d x d⁻¹` as a factor loop, if it lies in the factor exactly.
    fn exact(&self, factor: &MarkedGraph, d: &BassWord, x: &BassWord) -> Result<Option<BassWord>> {
        let g = &self.final_graph;
        let y = self.forward.apply_loop(g, x)?;
        let z = words::reduce_path(g, &BassWord::concat_all(d.start(), [d, &y, &d.inverse(g)?]))?;
        self.to_factor(&z).map(|w| words::reduce_path(factor, &w)).transpose()
    }
}

#[derive(Clone, Debug)]
pub struct Factor {
    /// The factor graph; its marking is the standard generating set.
    pub graph: MarkedGraph,
    pub allowed: AllowedFamily,
    /// Standard generators as loops of the parent.
    pub embedding: Vec<(String, BassWord)>,
    /// Factor graph to parent.
    pub inclusion: Morphism,
    pub chain: Vec<Lift>,
}

/// Collection element `element` equals `c · ι(word) · c⁻¹` with `c = conjugator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub element: usize,
    pub factor: usize,
    pub word: BassWord,
    pub conjugator: BassWord,
}

#[derive(Clone, Debug)]
pub struct FactorSystem {
    pub parent: MarkedGraph,
    pub factors: Vec<Factor>,
    pub is_proper: bool,
    pub members: Vec<Membership>,
}

/// Loops `a_u = τ_u a_u τ̄_u` and `t_e = τ_{o(e)} t_e τ̄_{t(e)}` for a BFS tree at the basepoint.
pub fn standard_generators(g: &MarkedGraph) -> Vec<(String, BassWord)> {
    let b = g.basepoint();
    let tau: Vec<BassWord> = g.vertex_ids().map(|u| g.tree_path(b, u, None).expect("connected graph")).collect();
    let tree: BTreeSet<usize> = tau.iter().filter_map(|p| p.edges().last().map(|e| e.index())).collect();
    let mut out = Vec::new();
    for u in g.vertex_ids() {
        let w = BassWord::concat_all(b, [&tau[u.0], &BassWord::power(u, 1), &tau[u.0].inverse_from(u)]);
        out.push((format!("a_{}", g.vertex_name(u)), w));
    }
    for (i, e) in g.edges().iter().enumerate() {
        if tree.contains(&i) {
            continue;
        }
        let f = EdgeId::forward(i);
        let w = BassWord::concat_all(
            b,
            [&tau[e.origin.0], &BassWord::edge(g, f), &tau[e.terminus.0].inverse_from(e.terminus)],
        );
        out.push((format!("t_{}", e.name), w));
    }
    out
}

fn embedding_of(parent: &MarkedGraph, graph: &MarkedGraph, inclusion: &Morphism) -> Result<Vec<(String, BassWord)>> {
    graph.marking().iter().map(|(n, w)| Ok((n.clone(), inclusion.apply_loop(parent, w)?))).collect()
}

/// The subgraph of `g` on `vertices` and `edges` as a factor of `g`.
fn build_factor(g: &MarkedGraph, a: &AllowedFamily, vertices: Vec<VertexId>, edges: Vec<usize>) -> Result<Factor> {
    let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let names: Vec<String> = vertices.iter().map(|&v| g.vertex_name(v).to_string()).collect();
    let sub_edges: Vec<Edge> = edges
        .iter()
        .map(|&i| {
            let e = &g.edges()[i];
            Edge { origin: VertexId(index[&e.origin]), terminus: VertexId(index[&e.terminus]), ..e.clone() }
        })
        .collect();
    let base = (0..names.len()).min_by_key(|&i| &names[i]).expect("nonempty component");
    let mut graph = MarkedGraph::new(names, sub_edges, VertexId(base))?;
    let gens = standard_generators(&graph);
    graph.set_marking(gens)?;
    let allowed = AllowedFamily::from_sets(vertices.iter().map(|&v| a.at(v).clone()).collect())?;
    let lift = Lift {
        forward: Morphism::identity(g),
        backward: Morphism::identity(g),
        final_graph: g.clone(),
        base_path: g.tree_path(g.basepoint(), vertices[base], None).expect("connected graph"),
        vertices,
        edges,
        factor: graph.clone(),
    };
    let inclusion = lift.inclusion_into_final(&graph);
    let embedding = embedding_of(g, &graph, &inclusion)?;
    Ok(Factor { graph, allowed, embedding, inclusion, chain: vec![lift] })
}

fn is_cyclic(g: &MarkedGraph) -> bool {
    let a = AllowedFamily::all_cyclic(g.vertex_count());
    let (r, _, _) = moves::reduce_graph(g, &a).expect("reduction of a valid graph");
    r.vertex_count() == 1 && r.edge_count() == 0
}

/// Non-elliptic components of the complement of `avoided`.
pub fn extract_factor_system(g: &MarkedGraph, a: &AllowedFamily, avoided: &BTreeSet<usize>) -> Result<FactorSystem> {
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut factors = Vec::new();
    let mut whole = false;
    for v in g.vertex_ids() {
        if seen.contains(&v) {
            continue;
        }
        let comp = g.component_of(v, avoided);
        seen.extend(comp.iter().copied());
        let edges: Vec<usize> = (0..g.edge_count())
            .filter(|i| !avoided.contains(i) && comp.contains(&g.edges()[*i].origin))
            .collect();
        let f = build_factor(g, a, comp.into_iter().collect(), edges)?;
        if is_cyclic(&f.graph) {
            continue;
        }
        whole = f.graph.vertex_count() == g.vertex_count() && f.graph.edge_count() == g.edge_count();
        factors.push(f);
    }
    let is_proper = !(factors.len() == 1 && whole);
    Ok(FactorSystem { parent: g.clone(), factors, is_proper, members: Vec::new() })
}

/// The non-proper system `{[G]}`.
pub fn whole_group(g: &MarkedGraph, a: &AllowedFamily) -> Result<FactorSystem> {
    let f = build_factor(g, a, g.vertex_ids().collect(), (0..g.edge_count()).collect())?;
    Ok(FactorSystem { parent: g.clone(), factors: vec![f], is_proper: false, members: Vec::new() })
}

impl Factor {
    /// Finds `c` and a factor loop `r` with `x = c · ι(r) · c⁻¹`, for `x` loxodromic.
    pub fn locate(&self, parent: &MarkedGraph, x: &BassWord) -> Result<Option<(BassWord, BassWord)>> {
        let mut x = x.clone();
        let mut conj = BassWord::empty(parent.basepoint());
        let mut to_top = Morphism::identity(parent);
        let mut level_graph = parent.clone();
        for lift in &self.chain {
            let fg = &lift.factor;
            match lift.locate(fg, &x)? {
                Located::Inside { d, word } => {
                    let g = &lift.final_graph;
                    let c = lift.backward.apply_loop(&level_graph, &d.inverse(g)?.concat(&lift.base_path.inverse(g)?))?;
                    conj = words::reduce_path(parent, &conj.concat(&to_top.apply_loop(parent, &c)?))?;
                    let incl = lift.inclusion_into_final(fg).then(&lift.backward, &level_graph)?;
                    to_top = incl.then(&to_top, parent)?;
                    level_graph = fg.clone();
                    x = word;
                }
                _ => return Ok(None),
            }
        }
        Ok(Some((conj, x)))
    }
}

fn compose_backward(last: &MarkedGraph, records: &[MoveRecord]) -> Result<Morphism> {
    let mut m = Morphism::identity(last);
    for r in records.iter().rev() {
        m = m.then(&r.backward, &r.source)?;
    }
    Ok(m)
}

/// Locates every collection element in some factor.
fn assign_members(system: &mut FactorSystem, collection: &[BassWord]) -> Result<()> {
    system.members.clear();
    'elements: for (i, w) in collection.iter().enumerate() {
        for (k, f) in system.factors.iter().enumerate() {
            if let Some((conjugator, word)) = f.locate(&system.parent, w)? {
                system.members.push(Membership { element: i, factor: k, word, conjugator });
                continue 'elements;
            }
        }
        return Err(Error::Internal(format!("element {i} lies in no factor")));
    }
    Ok(())
}

/// Re-expresses a system extracted on the last graph of `records` over `parent`.
fn reparent(
    parent: &MarkedGraph,
    mut system: FactorSystem,
    records: &[MoveRecord],
    collection: &[BassWord],
) -> Result<FactorSystem> {
    let forward = moves::compose_forward(parent, records)?;
    let backward = compose_backward(&system.parent, records)?;
    for f in &mut system.factors {
        let lift = &mut f.chain[0];
        lift.forward = forward.clone();
        lift.backward = backward.clone();
        f.inclusion = lift.inclusion_into_final(&f.graph).then(&backward, parent)?;
        f.embedding = embedding_of(parent, &f.graph, &f.inclusion)?;
    }
    system.parent = parent.clone();
    assign_members(&mut system, collection)?;
    Ok(system)
}

/// Checks `w_i = c · ι(r) · c⁻¹` for every recorded membership.
pub fn verify_membership(system: &FactorSystem, collection: &[BassWord]) -> Result<bool> {
    let g = &system.parent;
    for m in &system.members {
        let f = &system.factors[m.factor];
        let image = f.inclusion.apply_loop(g, &m.word)?;
        let c = &m.conjugator;
        let conj = BassWord::concat_all(c.start(), [c, &image, &c.inverse(g)?]);
        if !words::elements_equal(g, &collection[m.element], &conj)? {
            return Ok(false);
        }
    }
    Ok(collection.iter().enumerate().all(|(i, _)| system.members.iter().any(|m| m.element == i)))
}

#[derive(Clone, Debug)]
pub struct Certificate {
    /// Final graph; its marking carries the collection.
    pub graph: MarkedGraph,
    pub allowed: AllowedFamily,
    /// Answered from the classification without running the loop.
    pub elementary: bool,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Simple(FactorSystem),
    NotSimple(Certificate),
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// Translation lengths after subdivision, before any unfold.
    pub initial_lengths: Vec<usize>,
    pub length_sum: usize,
    /// Edge count after reduction and subdivision.
    pub initial_edges: usize,
    pub edge_counts: Vec<usize>,
    pub cases: Vec<UnfoldCase>,
    /// Translation lengths of the collection after each unfold.
    pub lengths: Vec<Vec<usize>>,
}

impl Trace {
    pub fn edge_bound(&self) -> usize {
        self.length_sum + self.initial_edges + 1
    }
}

#[derive(Clone, Debug)]
pub struct SimpleRun {
    pub outcome: Outcome,
    /// Every move from the input graph to the final graph.
    pub moves: Vec<MoveRecord>,
    pub trace: Trace,
}

impl SimpleRun {
    pub fn is_simple(&self) -> bool {
        matches!(self.outcome, Outcome::Simple(_))
    }
}

fn validate_collection(g: &MarkedGraph, a: &AllowedFamily, collection: &[BassWord]) -> Result<()> {
    if collection.is_empty() {
        return Err(Error::InvalidInput("empty collection".into()));
    }
    if a.len() != g.vertex_count() {
        return Err(Error::InvalidInput("allowed family does not match the graph".into()));
    }
    for w in collection {
        if !w.is_loop_at(g, g.basepoint()) {
            return Err(Error::InvalidInput(format!("{} is not a loop at the basepoint", words::format_word(g, w))));
        }
        if words::translation_length(g, w)? == 0 {
            return Err(Error::EllipticElement(words::format_word(g, w)));
        }
    }
    Ok(())
}

fn marking_words(g: &MarkedGraph) -> Vec<BassWord> {
    g.marking().iter().map(|(_, w)| w.clone()).collect()
}

/// Decides whether `collection` is simple in the space `(g, a)`.
pub fn check_simple(g: &MarkedGraph, a: &AllowedFamily, collection: &[BassWord]) -> Result<SimpleRun> {
    validate_collection(g, a, collection)?;
    let mut work = g.clone();
    work.set_marking(collection.iter().enumerate().map(|(i, w)| (format!("w{i}"), w.clone())).collect())?;
    let (reduced, ra, mut records) = moves::reduce_graph(&work, a)?;
    let (mut cur, mut ca, sub) = moves::subdivide_loops(&reduced, &ra)?;
    records.extend(sub);

    let mut trace = Trace { initial_edges: cur.edge_count(), ..Trace::default() };
    for w in marking_words(&cur) {
        trace.initial_lengths.push(words::translation_length(&cur, &w)?);
    }
    trace.length_sum = trace.initial_lengths.iter().sum();
    trace.edge_counts.push(cur.edge_count());

    if g.classify_elementary() != graph::Elementary::NonElementarySolvableFree {
        let cert = Certificate { graph: cur, allowed: ca, elementary: true };
        return Ok(SimpleRun { outcome: Outcome::NotSimple(cert), moves: records, trace });
    }

    for _ in 0..MAX_ITERATIONS {
        let coll = marking_words(&cur);
        let avoided = avoided_edge_orbits(&cur, &coll)?;
        if !avoided.is_empty() {
            let system = extract_factor_system(&cur, &ca, &avoided)?;
            if system.factors.is_empty() {
                return Err(Error::Internal("every complementary component is elliptic".into()));
            }
            if !system.is_proper {
                return Err(Error::Internal("extracted system is not proper".into()));
            }
            let system = reparent(g, system, &records, collection)?;
            return Ok(SimpleRun { outcome: Outcome::Simple(system), moves: records, trace });
        }
        let Some(cut) = whitehead::find_cut_anywhere(&cur, &ca, &coll)? else {
            let cert = Certificate { graph: cur, allowed: ca, elementary: false };
            return Ok(SimpleRun { outcome: Outcome::NotSimple(cert), moves: records, trace });
        };
        let (h, b, record) = moves::unfold_step(&cur, &ca, &coll, &cut)?;
        if let moves::MoveKind::Unfold { case, .. } = &record.kind {
            trace.cases.push(*case);
        }
        records.push(record);
        cur = h;
        ca = b;
        trace.edge_counts.push(cur.edge_count());
        trace.lengths.push(
            marking_words(&cur).iter().map(|w| words::translation_length(&cur, w)).collect::<Result<_>>()?,
        );
        if cur.edge_count() > trace.edge_bound() {
            return Err(Error::Internal(format!(
                "edge count {} exceeds the bound {}",
                cur.edge_count(),
                trace.edge_bound()
            )));
        }
    }
    Err(Error::Internal("iteration limit reached".into()))
}

/// Factors of `inner` (over `outer.graph`) re-expressed over `parent`.
fn nest(outer: &Factor, inner: &Factor, parent: &MarkedGraph) -> Result<Factor> {
    let mut chain = outer.chain.clone();
    chain.extend(inner.chain.iter().cloned());
    let inclusion = inner.inclusion.then(&outer.inclusion, parent)?;
    let embedding = embedding_of(parent, &inner.graph, &inclusion)?;
    Ok(Factor { graph: inner.graph.clone(), allowed: inner.allowed.clone(), embedding, inclusion, chain })
}

fn nest_system(outer: &Factor, inner: &FactorSystem, parent: &MarkedGraph) -> Result<FactorSystem> {
    Ok(FactorSystem {
        parent: parent.clone(),
        factors: inner.factors.iter().map(|f| nest(outer, f, parent)).collect::<Result<_>>()?,
        is_proper: inner.is_proper,
        members: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct MinimalRun {
    pub system: FactorSystem,
    /// `(parent, factor)` complexities along every recursion step.
    pub descents: Vec<(ComplexityTriple, ComplexityTriple)>,
    /// Every `Simple` system met during the recursion, over the input graph;
    /// their `members` are left empty.
    pub simple_outputs: Vec<FactorSystem>,
}

/// The smallest system of special factors carrying the collection.
pub fn minimal_factor_system(g: &MarkedGraph, a: &AllowedFamily, collection: &[BassWord]) -> Result<MinimalRun> {
    let mut descents = Vec::new();
    let mut outputs = Vec::new();
    let system = minimal_rec(g, a, collection, &mut descents, &mut outputs)?;
    Ok(MinimalRun { system, descents, simple_outputs: outputs })
}

fn minimal_rec(
    g: &MarkedGraph,
    a: &AllowedFamily,
    collection: &[BassWord],
    descents: &mut Vec<(ComplexityTriple, ComplexityTriple)>,
    outputs: &mut Vec<FactorSystem>,
) -> Result<FactorSystem> {
    let run = check_simple(g, a, collection)?;
    let system = match run.outcome {
        Outcome::NotSimple(_) => {
            let mut s = whole_group(g, a)?;
            assign_members(&mut s, collection)?;
            return Ok(s);
        }
        Outcome::Simple(s) => s,
    };
    let mut stripped = system.clone();
    stripped.members.clear();
    outputs.push(stripped);

    let here = complexity(g);
    let mut result = FactorSystem { parent: g.clone(), factors: Vec::new(), is_proper: true, members: Vec::new() };
    for (k, f) in system.factors.iter().enumerate() {
        let members: Vec<&Membership> = system.members.iter().filter(|m| m.factor == k).collect();
        if members.is_empty() {
            continue;
        }
        let there = complexity(&f.graph);
        descents.push((here, there));
        if there >= here {
            return Err(Error::Internal(format!("complexity did not decrease: {here} to {there}")));
        }
        let words: Vec<BassWord> = members.iter().map(|m| m.word.clone()).collect();
        let mut inner_outputs = Vec::new();
        let inner = minimal_rec(&f.graph, &f.allowed, &words, descents, &mut inner_outputs)?;
        for s in &inner_outputs {
            outputs.push(nest_system(f, s, g)?);
        }
        let offset = result.factors.len();
        for sf in &inner.factors {
            result.factors.push(nest(f, sf, g)?);
        }
        for m in &inner.members {
            let outer = members[m.element];
            let lifted = f.inclusion.apply_loop(g, &m.conjugator)?;
            let conjugator = words::reduce_path(g, &outer.conjugator.concat(&lifted))?;
            result.members.push(Membership {
                element: outer.element,
                factor: offset + m.factor,
                word: m.word.clone(),
                conjugator,
            });
        }
    }
    result.members.sort_by_key(|m| m.element);
    Ok(result)
}

fn same_parent(g: &MarkedGraph, h: &MarkedGraph) -> bool {
    g.vertex_names() == h.vertex_names() && g.edges() == h.edges() && g.basepoint() == h.basepoint()
}

/// Whether the subgroup generated by `gens` (loops of `parent`) lies in a
/// conjugate of `factor`. Generators and their pairwise products are tested
/// (a finitely generated group all of whose such elements are elliptic has a
/// global fixed point); elliptic subgroups count as contained.
pub fn subgroup_in_factor(parent: &MarkedGraph, gens: &[BassWord], factor: &Factor) -> Result<bool> {
    let mut level = parent.clone();
    let mut gens = gens.to_vec();
    for lift in &factor.chain {
        let mut candidates = gens.clone();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                candidates.push(words::reduce_path(&level, &gens[i].concat(&gens[j]))?);
            }
        }
        let mut witness = None;
        for x in &candidates {
            match lift.locate(&lift.factor, x)? {
                Located::Elliptic => {}
                Located::Outside => return Ok(false),
                Located::Inside { d, .. } => {
                    witness = Some(d);
                    break;
                }
            }
        }
        let Some(d) = witness else {
            return Ok(true);
        };
        let mut next = Vec::new();
        for x in &gens {
            match lift.exact(&lift.factor, &d, x)? {
                Some(w) => next.push(w),
                None => return Ok(false),
            }
        }
        gens = next;
        level = lift.factor.clone();
    }
    Ok(true)
}

/// `system1 ⪯ system2`: every factor of the first lies in a conjugate of a factor of the second.
pub fn is_peripheral(system1: &FactorSystem, system2: &FactorSystem) -> Result<bool> {
    if !same_parent(&system1.parent, &system2.parent) {
        return Err(Error::MismatchedParents);
    }
    for f in &system1.factors {
        let gens: Vec<BassWord> = f.embedding.iter().map(|(_, w)| w.clone()).collect();
        let mut found = false;
        for h in &system2.factors {
            if subgroup_in_factor(&system1.parent, &gens, h)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

fn write_factors(out: &mut String, system: &FactorSystem) {
    for (k, f) in system.factors.iter().enumerate() {
        writeln!(out, "factor {k}").unwrap();
        out.push_str(&graph::serialize_graph(&f.graph, &f.allowed));
        for (name, w) in &f.embedding {
            writeln!(out, "embed {name} = {}", words::format_word(&system.parent, w)).unwrap();
        }
        for m in system.members.iter().filter(|m| m.factor == k) {
            writeln!(out, "member {} = {}", m.element, words::format_word(&f.graph, &m.word)).unwrap();
        }
        writeln!(out, "end").unwrap();
    }
}

/// `SIMPLE` and the factor blocks, or `NOTSIMPLE` and the certificate document.
pub fn write_outcome(outcome: &Outcome) -> String {
    let mut out = String::new();
    match outcome {
        Outcome::Simple(system) => {
            out.push_str("SIMPLE\n");
            write_factors(&mut out, system);
        }
        Outcome::NotSimple(cert) => {
            out.push_str("NOTSIMPLE\n");
            out.push_str(&graph::serialize_graph(&cert.graph, &cert.allowed));
        }
    }
    out
}

/// A factor system in the result format; the header is `SIMPLE` for a proper system.
pub fn write_system(system: &FactorSystem) -> String {
    let mut out = String::from(if system.is_proper { "SIMPLE\n" } else { "NOTSIMPLE\n" });
    write_factors(&mut out, system);
    out
}

#[derive(Clone, Debug)]
pub struct ParsedFactor {
    pub graph: MarkedGraph,
    pub allowed: AllowedFamily,
    pub embedding: Vec<(String, BassWord)>,
    pub members: Vec<(usize, BassWord)>,
}

#[derive(Clone, Debug)]
pub struct ParsedResult {
    pub simple: bool,
    pub factors: Vec<ParsedFactor>,
    pub certificate: Option<(MarkedGraph, AllowedFamily)>,
}

fn offset_err(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse { line: line + offset, message },
        other => other,
    }
}

/// Reads the output of [`write_outcome`] or [`write_system`]; embedding
/// words are parsed in `parent`.
pub fn parse_result(parent: &MarkedGraph, text: &str) -> Result<ParsedResult> {
    let lines: Vec<&str> = text.lines().collect();
    let perr = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
    let mut i = lines.iter().position(|l| !l.trim().is_empty()).ok_or_else(|| perr(1, "empty result"))?;
    let simple = match lines[i].trim() {
        "SIMPLE" => true,
        "NOTSIMPLE" => false,
        _ => return Err(perr(i + 1, "expected SIMPLE or NOTSIMPLE")),
    };
    i += 1;
    let mut result = ParsedResult { simple, factors: Vec::new(), certificate: None };
    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }
    if i < lines.len() && !lines[i].trim().starts_with("factor") {
        let doc = lines[i..].join("\n");
        result.certificate = Some(graph::parse_graph(&doc).map_err(|e| offset_err(e, i))?);
        return Ok(result);
    }
    while i < lines.len() {
        let head = lines[i].trim();
        if head.is_empty() {
            i += 1;
            continue;
        }
        if !head.starts_with("factor ") {
            return Err(perr(i + 1, "expected `factor <k>`"));
        }
        let start = i + 1;
        let mut end = start;
        while end < lines.len() && !lines[end].trim().starts_with("embed") && !lines[end].trim().starts_with("member") && lines[end].trim() != "end" {
            end += 1;
        }
        let (fg, fa) = graph::parse_graph(&lines[start..end].join("\n")).map_err(|e| offset_err(e, start))?;
        let mut factor = ParsedFactor { graph: fg, allowed: fa, embedding: Vec::new(), members: Vec::new() };
        i = end;
        loop {
            let Some(line) = lines.get(i).map(|l| l.trim()) else {
                return Err(perr(i, "missing `end`"));
            };
            i += 1;
            if line == "end" {
                break;
            }
            let (lhs, rhs) = line.split_once(" = ").ok_or_else(|| perr(i, "expected `<key> = <word>`"))?;
            let word_err = |e: Error| match e {
                Error::Parse { .. } => e,
                other => perr(i, &other.to_string()),
            };
            if let Some(name) = lhs.strip_prefix("embed ") {
                let w = words::parse_word_from(parent, Some(parent.basepoint()), rhs).map_err(word_err)?;
                factor.embedding.push((name.trim().to_string(), w));
            } else if let Some(k) = lhs.strip_prefix("member ") {
                let k: usize = k.trim().parse().map_err(|_| perr(i, "bad member index"))?;
                let w = words::parse_word_from(&factor.graph, Some(factor.graph.basepoint()), rhs).map_err(word_err)?;
                factor.members.push((k, w));
            } else {
                return Err(perr(i, "expected `embed` or `member`"));
            }
        }
        result.factors.push(factor);
    }
    Ok(result)
}
