//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use gbs_core::graph::{Edge, Elementary};
use gbs_core::words::{self, Syllable};
use gbs_core::{AllowedFamily, BassWord, EdgeId, MarkedGraph, VertexId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(default_seed: u64) -> ChaCha8Rng {
    let seed = std::env::var("GBS_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(default_seed);
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: MarkedGraph,
    pub allowed: AllowedFamily,
    pub words: Vec<BassWord>,
}

impl Instance {
    pub fn describe(&self) -> String {
        let ws: Vec<String> = self.words.iter().map(|w| words::format_word(&self.graph, w)).collect();
        format!("{}words: {}", gbs_core::serialize_graph(&self.graph, &self.allowed), ws.join(" | "))
    }
}

fn label(rng: &mut ChaCha8Rng, max: i64) -> i64 {
    let l = rng.gen_range(1..=max);
    if rng.gen_bool(0.3) {
        -l
    } else {
        l
    }
}

/// Connected graph with at most `max_vertices` vertices, at most four edges and labels up to `max_label`.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize, max_label: i64) -> MarkedGraph {
    let n = rng.gen_range(1..=max_vertices);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((j, i));
    }
    let extra = rng.gen_range(if n == 1 { 1 } else { 0 }..=2);
    for _ in 0..extra {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let edges = edges
        .into_iter()
        .enumerate()
        .map(|(k, (o, t))| Edge {
            name: format!("e{k}"),
            origin: VertexId(o),
            terminus: VertexId(t),
            label_origin: label(rng, max_label),
            label_terminus: label(rng, max_label),
        })
        .collect();
    MarkedGraph::new(names, edges, VertexId(0)).expect("generated graph is valid")
}

fn path_between(g: &MarkedGraph, from: VertexId, to: VertexId) -> Vec<EdgeId> {
    let mut prev: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = vec![false; g.vertex_count()];
    seen[from.0] = true;
    while let Some(v) = queue.pop_front() {
        for e in g.edges_from(v) {
            let t = g.terminus(e);
            if !seen[t.0] {
                seen[t.0] = true;
                prev.insert(t, e);
                queue.push_back(t);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = to;
    while cur != from {
        let e = prev[&cur];
        out.push(e);
        cur = g.origin(e);
    }
    out.reverse();
    out
}

/// A loop at the basepoint with at most `max_syllables` syllables.
pub fn random_loop(g: &MarkedGraph, rng: &mut ChaCha8Rng, max_syllables: usize) -> BassWord {
    loop {
        let mut syllables = Vec::new();
        let mut cur = g.basepoint();
        let steps = rng.gen_range(1..=max_syllables);
        for _ in 0..steps {
            if rng.gen_bool(0.4) {
                let k = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
                syllables.push(Syllable::Power(cur, k));
            } else {
                let out = g.edges_from(cur);
                let e = out[rng.gen_range(0..out.len())];
                syllables.push(Syllable::Edge(e));
                cur = g.terminus(e);
            }
        }
        for e in path_between(g, cur, g.basepoint()) {
            syllables.push(Syllable::Edge(e));
        }
        if syllables.len() <= max_syllables {
            return BassWord::new(g.basepoint(), syllables);
        }
    }
}

/// Loxodromic loop, or `None` after a few attempts.
pub fn random_loxodromic(g: &MarkedGraph, rng: &mut ChaCha8Rng, max_syllables: usize) -> Option<BassWord> {
    (0..50)
        .map(|_| random_loop(g, rng, max_syllables))
        .find(|w| words::translation_length(g, w).unwrap() > 0)
}

/// Instances on non-elementary, non-solvable groups with one or two loxodromic words.
pub fn corpus(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let g = random_graph(&mut rng, 3, 5);
        if g.classify_elementary() != Elementary::NonElementarySolvableFree {
            continue;
        }
        let k = rng.gen_range(1..=2);
        let ws: Option<Vec<BassWord>> = (0..k).map(|_| random_loxodromic(&g, &mut rng, 12)).collect();
        let Some(ws) = ws else { continue };
        let allowed = match g.amin_sets() {
            Ok(a) if rng.gen_bool(0.3) => a,
            _ => AllowedFamily::all_cyclic(g.vertex_count()),
        };
        out.push(Instance { graph: g, allowed, words: ws });
    }
    out
}
