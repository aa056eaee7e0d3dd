mod common;

use gbs_core::moves::{self, replay_log, write_log};
use gbs_core::{factors, parse_graph, serialize_graph, words};

const SEED: u64 = 77;

#[test]
fn logs_replay_to_the_recorded_graph() {
    let mut replayed = 0;
    for inst in common::corpus(SEED, 40) {
        let run = factors::check_simple(&inst.graph, &inst.allowed, &inst.words).unwrap();
        let Some(last) = run.moves.last() else { continue };
        let mut start = inst.graph.clone();
        start
            .set_marking(inst.words.iter().enumerate().map(|(i, w)| (format!("w{i}"), w.clone())).collect())
            .unwrap();
        let log = write_log(&run.moves);
        let (g, _) = replay_log(&start, &inst.allowed, &log).unwrap_or_else(|e| panic!("{e}\n{log}\n{}", inst.describe()));
        assert_eq!(g.edges(), last.target.edges(), "{log}");
        for ((_, x), (_, y)) in g.marking().iter().zip(last.target.marking()) {
            assert!(words::elements_equal(&g, x, y).unwrap());
        }
        replayed += 1;
    }
    assert!(replayed > 10);
}

#[test]
fn tampered_log_is_rejected() {
    let (mut g, a) = parse_graph("gbs v1\nvertex v\nedge e v v 2 4\nbasepoint v\n").unwrap();
    let w = gbs_core::parse_word(&g, "e v ~e v").unwrap();
    g.set_marking(vec![("w0".into(), w.clone())]).unwrap();
    let run = factors::check_simple(&g, &a, &[w]).unwrap();
    let log = write_log(&run.moves);
    assert!(replay_log(&g, &a, &log).is_ok());
    let first_iso = log.lines().position(|l| l.starts_with("ISO ")).unwrap();
    let tampered: Vec<String> = log
        .lines()
        .enumerate()
        .map(|(i, l)| if i == first_iso { format!("{} v", l) } else { l.to_string() })
        .collect();
    assert!(replay_log(&g, &a, &tampered.join("\n")).is_err());
    assert!(replay_log(&g, &a, "TWIST e").is_err());
}

#[test]
fn serialized_graphs_reparse() {
    for inst in common::corpus(SEED + 1, 30) {
        for (h, b) in [
            (inst.graph.clone(), inst.allowed.clone()),
            {
                let (r, b, _) = moves::reduce_graph(&inst.graph, &inst.allowed).unwrap();
                (r, b)
            },
            {
                let (s, b, _) = moves::subdivide_loops(&inst.graph, &inst.allowed).unwrap();
                (s, b)
            },
        ] {
            let text = serialize_graph(&h, &b);
            let (h2, b2) = parse_graph(&text).unwrap();
            assert_eq!(h2.edges(), h.edges());
            assert_eq!(serialize_graph(&h2, &b2), text);
        }
    }
}

#[test]
fn reduction_preserves_lengths() {
    for inst in common::corpus(SEED + 2, 30) {
        let mut g = inst.graph.clone();
        g.set_marking(inst.words.iter().enumerate().map(|(i, w)| (format!("w{i}"), w.clone())).collect()).unwrap();
        let (r, _, records) = moves::reduce_graph(&g, &inst.allowed).unwrap();
        assert!(moves::first_collapsible(&r).is_none());
        let f = moves::compose_forward(&g, &records).unwrap();
        for ((_, w), (_, img)) in g.marking().iter().zip(r.marking()) {
            let mapped = f.apply_loop(&r, w).unwrap();
            assert!(words::elements_equal(&r, &mapped, img).unwrap());
            assert!(words::translation_length(&r, img).unwrap() <= words::translation_length(&g, w).unwrap());
        }
    }
}
