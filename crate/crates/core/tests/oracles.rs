mod common;

use common::{bm25_oracle, ged_oracle, lev_oracle, oracle_ranking, sorted_strings, tiny_graph, xml_raster_oracle};
use ladder_forge::editops::{ged, ged_with, levenshtein, GedConfig};
use ladder_forge::graph::graph_equal;
use ladder_forge::retrieval::{Bm25Index, Bm25Params};
use ladder_forge::synthgen::{generate_graph, SynthParams};
use ladder_forge::xml::emit_xml;
use proptest::prelude::*;

#[test]
fn ged_matches_enumeration_on_small_graphs() {
    let graphs: Vec<_> = (0..24).map(|s| tiny_graph(s, 3)).collect();
    for a in &graphs {
        for b in &graphs {
            let r = ged(a, b);
            assert!(r.exact);
            assert_eq!(r.cost, ged_oracle(a, b));
        }
    }
}

#[test]
fn ged_zero_iff_equal() {
    let graphs: Vec<_> = (100..140).map(|s| tiny_graph(s, 4)).collect();
    for a in &graphs {
        for b in &graphs {
            assert_eq!(ged(a, b).cost == 0, graph_equal(a, b));
        }
    }
}

#[test]
fn beam_never_beats_exact() {
    let forced_beam = GedConfig {
        exact_limit: 0,
        beam_width: 4,
    };
    for s in 0..60 {
        let a = tiny_graph(s, 5);
        let b = tiny_graph(s + 1000, 5);
        let approx = ged_with(&a, &b, &forced_beam);
        assert!(!approx.exact);
        assert!(approx.cost >= ged(&a, &b).cost);
    }
}

#[test]
fn bm25_scores_match_formula() {
    let docs = [
        ("d1", "motor start button X0 모터 기동"),
        ("d2", "motor stop button X1"),
        ("d3", "conveyor belt start 컨베이어"),
        ("d4", "lamp on when motor runs"),
        ("d5", "모터 정지 램프"),
    ];
    let idx = Bm25Index::build(docs.iter().copied(), Bm25Params::default()).unwrap();
    for q in ["motor start", "모터", "lamp", "zzz", "button X1 stop"] {
        let oracle = bm25_oracle(&docs, q, 1.2, 0.75);
        for (id, want) in &oracle {
            let got = idx.score(&ladder_forge::retrieval::tokenize(q), id).unwrap();
            assert!((got - want).abs() < 1e-9, "{q} {id}: {got} vs {want}");
        }
        let ranked: Vec<String> = idx.rank(q, None).into_iter().map(|h| h.sample_id).collect();
        assert_eq!(ranked, oracle_ranking(oracle));
    }
}

#[test]
fn emitted_xml_decodes_the_same_under_raster_reading() {
    let p = SynthParams {
        min_nodes: 1,
        max_nodes: 20,
        branch_prob: 0.4,
        fb_prob: 0.4,
        ..SynthParams::default()
    };
    for i in 0..300 {
        let g = generate_graph(&p, i).unwrap();
        let text = emit_xml(&g).unwrap();
        assert_eq!(xml_raster_oracle(&text), sorted_strings(&g), "graph {i}:\n{text}");
    }
}

proptest! {
    #[test]
    fn levenshtein_matches_table(a in "[a-c가나]{0,8}", b in "[a-c가나]{0,8}") {
        prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&a, &b));
    }

    #[test]
    fn ged_is_symmetric(s1 in 0u64..5000, s2 in 0u64..5000) {
        let a = tiny_graph(s1, 5);
        let b = tiny_graph(s2, 5);
        prop_assert_eq!(ged(&a, &b).cost, ged(&b, &a).cost);
    }

    #[test]
    fn bm25_tf_monotone(len in 2usize..12, i in 0usize..11, noise in "[a-e ]{0,20}") {
        let i = i % len;
        // Same length, same index: only the term frequency of `q` differs.
        let doc = |k: usize| {
            let mut words = vec!["q"; k];
            words.extend(vec!["w"; len - k]);
            words.join(" ")
        };
        let (lo, hi) = (doc(i), doc(i + 1));
        let idx = Bm25Index::build(
            [("lo", lo.as_str()), ("hi", hi.as_str()), ("z", noise.as_str())],
            Bm25Params::default(),
        )
        .unwrap();
        let q = vec!["q".to_string()];
        let (s_lo, s_hi) = (idx.score(&q, "lo").unwrap(), idx.score(&q, "hi").unwrap());
        prop_assert!(s_lo >= 0.0);
        prop_assert!(s_hi >= s_lo);
        prop_assert_eq!(s_lo == 0.0, i == 0);
    }
}
