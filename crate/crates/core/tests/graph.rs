mod common;

use std::collections::BTreeSet;
use std::fs;

use common::*;
use pidinst::*;
use proptest::prelude::*;

fn load(dir: &str) -> Vec<InstrumentRecord> {
    let base = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus").join(dir);
    let mut paths: Vec<_> = fs::read_dir(base)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pidinst"))
        .collect();
    paths.sort();
    paths.iter().map(|p| parse_record(&fs::read_to_string(p).unwrap()).unwrap()).collect()
}

#[test]
fn hzb_corpus() {
    let g = build_graph(&load("hzb")).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    assert_eq!(g.dangling(), ["10.17815/jlsrf-4-110"]);
    let out = g
        .neighbors("10.5442/NI000001", Some(&RelationType::IsDescribedBy), Direction::Out)
        .unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!((out[0].to.as_str(), out[0].identifier_type.as_str()), ("10.17815/jlsrf-4-110", "DOI"));
    assert_eq!(g.to_edge_list(), "10.5442/NI000001\tIsDescribedBy\t10.17815/jlsrf-4-110\n");
}

#[test]
fn component_corpus() {
    let corpus = load("eiscat");
    let g = build_graph(&corpus).unwrap();
    assert_eq!(g.node_count(), 4);
    assert!(g.nodes().all(|(_, k)| k == NodeKind::Instrument));
    assert!(g.dangling().is_empty());
    let has = Some(&RelationType::HasComponent);
    let radar = "21.T11998/EISCAT-RADAR";
    assert_eq!(g.neighbors(radar, has, Direction::Out).unwrap().len(), 3);
    for unit in ["21.T11998/EISCAT-RX-1", "21.T11998/EISCAT-RX-2", "21.T11998/EISCAT-TX-1"] {
        let incoming = g.neighbors(unit, has, Direction::In).unwrap();
        let brute: Vec<_> = g.edges().filter(|e| e.to == unit && e.relation == RelationType::HasComponent).collect();
        assert_eq!(incoming, brute);
        assert_eq!(incoming.len(), 1);
        assert_eq!(incoming[0].from, radar);
        assert!(g.neighbors(unit, has, Direction::Out).unwrap().is_empty());
    }
}

#[test]
fn json_dump_lists_every_node_and_edge() {
    let g = build_graph(&load("eiscat")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
    assert_eq!(v["edges"][0]["relation"], "HasComponent");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_naive_scan(corpus in corpus(50)) {
        let g = build_graph(&corpus).unwrap();
        let (nodes, edges, dangling) = naive_graph(&corpus);
        prop_assert_eq!(g.node_count(), nodes);
        prop_assert_eq!(g.edge_count(), edges);
        prop_assert_eq!(g.dangling(), dangling);
    }

    #[test]
    fn directions_compose(corpus in corpus(20)) {
        let g = build_graph(&corpus).unwrap();
        let pids: Vec<String> = g.nodes().map(|(p, _)| p.to_string()).collect();
        for p in pids {
            let out = g.neighbors(&p, None, Direction::Out).unwrap();
            let inc = g.neighbors(&p, None, Direction::In).unwrap();
            let both = g.neighbors(&p, None, Direction::Both).unwrap();
            let union: BTreeSet<_> = out.into_iter().chain(inc).collect();
            prop_assert_eq!(union, both.iter().cloned().collect::<BTreeSet<_>>());
            let mut sorted = both.clone();
            sorted.sort_by(|a, b| (&a.relation, &a.to, &a.from).cmp(&(&b.relation, &b.to, &b.from)));
            prop_assert_eq!(sorted, both);
        }
    }

    #[test]
    fn order_insensitive(
        (corpus, shuffled) in corpus(30).prop_flat_map(|c| (Just(c.clone()), Just(c).prop_shuffle()))
    ) {
        let a = build_graph(&corpus).unwrap();
        let b = build_graph(&shuffled).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert_eq!(a, b);
    }
}
