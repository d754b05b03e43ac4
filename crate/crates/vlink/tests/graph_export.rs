mod common;

use std::collections::BTreeMap;

use common::random_graph;
use rand::rngs::StdRng;
use rand::SeedableRng;
use vlink::core::InfluenceGraph;
use vlink::export::{edge_csv, graphml};

const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

struct Parsed {
    nodes: BTreeMap<String, BTreeMap<String, String>>,
    edges: Vec<(String, String, usize)>,
}

fn parse_graphml(text: &str) -> Parsed {
    let doc = roxmltree::Document::parse(text).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().namespace(), Some(GRAPHML_NS));
    let keys: BTreeMap<&str, &str> = root
        .children()
        .filter(|n| n.has_tag_name((GRAPHML_NS, "key")))
        .map(|k| (k.attribute("id").unwrap(), k.attribute("attr.name").unwrap()))
        .collect();
    let graph = root.children().find(|n| n.has_tag_name((GRAPHML_NS, "graph"))).unwrap();
    assert_eq!(graph.attribute("edgedefault"), Some("undirected"));
    let data = |node: roxmltree::Node| -> BTreeMap<String, String> {
        node.children()
            .filter(|c| c.has_tag_name((GRAPHML_NS, "data")))
            .map(|c| (keys[c.attribute("key").unwrap()].to_string(), c.text().unwrap_or("").to_string()))
            .collect()
    };
    let mut parsed = Parsed { nodes: BTreeMap::new(), edges: Vec::new() };
    for child in graph.children().filter(|c| c.is_element()) {
        if child.has_tag_name((GRAPHML_NS, "node")) {
            parsed.nodes.insert(child.attribute("id").unwrap().to_string(), data(child));
        } else if child.has_tag_name((GRAPHML_NS, "edge")) {
            let support = data(child)["support_count"].parse().unwrap();
            parsed.edges.push((child.attribute("source").unwrap().into(), child.attribute("target").unwrap().into(), support));
        }
    }
    parsed
}

fn assert_round_trip(graph: &InfluenceGraph) {
    let report = graph.centrality_report();
    let parsed = parse_graphml(&graphml(graph, &report).unwrap());
    assert_eq!(parsed.nodes.len(), graph.node_count());
    for row in &report.rows {
        let attrs = &parsed.nodes[&row.artist_id];
        assert_eq!(attrs["label"], row.artist_name);
        assert_eq!(attrs["degree"].parse::<usize>().unwrap(), row.degree);
        assert_eq!(attrs["closeness"].parse::<f64>().unwrap().to_bits(), row.closeness.to_bits());
        assert_eq!(attrs["betweenness"].parse::<f64>().unwrap().to_bits(), row.betweenness.to_bits());
        assert_eq!(attrs["component"].parse::<usize>().unwrap(), row.component);
    }
    let ids: Vec<&str> = graph.nodes().iter().map(|n| n.id.as_str()).collect();
    let mut expected: Vec<(String, String, usize)> =
        graph.edges().iter().map(|e| (ids[e.a].to_string(), ids[e.b].to_string(), e.support_count())).collect();
    let mut got = parsed.edges;
    expected.sort();
    got.sort();
    assert_eq!(got, expected);
}

#[test]
fn graphml_reparses_to_the_same_graph() {
    let mut rng = StdRng::seed_from_u64(21);
    for n in 1..=12 {
        assert_round_trip(&random_graph(&mut rng, n, 0.3));
    }
}

#[test]
fn graphml_escapes_awkward_identifiers() {
    let nodes = ["a&b", "<c>", "d\"e", "f'g"];
    let edges = [("a&b", "<c>"), ("<c>", "d\"e")];
    let graph = InfluenceGraph::from_edges(&nodes, &edges).unwrap();
    assert_round_trip(&graph);
}

#[test]
fn edge_csv_agrees_with_graphml() {
    let mut rng = StdRng::seed_from_u64(4);
    let graph = random_graph(&mut rng, 9, 0.4);
    let parsed = parse_graphml(&graphml(&graph, &graph.centrality_report()).unwrap());
    let mut from_xml: Vec<(String, String, usize)> =
        parsed.edges.into_iter().map(|(a, b, c)| if a <= b { (a, b, c) } else { (b, a, c) }).collect();
    from_xml.sort();
    let text = edge_csv(&graph);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let from_csv: Vec<(String, String, usize)> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(from_csv, from_xml);
}
