//! Graph exports for external tools (GraphML, edge CSV, Graphviz DOT) and the tabular
//! centrality and ranked-link reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use vlink_core::linkgraph::RankedLinkList;
use vlink_core::{CentralityReport, InfluenceGraph};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    GraphMl,
    EdgeCsv,
    Dot,
}

impl GraphFormat {
    pub const ALL: [GraphFormat; 3] = [GraphFormat::GraphMl, GraphFormat::EdgeCsv, GraphFormat::Dot];

    pub fn file_name(self) -> &'static str {
        match self {
            GraphFormat::GraphMl => "graph.graphml",
            GraphFormat::EdgeCsv => "edges.csv",
            GraphFormat::Dot => "graph.dot",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graphml" => Ok(Self::GraphMl),
            "edge-csv" => Ok(Self::EdgeCsv),
            "dot" => Ok(Self::Dot),
            other => Err(Error::Config(format!("unknown graph format `{other}` (expected graphml, edge-csv or dot)"))),
        }
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn check_report(graph: &InfluenceGraph, report: &CentralityReport) -> Result<()> {
    if report.rows.len() != graph.node_count() {
        return Err(Error::Config(format!(
            "centrality report has {} rows for {} nodes",
            report.rows.len(),
            graph.node_count()
        )));
    }
    Ok(())
}

pub fn graphml(graph: &InfluenceGraph, report: &CentralityReport) -> Result<String> {
    check_report(graph, report)?;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, ty) in [("label", "string"), ("degree", "int"), ("closeness", "double"), ("betweenness", "double"), ("component", "int")] {
        let _ = writeln!(s, "  <key id=\"{id}\" for=\"node\" attr.name=\"{id}\" attr.type=\"{ty}\"/>");
    }
    s.push_str("  <key id=\"support_count\" for=\"edge\" attr.name=\"support_count\" attr.type=\"int\"/>\n");
    s.push_str("  <graph id=\"influence\" edgedefault=\"undirected\">\n");
    for row in &report.rows {
        let _ = writeln!(s, "    <node id=\"{}\">", xml_escape(&row.artist_id));
        let _ = writeln!(s, "      <data key=\"label\">{}</data>", xml_escape(&row.artist_name));
        let _ = writeln!(s, "      <data key=\"degree\">{}</data>", row.degree);
        let _ = writeln!(s, "      <data key=\"closeness\">{}</data>", row.closeness);
        let _ = writeln!(s, "      <data key=\"betweenness\">{}</data>", row.betweenness);
        let _ = writeln!(s, "      <data key=\"component\">{}</data>", row.component);
        s.push_str("    </node>\n");
    }
    let nodes = graph.nodes();
    for (i, e) in graph.edges().iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\">",
            xml_escape(&nodes[e.a].id),
            xml_escape(&nodes[e.b].id)
        );
        let _ = writeln!(s, "      <data key=\"support_count\">{}</data>", e.support_count());
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    Ok(s)
}

fn csv_text<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing to memory cannot fail
    w.write_record(header).expect("in-memory csv");
    fill(&mut w).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv of utf-8 fields")
}

/// `source,target,support_count`, sorted by source then target id.
pub fn edge_csv(graph: &InfluenceGraph) -> String {
    let nodes = graph.nodes();
    let mut rows: Vec<(&str, &str, usize)> = graph
        .edges()
        .iter()
        .map(|e| {
            let (x, y) = (nodes[e.a].id.as_str(), nodes[e.b].id.as_str());
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            (x, y, e.support_count())
        })
        .collect();
    rows.sort();
    csv_text(&["source", "target", "support_count"], |w| {
        for (x, y, c) in rows {
            w.write_record([x, y, &c.to_string()])?;
        }
        Ok(())
    })
}

pub fn dot(graph: &InfluenceGraph, report: &CentralityReport) -> Result<String> {
    check_report(graph, report)?;
    let mut s = String::from("graph influence {\n");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{}\", degree={}, closeness={}, betweenness={}, component={}];",
            dot_escape(&row.artist_id),
            dot_escape(&row.artist_name),
            row.degree,
            row.closeness,
            row.betweenness,
            row.component
        );
    }
    let nodes = graph.nodes();
    for e in graph.edges() {
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [support_count={}];",
            dot_escape(&nodes[e.a].id),
            dot_escape(&nodes[e.b].id),
            e.support_count()
        );
    }
    s.push_str("}\n");
    Ok(s)
}

pub fn export_graph(graph: &InfluenceGraph, report: &CentralityReport, format: GraphFormat, path: impl AsRef<Path>) -> Result<()> {
    let text = match format {
        GraphFormat::GraphMl => graphml(graph, report)?,
        GraphFormat::EdgeCsv => edge_csv(graph),
        GraphFormat::Dot => dot(graph, report)?,
    };
    let path = path.as_ref();
    fs::write(path, text).map_err(Error::io(path))
}

/// `artist,degree,closeness,betweenness`, most connected artists first.
pub fn centrality_csv(report: &CentralityReport) -> String {
    csv_text(&["artist", "degree", "closeness", "betweenness"], |w| {
        for row in report.ranked_by_degree() {
            w.write_record([
                row.artist_name.as_str(),
                &row.degree.to_string(),
                &row.closeness.to_string(),
                &row.betweenness.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `artist_id,linked_artist_id,count,mean_distance`, each artist's list in rank order.
pub fn ranked_links_csv(ranked: &RankedLinkList) -> String {
    csv_text(&["artist_id", "linked_artist_id", "count", "mean_distance"], |w| {
        for (i, artist) in ranked.artists().iter().enumerate() {
            for link in ranked.list(i) {
                w.write_record([
                    artist.id.as_str(),
                    ranked.artists()[link.artist].id.as_str(),
                    &link.count.to_string(),
                    &link.mean_distance.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}
