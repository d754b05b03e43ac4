//! Artist influence graph built from top-1 cross-artist visual links.
//!
//! Every artist is joined to the artist its paintings most often match. Selections are
//! made independently per artist and reciprocal selections merge into one undirected edge.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::Corpus;
use crate::nnindex::Top1Link;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkCount {
    /// Index into the artist list the ranking was built over.
    pub artist: usize,
    pub count: usize,
    pub mean_distance: f64,
}

/// For every artist, the other artists its paintings were matched to, most frequent first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLinkList {
    artists: Vec<NodeInfo>,
    lists: Vec<Vec<LinkCount>>,
}

impl RankedLinkList {
    pub fn artists(&self) -> &[NodeInfo] {
        &self.artists
    }

    pub fn list(&self, artist: usize) -> &[LinkCount] {
        &self.lists[artist]
    }

    pub fn list_for(&self, artist_id: &str) -> Option<&[LinkCount]> {
        self.artists.iter().position(|a| a.id == artist_id).map(|i| self.list(i))
    }
}

/// Counts, per artist, which other artists its paintings' top-1 links land on.
///
/// Entries are sorted by count descending, then by mean link distance ascending, then by
/// artist id.
pub fn rank_linked_artists(top1: &[Top1Link], corpus: &Corpus) -> RankedLinkList {
    let n_artists = corpus.artists().len();
    let mut tallies: Vec<BTreeMap<usize, (usize, f64)>> = vec![BTreeMap::new(); n_artists];
    for link in top1 {
        let from = corpus.artist_index(link.query_row);
        let to = corpus.artist_index(link.matched_row);
        if from == to {
            continue;
        }
        let entry = tallies[from].entry(to).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += link.distance;
    }
    let lists = tallies
        .into_iter()
        .map(|tally| {
            let mut list: Vec<LinkCount> = tally
                .into_iter()
                .map(|(artist, (count, sum))| LinkCount { artist, count, mean_distance: sum / count as f64 })
                .collect();
            list.sort_by(|a, b| {
                b.count
                    .cmp(&a.count)
                    .then(a.mean_distance.total_cmp(&b.mean_distance))
                    .then(a.artist.cmp(&b.artist))
            });
            list
        })
        .collect();
    let artists = corpus
        .artists()
        .iter()
        .map(|a| NodeInfo { id: a.artist_id.clone(), name: a.artist_name.clone() })
        .collect();
    RankedLinkList { artists, lists }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeInfo {
    pub id: String,
    pub name: String,
}

/// Undirected edge `{a, b}` with `a < b` (node indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Top-1 links from `a`'s paintings to `b`'s.
    pub count_ab: usize,
    pub count_ba: usize,
    pub selected_by_a: bool,
    pub selected_by_b: bool,
}

impl Edge {
    /// Number of top-1 links behind the selections that produced this edge.
    pub fn support_count(&self) -> usize {
        let forward = if self.selected_by_a { self.count_ab } else { 0 };
        let backward = if self.selected_by_b { self.count_ba } else { 0 };
        forward + backward
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    nodes: Vec<NodeInfo>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    unlinked: Vec<usize>,
}

/// Joins every artist to the first entry of its ranked list.
///
/// Artists with an empty list stay isolated and are reported by
/// [`InfluenceGraph::unlinked`].
pub fn build_graph(ranked: &RankedLinkList) -> InfluenceGraph {
    let n = ranked.artists.len();
    let mut edges: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
    let mut unlinked = Vec::new();
    let count = |from: usize, to: usize| {
        ranked.lists[from].iter().find(|l| l.artist == to).map_or(0, |l| l.count)
    };
    for v in 0..n {
        let Some(best) = ranked.lists[v].first() else {
            log::warn!("artist `{}` has no cross-artist links; kept as an isolated node", ranked.artists[v].id);
            unlinked.push(v);
            continue;
        };
        let u = best.artist;
        let (a, b) = if v < u { (v, u) } else { (u, v) };
        let edge = edges.entry((a, b)).or_insert_with(|| Edge {
            a,
            b,
            count_ab: count(a, b),
            count_ba: count(b, a),
            selected_by_a: false,
            selected_by_b: false,
        });
        if v == a {
            edge.selected_by_a = true;
        } else {
            edge.selected_by_b = true;
        }
    }
    InfluenceGraph::assemble(ranked.artists.clone(), edges.into_values().collect(), unlinked)
}

impl InfluenceGraph {
    /// Builds a graph from explicit node ids and undirected edges. Nodes are sorted by id and
    /// duplicate edges collapse; every edge gets unit support in both directions.
    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut infos: Vec<NodeInfo> = nodes
            .iter()
            .map(|s| NodeInfo { id: String::from(s.as_ref()), name: String::from(s.as_ref()) })
            .collect();
        infos.sort();
        if let Some(w) = infos.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(GraphError::DuplicateNode(w[0].id.clone()));
        }
        let position = |id: &str| {
            infos
                .binary_search_by(|n| n.id.as_str().cmp(id))
                .map_err(|_| GraphError::UnknownNode(String::from(id)))
        };
        let mut merged = BTreeMap::new();
        for (x, y) in edges {
            let (i, j) = (position(x.as_ref())?, position(y.as_ref())?);
            if i == j {
                return Err(GraphError::SelfLoop(String::from(x.as_ref())));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            merged.insert((a, b), Edge { a, b, count_ab: 1, count_ba: 1, selected_by_a: true, selected_by_b: true });
        }
        Ok(Self::assemble(infos, merged.into_values().collect(), Vec::new()))
    }

    fn assemble(nodes: Vec<NodeInfo>, edges: Vec<Edge>, unlinked: Vec<usize>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { nodes, edges, adjacency, unlinked }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    /// Edges sorted by `(a, b)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Nodes whose ranked list was empty when the graph was built.
    pub fn unlinked(&self) -> &[usize] {
        &self.unlinked
    }

    pub fn node_index(&self, id: &str) -> Result<usize, GraphError> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| GraphError::UnknownNode(String::from(id)))
    }

    pub fn degree(&self, id: &str) -> Result<usize, GraphError> {
        Ok(self.adjacency[self.node_index(id)?].len())
    }

    pub fn closeness(&self, id: &str) -> Result<f64, GraphError> {
        Ok(self.closeness_of(self.node_index(id)?))
    }

    /// Closeness restricted to the node's component `r` and scaled by `(r − 1)/(n − 1)`:
    /// `((r − 1) / Σ d(v, u)) · ((r − 1) / (n − 1))`. On a connected graph this is the plain
    /// `(n − 1) / Σ d(v, u)`. Isolated nodes score 0.
    pub fn closeness_of(&self, node: usize) -> f64 {
        let n = self.nodes.len();
        let dist = self.bfs_distances(node);
        let (reached, total) = dist
            .iter()
            .filter_map(|d| *d)
            .fold((0usize, 0usize), |(r, t), d| (r + 1, t + d));
        let others = reached - 1;
        if others == 0 || n < 2 {
            return 0.0;
        }
        let others = others as f64;
        (others / total as f64) * (others / (n - 1) as f64)
    }

    pub fn closeness_all(&self) -> Vec<f64> {
        (0..self.nodes.len()).map(|v| self.closeness_of(v)).collect()
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Normalized betweenness: for each node, the sum over unordered pairs `{s, t}` not
    /// containing it of the fraction of shortest `s–t` paths through it, divided by
    /// `(n − 1)(n − 2)/2`. Graphs with fewer than 3 nodes score 0 everywhere.
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut centrality = vec![0.0; n];
        if n < 3 {
            return centrality;
        }
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist: Vec<i64> = vec![-1; n];
        let mut delta = vec![0.0f64; n];
        let mut queue = VecDeque::with_capacity(n);
        for s in 0..n {
            stack.clear();
            preds.iter_mut().for_each(Vec::clear);
            sigma.iter_mut().for_each(|x| *x = 0.0);
            dist.iter_mut().for_each(|x| *x = -1);
            delta.iter_mut().for_each(|x| *x = 0.0);
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &w in &self.adjacency[v] {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    centrality[w] += delta[w];
                }
            }
        }
        // each unordered pair was counted once from each endpoint
        let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
        centrality.iter_mut().for_each(|c| *c *= scale);
        centrality
    }

    /// Maximal connected node sets, largest first, then by smallest member id.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut members: Vec<usize> = self
                .bfs_distances(start)
                .iter()
                .enumerate()
                .filter_map(|(v, d)| d.map(|_| v))
                .collect();
            for &v in &members {
                seen[v] = true;
            }
            members.sort_by(|&x, &y| self.nodes[x].id.cmp(&self.nodes[y].id));
            components.push(members);
        }
        components.sort_by(|x, y| match y.len().cmp(&x.len()) {
            Ordering::Equal => self.nodes[x[0]].id.cmp(&self.nodes[y[0]].id),
            other => other,
        });
        components
    }

    pub fn centrality_report(&self) -> CentralityReport {
        let betweenness = self.betweenness();
        let mut component_of = vec![0usize; self.nodes.len()];
        for (c, members) in self.connected_components().iter().enumerate() {
            for &v in members {
                component_of[v] = c;
            }
        }
        let rows = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, node)| CentralityRow {
                node: v,
                artist_id: node.id.clone(),
                artist_name: node.name.clone(),
                degree: self.adjacency[v].len(),
                closeness: self.closeness_of(v),
                betweenness: betweenness[v],
                component: component_of[v],
            })
            .collect();
        CentralityReport { rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityRow {
    pub node: usize,
    pub artist_id: String,
    pub artist_name: String,
    pub degree: usize,
    pub closeness: f64,
    pub betweenness: f64,
    pub component: usize,
}

/// One row per node, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityReport {
    pub rows: Vec<CentralityRow>,
}

impl CentralityReport {
    /// Rows sorted by degree descending, then betweenness descending, then artist id.
    pub fn ranked_by_degree(&self) -> Vec<&CentralityRow> {
        let mut rows: Vec<&CentralityRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            b.degree
                .cmp(&a.degree)
                .then(b.betweenness.total_cmp(&a.betweenness))
                .then(a.artist_id.cmp(&b.artist_id))
        });
        rows
    }
}
