//! Fixture corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use vlink::core::{Corpus, EmbeddingMatrix, InfluenceGraph};

pub struct Fixture {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub embeddings: PathBuf,
}

/// One Gaussian blob per artist.
pub struct BlobSpec {
    pub artists: Vec<(String, String, Vec<f32>)>,
    pub per_artist: usize,
    pub sigma: f32,
    pub seed: u64,
}

impl BlobSpec {
    pub fn dim(&self) -> usize {
        self.artists[0].2.len()
    }
}

/// Six artists on three well separated pairs of nearby blobs.
pub fn six_blobs_in_three_pairs(dim: usize, per_artist: usize, seed: u64) -> BlobSpec {
    let names = ["Anna Alba", "Bruno Bosch", "Clara Cruz", "Dario Dorn", "Elsa Eck", "Fritz Falk"];
    let artists = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let pair = i / 2;
            let mut center = vec![0.0f32; dim];
            // pairs 40 apart along separate axes, partners 4 apart within a pair
            center[pair] = 40.0;
            center[3 + pair] = if i % 2 == 0 { 0.0 } else { 4.0 };
            (name.split(' ').next().unwrap().to_lowercase(), name.to_string(), center)
        })
        .collect();
    BlobSpec { artists, per_artist, sigma: 0.5, seed }
}

pub fn two_artists(dim: usize, per_artist: usize, seed: u64) -> BlobSpec {
    let artists = vec![
        ("anna".to_string(), "Anna Alba".to_string(), vec![0.0; dim]),
        ("bruno".to_string(), "Bruno Bosch".to_string(), vec![3.0; dim]),
    ];
    BlobSpec { artists, per_artist, sigma: 1.0, seed }
}

/// Writes `manifest.jsonl` and `embeddings.vlnk` into `dir`. Features are shifted to be
/// non-negative, like rectified CNN activations.
pub fn write_fixture(dir: &Path, blobs: &BlobSpec) -> Fixture {
    fs::create_dir_all(dir).unwrap();
    let mut rng = StdRng::seed_from_u64(blobs.seed);
    let noise = Normal::new(0.0f32, blobs.sigma).unwrap();
    let mut entries = Vec::new();
    let mut values = Vec::new();
    for (artist_id, name, center) in &blobs.artists {
        for i in 0..blobs.per_artist {
            entries.push((format!("{artist_id}-{i:02}"), artist_id.clone(), name.clone(), format!("{name}/{i:02}.jpg")));
            values.extend(center.iter().map(|c| (c + noise.sample(&mut rng) + 10.0).max(0.0)));
        }
    }
    let corpus = Corpus::from_entries(entries).unwrap();
    let matrix = EmbeddingMatrix::new(corpus.len(), blobs.dim(), values).unwrap();
    let manifest = dir.join("manifest.jsonl");
    let embeddings = dir.join("embeddings.vlnk");
    vlink::manifest::write_manifest(&corpus, &manifest).unwrap();
    vlink::embeddings::write_embeddings(&matrix, &embeddings).unwrap();
    Fixture { dir: dir.to_path_buf(), manifest, embeddings }
}

impl Fixture {
    pub fn out(&self) -> PathBuf {
        self.dir.join("out")
    }

    /// Base flags pointing at this fixture.
    pub fn args(&self, sub: &[&str]) -> Vec<String> {
        let mut args = vec!["vlink".to_string()];
        args.extend(sub.iter().map(|s| s.to_string()));
        args.extend([
            "--manifest".to_string(),
            self.manifest.display().to_string(),
            "--embeddings".to_string(),
            self.embeddings.display().to_string(),
            "--output-dir".to_string(),
            self.out().display().to_string(),
        ]);
        args
    }

    pub fn run(&self, sub: &[&str]) -> i32 {
        let out = self.run_bin(sub);
        if !out.status.success() {
            eprintln!("{}", String::from_utf8_lossy(&out.stderr));
        }
        out.status.code().unwrap_or(-1)
    }

    pub fn run_bin(&self, sub: &[&str]) -> Output {
        run_bin(&self.args(sub)[1..])
    }

    pub fn pipeline(&self, extra: &[&str]) {
        for sub in [&["validate"][..], &["fit-pca"], &["transform"], &["build-index"], &["links"], &["graph"]] {
            let mut args: Vec<&str> = sub.to_vec();
            args.extend_from_slice(extra);
            assert_eq!(self.run(&args), 0, "vlink {args:?} failed");
        }
    }
}

pub fn run_bin<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlink")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

/// Eigenpairs of the sample covariance via nalgebra, sorted by eigenvalue descending.
pub fn covariance_oracle(m: &EmbeddingMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (m.n(), m.d());
    let x = DMatrix::from_fn(n, d, |r, c| f64::from(m.row(r)[c]));
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    (
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    )
}

/// Every eligible row scored, fully sorted by (distance, id), truncated to `k`.
pub fn exhaustive_scan(points: &EmbeddingMatrix, ids: &[String], labels: &[u32], query: usize, k: usize, exclude: bool) -> Vec<(String, f64)> {
    let q = points.row(query);
    let mut all: Vec<(String, f64)> = (0..points.n())
        .filter(|&r| r != query && !(exclude && labels[r] == labels[query]))
        .map(|r| {
            let s: f64 = q.iter().zip(points.row(r)).map(|(a, b)| (f64::from(*a) - f64::from(*b)).powi(2)).sum();
            (ids[r].clone(), s.sqrt())
        })
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn random_graph(rng: &mut StdRng, n: usize, p: f64) -> InfluenceGraph {
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((nodes[a].clone(), nodes[b].clone()));
            }
        }
    }
    InfluenceGraph::from_edges(&nodes, &edges).unwrap()
}

fn adjacency(g: &InfluenceGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for e in g.edges() {
        adj[e.a][e.b] = true;
        adj[e.b][e.a] = true;
    }
    adj
}

/// Betweenness by enumerating every simple path between every unordered pair.
pub fn brute_betweenness(g: &InfluenceGraph) -> Vec<f64> {
    fn walk(adj: &[Vec<bool>], t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == t {
            out.push(path.clone());
            return;
        }
        for next in 0..adj.len() {
            if adj[last][next] && !path.contains(&next) {
                path.push(next);
                walk(adj, t, path, out);
                path.pop();
            }
        }
    }
    let n = g.node_count();
    let adj = adjacency(g);
    let mut score = vec![0.0; n];
    if n < 3 {
        return score;
    }
    for s in 0..n {
        for t in s + 1..n {
            let mut paths = Vec::new();
            walk(&adj, t, &mut vec![s], &mut paths);
            let Some(shortest) = paths.iter().map(Vec::len).min() else { continue };
            let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for v in (0..n).filter(|&v| v != s && v != t) {
                score[v] += geodesics.iter().filter(|p| p.contains(&v)).count() as f64 / geodesics.len() as f64;
            }
        }
    }
    let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
    score.iter().map(|s| s / pairs).collect()
}

/// Hop distances from `source` by breadth-first search over the adjacency matrix.
pub fn bfs_oracle(g: &InfluenceGraph, source: usize) -> Vec<Option<usize>> {
    let adj = adjacency(g);
    let mut dist = vec![None; g.node_count()];
    dist[source] = Some(0);
    let mut frontier = vec![source];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &v in &frontier {
            for w in 0..adj.len() {
                if adj[v][w] && dist[w].is_none() {
                    dist[w] = Some(depth);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Writes five expert files over `pairs` pairs whose majority marks the first `meaningful`
/// pairs meaningful. No single expert agrees with the majority everywhere.
pub fn write_panel(dir: &Path, pairs: usize, meaningful: usize) -> Vec<PathBuf> {
    (0..5)
        .map(|expert| {
            let mut text = String::from("pair_index,verdict\n");
            for pair in 0..pairs {
                // the majority side gets three votes, rotating which experts dissent
                let dissent = [(pair % 5), ((pair + 2) % 5)];
                let majority_yes = pair < meaningful;
                let yes = if dissent.contains(&expert) { !majority_yes } else { majority_yes };
                text.push_str(&format!("{pair},{}\n", u8::from(yes)));
            }
            let path = dir.join(format!("expert_{expert}.csv"));
            fs::write(&path, text).unwrap();
            path
        })
        .collect()
}
