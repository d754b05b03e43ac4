//! Exact ℓ2 nearest-neighbor search with same-artist exclusion.
//!
//! Results are ordered by `(distance, painting_id)`; ids compare lexicographically. The tree
//! strategy only prunes a subtree when its bounding box is strictly farther than the current
//! k-th candidate, so it returns exactly what a brute-force scan returns.

mod kdtree;

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::{validate, Corpus, EmbeddingMatrix, ValidationIssue};
use kdtree::KdTree;

/// Default number of neighbors per query.
pub const DEFAULT_K: usize = 3;
pub const DEFAULT_LEAF_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unknown painting_id `{0}`")]
    UnknownPainting(String),
    #[error("k must be positive")]
    ZeroK,
    #[error("leaf size must be positive")]
    ZeroLeafSize,
    #[error("points and corpus are not aligned: {0}")]
    Validation(ValidationIssue),
    #[error("duplicate painting_id `{0}`")]
    DuplicatePainting(String),
    #[error("{points} points but {labels} labels")]
    LabelMismatch { points: usize, labels: usize },
}

/// ℓ2 distance, accumulated in 64-bit.
pub fn l2<T: Copy + Into<f64>>(q: &[T], p: &[T]) -> Result<f64, NnError> {
    if q.len() != p.len() {
        return Err(NnError::DimensionMismatch { left: q.len(), right: p.len() });
    }
    Ok(libm::sqrt(squared_l2(q, p)))
}

#[inline]
pub(crate) fn squared_l2<T: Copy + Into<f64>>(q: &[T], p: &[T]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in q.iter().zip(p) {
        let diff = a.into() - b.into();
        acc += diff * diff;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Brute,
    Tree {
        leaf_size: usize,
    },
}

impl Strategy {
    pub fn tree() -> Self {
        Strategy::Tree { leaf_size: DEFAULT_LEAF_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub row: usize,
    pub painting_id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query_id: String,
    pub hits: Vec<Hit>,
}

/// One row of the batch top-1 cross-artist table.
#[derive(Debug, Clone, PartialEq)]
pub struct Top1Link {
    pub query_row: usize,
    pub matched_row: usize,
    pub distance: f64,
}

/// An immutable, queryable set of points aligned with a corpus.
#[derive(Debug, Clone)]
pub struct Index {
    points: Vec<f32>,
    n: usize,
    d: usize,
    ids: Vec<String>,
    /// Position of each row's painting_id in lexicographic order.
    id_rank: Vec<u32>,
    rows_by_id: Vec<usize>,
    artist: Vec<u32>,
    artist_sizes: Vec<usize>,
    strategy: Strategy,
    tree: Option<KdTree>,
}

/// Heap entry ordered by `(distance, id rank)`; the heap's max is the current worst hit.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    rank: u32,
    row: usize,
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance.total_cmp(&other.distance).then(self.rank.cmp(&other.rank))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Bounded collection of the best `k` candidates seen so far.
pub(crate) struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    /// Distance a new point must not exceed to be admitted, if the set is full.
    pub(crate) fn bound(&self) -> Option<f64> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.peek().map(|c| c.distance)
        }
    }

    fn offer(&mut self, candidate: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(candidate);
        } else if let Some(worst) = self.heap.peek() {
            if candidate.key_cmp(worst) == Ordering::Less {
                self.heap.pop();
                self.heap.push(candidate);
            }
        }
    }

    fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

impl Index {
    /// Builds an index over `points`, which must be aligned with `corpus` and finite.
    pub fn build(points: &EmbeddingMatrix, corpus: &Corpus, strategy: Strategy) -> Result<Self, NnError> {
        let report = validate(corpus, points);
        if let Some(issue) = report.issues.into_iter().next() {
            return Err(NnError::Validation(issue));
        }
        let ids = corpus.paintings().iter().map(|p| p.painting_id.clone()).collect();
        let labels = corpus.artist_indices().iter().map(|&a| a as u32).collect();
        Self::build_with_labels(points, ids, labels, strategy)
    }

    /// Builds an index from raw painting ids and artist labels. Unlike a [`Corpus`], this
    /// accepts any number of points and artists.
    pub fn build_with_labels(
        points: &EmbeddingMatrix,
        ids: Vec<String>,
        artist_labels: Vec<u32>,
        strategy: Strategy,
    ) -> Result<Self, NnError> {
        let n = points.n();
        if ids.len() != n || artist_labels.len() != n {
            return Err(NnError::LabelMismatch { points: n, labels: ids.len().min(artist_labels.len()) });
        }
        if let Some((row, column)) = points.first_non_finite() {
            return Err(NnError::Validation(ValidationIssue::NonFinite { row, column }));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        if let Some(w) = order.windows(2).find(|w| ids[w[0]] == ids[w[1]]) {
            return Err(NnError::DuplicatePainting(ids[w[0]].clone()));
        }
        let mut id_rank = alloc::vec![0u32; n];
        for (rank, &row) in order.iter().enumerate() {
            id_rank[row] = rank as u32;
        }
        let n_artists = artist_labels.iter().map(|&a| a as usize + 1).max().unwrap_or(0);
        let mut artist_sizes = alloc::vec![0usize; n_artists];
        for &a in &artist_labels {
            artist_sizes[a as usize] += 1;
        }
        let tree = match strategy {
            Strategy::Brute => None,
            Strategy::Tree { leaf_size: 0 } => return Err(NnError::ZeroLeafSize),
            Strategy::Tree { leaf_size } => Some(KdTree::build(points.values(), n, points.d(), leaf_size)),
        };
        Ok(Self {
            points: points.values().to_vec(),
            n,
            d: points.d(),
            ids,
            id_rank,
            rows_by_id: order,
            artist: artist_labels,
            artist_sizes,
            strategy,
            tree,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn point(&self, row: usize) -> &[f32] {
        &self.points[row * self.d..(row + 1) * self.d]
    }

    pub fn painting_id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn artist_label(&self, row: usize) -> u32 {
        self.artist[row]
    }

    pub fn row_of(&self, painting_id: &str) -> Option<usize> {
        self.rows_by_id
            .binary_search_by(|&r| self.ids[r].as_str().cmp(painting_id))
            .ok()
            .map(|pos| self.rows_by_id[pos])
    }

    /// True if some painting by another artist exists.
    pub fn has_cross_artist_candidate(&self, row: usize) -> bool {
        self.artist_sizes[self.artist[row] as usize] < self.n
    }

    /// The `k` nearest eligible rows to `row`, ascending. The query row itself is never
    /// returned; with `exclude_same_artist` every row sharing its artist is filtered out
    /// before truncation.
    pub fn query_row(&self, row: usize, k: usize, exclude_same_artist: bool) -> Result<Vec<Hit>, NnError> {
        if k == 0 {
            return Err(NnError::ZeroK);
        }
        let artist = self.artist[row];
        let eligible = |r: usize| r != row && !(exclude_same_artist && self.artist[r] == artist);
        let query = self.point(row);
        let mut top = TopK::new(k);
        match &self.tree {
            None => {
                for r in (0..self.n).filter(|&r| eligible(r)) {
                    top.offer(self.candidate(query, r));
                }
            }
            Some(tree) => tree.search(query, &mut top, &mut |r| {
                if eligible(r) {
                    Some(self.candidate(query, r))
                } else {
                    None
                }
            }),
        }
        Ok(top
            .into_sorted()
            .into_iter()
            .map(|c| Hit { row: c.row, painting_id: self.ids[c.row].clone(), distance: c.distance })
            .collect())
    }

    pub fn query(&self, painting_id: &str, k: usize, exclude_same_artist: bool) -> Result<NeighborList, NnError> {
        let row = self.row_of(painting_id).ok_or_else(|| NnError::UnknownPainting(String::from(painting_id)))?;
        let hits = self.query_row(row, k, exclude_same_artist)?;
        Ok(NeighborList { query_id: String::from(painting_id), hits })
    }

    /// For every painting whose artist is not the only artist present, its nearest painting
    /// by another artist. Entries follow row order.
    pub fn batch_top1_cross_artist(&self) -> Vec<Top1Link> {
        (0..self.n)
            .filter(|&row| self.has_cross_artist_candidate(row))
            .filter_map(|row| {
                let hit = self.query_row(row, 1, true).ok()?.into_iter().next()?;
                Some(Top1Link { query_row: row, matched_row: hit.row, distance: hit.distance })
            })
            .collect()
    }

    fn candidate(&self, query: &[f32], row: usize) -> Candidate {
        Candidate { distance: libm::sqrt(squared_l2(query, self.point(row))), rank: self.id_rank[row], row }
    }
}
