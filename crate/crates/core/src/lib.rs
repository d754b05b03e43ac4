//! Core algorithms for visual-link discovery over painting collections.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! - [`corpus`]: the painting manifest model and the embedding matrix it is aligned with.
//! - [`pca`]: principal component analysis fitted through the smaller Gram side of the
//!   centered data, with a deterministic sign convention.
//! - [`nnindex`]: exact ℓ2 nearest-neighbor search (brute force or a pruned k-d tree) with
//!   same-artist exclusion.
//! - [`linkgraph`]: the undirected artist influence graph and its degree, closeness and
//!   betweenness centralities.
//! - [`evalkit`]: seeded pair sampling, majority aggregation of expert verdicts and precision.
//!
//! File formats, exports and the command line live in the `vlink` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod evalkit;
mod linalg;
pub mod linkgraph;
pub mod nnindex;
pub mod pca;

pub use corpus::{Artist, Corpus, CorpusError, EmbeddingMatrix, PaintingRecord, ValidationIssue, ValidationReport};
pub use evalkit::{EvalError, JudgmentSet, PairSample, SampledPair, Verdict};
pub use linkgraph::{CentralityReport, CentralityRow, Edge, GraphError, InfluenceGraph, LinkCount, NodeInfo, RankedLinkList};
pub use nnindex::{Hit, Index, NeighborList, NnError, Strategy, Top1Link};
pub use pca::{PcaError, PcaModel};
