//! IO, file formats and the `vlink` command line on top of [`vlink_core`].
//!
//! | file | module |
//! |------|--------|
//! | manifest (JSON Lines) | [`manifest`] |
//! | embeddings (`VLNK`) | [`embeddings`] |
//! | PCA model (`VPCA`) | [`model_file`] |
//! | index (`VIDX`) | [`index_file`] |
//! | query results (JSON Lines) | [`results`] |
//! | graph exports, centrality CSV | [`export`] |
//! | evaluation sample / judgments CSV | [`evalio`] |

pub mod cli;
pub mod config;
pub mod embeddings;
mod error;
pub mod evalio;
pub mod export;
pub mod index_file;
pub mod manifest;
pub mod model_file;
pub mod results;

pub use error::Error;
pub use vlink_core as core;

pub type Result<T, E = Error> = std::result::Result<T, E>;
