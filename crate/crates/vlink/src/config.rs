//! Pipeline configuration: a TOML file of key/value pairs, overridden by command-line flags.
//!
//! ```toml
//! manifest = "data/manifest.jsonl"
//! embeddings = "data/embeddings.vlnk"
//! pca_model = "out/pca.vpca"
//! pca_k = 50
//! nn_k = 3
//! strategy = "brute"      # or "tree"
//! leaf_size = 32
//! seed = 42
//! output_dir = "out"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vlink_core::evalkit::DEFAULT_POOL;
use vlink_core::nnindex::DEFAULT_LEAF_SIZE;
use vlink_core::pca::DEFAULT_COMPONENTS;
use vlink_core::Strategy;

use crate::{Error, Result};

/// Values as read from a config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub manifest: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub reduced_embeddings: Option<PathBuf>,
    pub pca_model: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub pca_k: Option<usize>,
    pub nn_k: Option<usize>,
    pub strategy: Option<String>,
    pub leaf_size: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Fills every key that `overrides` sets.
    pub fn merge(mut self, overrides: ConfigFile) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if overrides.$field.is_some() {
                    self.$field = overrides.$field;
                }
            )*};
        }
        take!(manifest, embeddings, reduced_embeddings, pca_model, index, pca_k, nn_k, strategy, leaf_size, seed, output_dir);
        self
    }
}

/// Resolved configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub manifest: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub reduced_embeddings: PathBuf,
    pub pca_model: PathBuf,
    pub index: PathBuf,
    pub pca_k: usize,
    pub nn_k: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn resolve(file: ConfigFile) -> Result<Self> {
        let output_dir = file.output_dir.unwrap_or_else(|| PathBuf::from("out"));
        let non_empty = |name: &str, p: Option<PathBuf>| -> Result<Option<PathBuf>> {
            match p {
                Some(p) if p.as_os_str().is_empty() => Err(Error::Config(format!("`{name}` must not be empty"))),
                other => Ok(other),
            }
        };
        if output_dir.as_os_str().is_empty() {
            return Err(Error::Config("`output_dir` must not be empty".into()));
        }
        let pca_k = file.pca_k.unwrap_or(DEFAULT_COMPONENTS);
        let nn_k = file.nn_k.unwrap_or(DEFAULT_POOL);
        if pca_k == 0 || nn_k == 0 {
            return Err(Error::Config("`pca_k` and `nn_k` must be positive".into()));
        }
        let leaf_size = file.leaf_size.unwrap_or(DEFAULT_LEAF_SIZE);
        let strategy = match file.strategy.as_deref().unwrap_or("brute") {
            "brute" => Strategy::Brute,
            "tree" if leaf_size > 0 => Strategy::Tree { leaf_size },
            "tree" => return Err(Error::Config("`leaf_size` must be positive".into())),
            other => return Err(Error::Config(format!("unknown strategy `{other}` (expected brute or tree)"))),
        };
        Ok(Self {
            manifest: non_empty("manifest", file.manifest)?,
            embeddings: non_empty("embeddings", file.embeddings)?,
            reduced_embeddings: non_empty("reduced_embeddings", file.reduced_embeddings)?
                .unwrap_or_else(|| output_dir.join("reduced.vlnk")),
            pca_model: non_empty("pca_model", file.pca_model)?.unwrap_or_else(|| output_dir.join("pca.vpca")),
            index: non_empty("index", file.index)?.unwrap_or_else(|| output_dir.join("index.vidx")),
            pca_k,
            nn_k,
            strategy,
            seed: file.seed.unwrap_or(0),
            output_dir,
        })
    }

    pub fn manifest(&self) -> Result<&Path> {
        self.manifest.as_deref().ok_or_else(|| Error::Config("no manifest configured (set `manifest` or pass --manifest)".into()))
    }

    pub fn embeddings(&self) -> Result<&Path> {
        self.embeddings
            .as_deref()
            .ok_or_else(|| Error::Config("no embeddings configured (set `embeddings` or pass --embeddings)".into()))
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}
