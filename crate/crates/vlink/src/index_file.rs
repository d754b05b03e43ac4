//! `VIDX` index files: the build parameters plus the reduced points. Rows align with the
//! manifest by position, and the tree is rebuilt deterministically on load.
//!
//! ```text
//! b"VIDX" | version u32 = 1 | strategy u32 (0 brute, 1 tree) | leaf_size u32 | n u64 | d u32
//! | reserved u32 = 0 | n·d f32
//! ```

use std::fs;
use std::path::Path;

use vlink_core::{Corpus, EmbeddingMatrix, Index, Strategy};

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VIDX";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

pub fn encode(index: &Index) -> Vec<u8> {
    let (code, leaf) = match index.strategy() {
        Strategy::Brute => (0u32, 0u32),
        Strategy::Tree { leaf_size } => (1, leaf_size as u32),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + index.len() * index.dim() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&code.to_le_bytes());
    out.extend_from_slice(&leaf.to_le_bytes());
    out.extend_from_slice(&(index.len() as u64).to_le_bytes());
    out.extend_from_slice(&(index.dim() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for row in 0..index.len() {
        for v in index.point(row) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], corpus: &Corpus, path: &Path) -> Result<Index> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::format(path, "not a VIDX index file"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(Error::format(path, format!("unsupported index version {}", word(4))));
    }
    let strategy = match (word(8), word(12)) {
        (0, _) => Strategy::Brute,
        (1, leaf_size) => Strategy::Tree { leaf_size: leaf_size as usize },
        (other, _) => return Err(Error::format(path, format!("unknown strategy code {other}"))),
    };
    let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let d = word(24) as usize;
    let payload = &bytes[HEADER_LEN..];
    if Some(payload.len()) != n.checked_mul(d).and_then(|c| c.checked_mul(4)) {
        return Err(Error::format(path, format!("payload of {} bytes does not match {n}x{d}", payload.len())));
    }
    let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let points = EmbeddingMatrix::new(n, d, values)?;
    Ok(Index::build(&points, corpus, strategy)?)
}

pub fn save_index(index: &Index, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(index)).map_err(Error::io(path))
}

pub fn load_index(path: impl AsRef<Path>, corpus: &Corpus) -> Result<Index> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode(&bytes, corpus, path)
}
