//! `VPCA` model files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"VPCA" | version u32 = 1 | d u32 | k u32
//! mean: d f64 | components: k·d f64 (row per component)
//! explained_variance: k f64 | explained_variance_ratio: k f64
//! ```

use std::fs;
use std::path::Path;

use vlink_core::PcaModel;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VPCA";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn encode(model: &PcaModel) -> Vec<u8> {
    let (d, k) = (model.input_dim(), model.n_components());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (d + k * d + 2 * k));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(k as u32).to_le_bytes());
    let fields = [model.mean(), model.components(), model.explained_variance(), model.explained_variance_ratio()];
    for v in fields.into_iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<PcaModel> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "truncated model header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "bad magic, expected VPCA"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported model version {version}")));
    }
    let (d, k) = (word(8) as usize, word(12) as usize);
    let count = k
        .checked_mul(d)
        .and_then(|kd| kd.checked_add(d + 2 * k))
        .ok_or_else(|| Error::format(path, "model dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(Error::format(
            path,
            format!("corrupt model: expected {} payload bytes for d={d}, k={k}, found {}", count * 8, payload.len()),
        ));
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |len: usize| values.by_ref().take(len).collect::<Vec<f64>>();
    let mean = take(d);
    let components = take(k * d);
    let variance = take(k);
    let ratio = take(k);
    PcaModel::from_parts(d, k, mean, components, variance, ratio).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_model(model: &PcaModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(model)).map_err(Error::io(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PcaModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode(&bytes, path)
}
