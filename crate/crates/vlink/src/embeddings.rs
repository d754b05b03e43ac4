//! `VLNK` embedding files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"VLNK" | version u32 = 1 | n u64 | d u32 | reserved u32 = 0 | n·d f32, row-major
//! ```

use std::fs;
use std::path::Path;

use vlink_core::EmbeddingMatrix;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VLNK";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

pub fn encode(matrix: &EmbeddingMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + matrix.values().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.n() as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.d() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in matrix.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a `VLNK` buffer; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<EmbeddingMatrix> {
    let matrix = decode_unchecked(bytes, path)?;
    if let Some((row, column)) = matrix.first_non_finite() {
        return Err(Error::format(path, format!("non-finite value at row {row}, column {column}")));
    }
    Ok(matrix)
}

/// Like [`decode`] but keeps non-finite values, so that validation can report them.
pub fn decode_unchecked(bytes: &[u8], path: &Path) -> Result<EmbeddingMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "bad magic, expected VLNK"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let reserved = u32::from_le_bytes(bytes[20..24].try_into().unwrap());
    if reserved != 0 {
        return Err(Error::format(path, "reserved header field is not zero"));
    }
    let expected = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(d as usize))
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::format(path, "header dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated payload: header says {n}x{d} ({expected} bytes), found {} bytes", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(path, format!("{} trailing bytes after payload", payload.len() - expected)));
    }
    let values: Vec<f32> = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(EmbeddingMatrix::new(n as usize, d as usize, values)?)
}

/// Reads an embedding file, optionally checking its shape.
pub fn read_embeddings(path: impl AsRef<Path>, expected_n: Option<usize>, expected_d: Option<usize>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    let matrix = decode(&bytes, path)?;
    if let Some(n) = expected_n.filter(|&n| n != matrix.n()) {
        return Err(Error::format(path, format!("expected {n} rows, file has {}", matrix.n())));
    }
    if let Some(d) = expected_d.filter(|&d| d != matrix.d()) {
        return Err(Error::format(path, format!("expected {d} columns, file has {}", matrix.d())));
    }
    Ok(matrix)
}

pub fn read_embeddings_unchecked(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_unchecked(&bytes, path)
}

pub fn write_embeddings(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if matrix.n() == 0 || matrix.d() == 0 {
        return Err(Error::format(path, "refusing to write an empty embedding matrix"));
    }
    if u32::try_from(matrix.d()).is_err() {
        return Err(Error::format(path, "column count does not fit in u32"));
    }
    if let Some((row, column)) = matrix.first_non_finite() {
        return Err(Error::format(path, format!("non-finite value at row {row}, column {column}")));
    }
    fs::write(path, encode(matrix)).map_err(Error::io(path))
}
