//! JSON Lines manifest: one painting per line with keys `painting_id`, `artist_id`,
//! `artist_name` and `source_path`. Unknown keys are ignored; line order is row order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vlink_core::{Corpus, CorpusError, PaintingRecord};

use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLine {
    painting_id: String,
    artist_id: String,
    artist_name: String,
    source_path: String,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::io(path))?;
    parse_manifest(BufReader::new(file), path)
}

/// Parses manifest lines from `reader`; `path` is only used in error messages.
pub fn parse_manifest(reader: impl BufRead, path: &Path) -> Result<Corpus> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        let parsed: ManifestLine = serde_json::from_str(&line).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(PaintingRecord {
            painting_id: parsed.painting_id,
            artist_id: parsed.artist_id,
            artist_name: parsed.artist_name,
            source_path: parsed.source_path,
            row_index: i,
        });
    }
    Corpus::from_records(records).map_err(|e| match e {
        CorpusError::DuplicatePainting { painting_id, row } => Error::Manifest {
            path: path.to_path_buf(),
            line: row + 1,
            message: format!("duplicate painting_id `{painting_id}`"),
        },
        CorpusError::EmptyField { field, row } => Error::Manifest {
            path: path.to_path_buf(),
            line: row + 1,
            message: format!("empty {field}"),
        },
        other => Error::Corpus(other),
    })
}

/// Writes `corpus` back out in manifest form, one line per painting in row order.
pub fn write_manifest(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    for p in corpus.paintings() {
        let line = ManifestLine {
            painting_id: p.painting_id.clone(),
            artist_id: p.artist_id.clone(),
            artist_name: p.artist_name.clone(),
            source_path: p.source_path.clone(),
        };
        serde_json::to_writer(&mut out, &line).map_err(|e| Error::io(path)(e.into()))?;
        out.write_all(b"\n").map_err(Error::io(path))?;
    }
    out.flush().map_err(Error::io(path))
}
