//! Evaluation exchange files.
//!
//! - sample: `pair_index,query_id,query_path,hit_id,hit_path`
//! - judgments: `pair_index,verdict`, verdict `1` (meaningful) or `0`; one file per expert,
//!   the file stem naming the expert.

use std::path::Path;

use serde::Deserialize;
use vlink_core::{Corpus, JudgmentSet, PairSample, Verdict};

use crate::{Error, Result};

pub fn write_sample(sample: &PairSample, corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["pair_index", "query_id", "query_path", "hit_id", "hit_path"]).map_err(csv_err)?;
    for (i, pair) in sample.pairs.iter().enumerate() {
        let paintings = corpus.paintings();
        w.write_record([
            i.to_string().as_str(),
            &pair.query_id,
            &paintings[pair.query_row].source_path,
            &pair.hit_id,
            &paintings[pair.hit_row].source_path,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(Error::io(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SampleRow {
    pub pair_index: usize,
    pub query_id: String,
    pub query_path: String,
    pub hit_id: String,
    pub hit_path: String,
}

pub fn read_sample(path: impl AsRef<Path>) -> Result<Vec<SampleRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<Vec<SampleRow>, _>>().map_err(csv_err)
}

#[derive(Debug, Deserialize)]
struct JudgmentRow {
    pair_index: usize,
    verdict: String,
}

/// Reads one expert's verdicts. With `pair_count` absent, the file's own row count is used.
pub fn read_judgments(path: impl AsRef<Path>, pair_count: Option<usize>) -> Result<JudgmentSet> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pair_index", "verdict"] {
        return Err(Error::format(path, "judgment file header must be `pair_index,verdict`"));
    }
    let mut entries = Vec::new();
    for row in r.deserialize::<JudgmentRow>() {
        let row = row.map_err(csv_err)?;
        let verdict = match row.verdict.as_str() {
            "1" => Verdict::Meaningful,
            "0" => Verdict::NotMeaningful,
            other => {
                return Err(Error::format(path, format!("pair {}: verdict must be 1 or 0, got `{other}`", row.pair_index)))
            }
        };
        entries.push((row.pair_index, verdict));
    }
    let expert = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let count = pair_count.unwrap_or(entries.len());
    Ok(JudgmentSet::from_entries(expert, entries, count)?)
}
