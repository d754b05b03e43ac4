//! Painting manifest model and the embedding matrix aligned with it row by row.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One painting in the collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaintingRecord {
    pub painting_id: String,
    pub artist_id: String,
    pub artist_name: String,
    pub source_path: String,
    /// Row of this painting in the embedding matrix.
    pub row_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Artist {
    pub artist_id: String,
    pub artist_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate painting_id `{painting_id}` at row {row}")]
    DuplicatePainting { painting_id: String, row: usize },
    #[error("empty {field} at row {row}")]
    EmptyField { field: &'static str, row: usize },
    #[error("row_index values must be exactly 0..{n}, found {found} at position {position}")]
    RowIndexGap { n: usize, found: usize, position: usize },
    #[error("corpus needs at least 2 artists, found {0}")]
    TooFewArtists(usize),
    #[error("embedding matrix shape {n}x{d} does not match {len} values")]
    ShapeMismatch { n: usize, d: usize, len: usize },
}

/// An ordered, validated collection of paintings.
///
/// Artists are kept sorted by `artist_id`, so artist indices follow lexicographic id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    paintings: Vec<PaintingRecord>,
    artists: Vec<Artist>,
    artist_of_row: Vec<usize>,
    row_by_id: BTreeMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from records whose `row_index` must already be `0..N` in order.
    pub fn from_records(paintings: Vec<PaintingRecord>) -> Result<Self, CorpusError> {
        let n = paintings.len();
        let mut row_by_id = BTreeMap::new();
        let mut artist_names: BTreeMap<&str, &str> = BTreeMap::new();
        for (position, record) in paintings.iter().enumerate() {
            if record.row_index != position {
                return Err(CorpusError::RowIndexGap { n, found: record.row_index, position });
            }
            if record.painting_id.is_empty() {
                return Err(CorpusError::EmptyField { field: "painting_id", row: position });
            }
            if record.artist_id.is_empty() {
                return Err(CorpusError::EmptyField { field: "artist_id", row: position });
            }
            if row_by_id.insert(record.painting_id.clone(), position).is_some() {
                return Err(CorpusError::DuplicatePainting {
                    painting_id: record.painting_id.clone(),
                    row: position,
                });
            }
            // first spelling of an artist's display name wins
            artist_names.entry(&record.artist_id).or_insert(&record.artist_name);
        }
        if artist_names.len() < 2 {
            return Err(CorpusError::TooFewArtists(artist_names.len()));
        }
        let artists: Vec<Artist> = artist_names
            .iter()
            .map(|(id, name)| Artist { artist_id: String::from(*id), artist_name: String::from(*name) })
            .collect();
        let artist_of_row = paintings
            .iter()
            .map(|p| artists.binary_search_by(|a| a.artist_id.as_str().cmp(&p.artist_id)).unwrap_or_else(|_| unreachable!()))
            .collect();
        Ok(Self { paintings, artists, artist_of_row, row_by_id })
    }

    /// Builds a corpus from `(painting_id, artist_id, artist_name, source_path)` tuples,
    /// assigning `row_index` by position.
    pub fn from_entries<I>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (String, String, String, String)>,
    {
        let records = entries
            .into_iter()
            .enumerate()
            .map(|(row_index, (painting_id, artist_id, artist_name, source_path))| PaintingRecord {
                painting_id,
                artist_id,
                artist_name,
                source_path,
                row_index,
            })
            .collect();
        Self::from_records(records)
    }

    pub fn len(&self) -> usize {
        self.paintings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paintings.is_empty()
    }

    pub fn paintings(&self) -> &[PaintingRecord] {
        &self.paintings
    }

    pub fn artists(&self) -> &[Artist] {
        &self.artists
    }

    /// Index into [`Corpus::artists`] of the painting at `row`.
    pub fn artist_index(&self, row: usize) -> usize {
        self.artist_of_row[row]
    }

    pub fn artist_indices(&self) -> &[usize] {
        &self.artist_of_row
    }

    pub fn row_of(&self, painting_id: &str) -> Option<usize> {
        self.row_by_id.get(painting_id).copied()
    }

    pub fn artist_position(&self, artist_id: &str) -> Option<usize> {
        self.artists.binary_search_by(|a| a.artist_id.as_str().cmp(artist_id)).ok()
    }
}

/// Row-major `n x d` matrix of 32-bit features.
///
/// The constructor checks the shape only; [`EmbeddingMatrix::first_non_finite`] and
/// [`validate`] report non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    d: usize,
    values: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f32>) -> Result<Self, CorpusError> {
        if n.checked_mul(d) != Some(values.len()) {
            return Err(CorpusError::ShapeMismatch { n, d, len: values.len() });
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self, CorpusError> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.as_ref().len() != d {
                return Err(CorpusError::ShapeMismatch { n: rows.len(), d, len: values.len() + row.as_ref().len() });
            }
            values.extend_from_slice(row.as_ref());
        }
        Self::new(rows.len(), d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        // chunks_exact(0) panics, so an empty-width matrix yields n empty rows by hand
        (0..self.n).map(move |i| self.row(i))
    }

    /// `(row, column)` of the first NaN or infinite value in row-major order.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| (i / self.d, i % self.d))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    RowCountMismatch { corpus: usize, matrix: usize },
    NonFinite { row: usize, column: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RowCountMismatch { corpus, matrix } => {
                write!(f, "corpus has {corpus} paintings but the embedding matrix has {matrix} rows")
            }
            Self::NonFinite { row, column } => write!(f, "non-finite embedding value at row {row}, column {column}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that `corpus` and `matrix` can be used together. Violations are collected, never
/// returned as errors.
pub fn validate(corpus: &Corpus, matrix: &EmbeddingMatrix) -> ValidationReport {
    let mut issues = Vec::new();
    if corpus.len() != matrix.n() {
        issues.push(ValidationIssue::RowCountMismatch { corpus: corpus.len(), matrix: matrix.n() });
    }
    if matrix.d() > 0 {
        for (i, v) in matrix.values().iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::NonFinite { row: i / matrix.d(), column: i % matrix.d() });
            }
        }
    }
    ValidationReport { issues }
}
