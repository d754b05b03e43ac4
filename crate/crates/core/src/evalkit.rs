//! Precision evaluation: seeded pair sampling, majority aggregation and precision.
//!
//! Sampling is reproducible across implementations:
//!
//! 1. The generator is xoshiro256++ seeded from a `u64` through SplitMix64.
//! 2. `uniform(n)` draws a `u64` `x`, forms the 128-bit product `x·n` and accepts the high
//!    word unless the low word is below `2⁶⁴ mod n`, in which case it draws again.
//! 3. Eligible queries (rows with at least one painting by another artist) are listed in row
//!    order. For `i` in `0..m`, `j = i + uniform(len − i)` and entries `i` and `j` swap; the
//!    first `m` entries are the queries.
//! 4. Then, pair by pair, a hit is chosen as `hits[uniform(hits.len())]` from the query's
//!    top-`k_pool` exclusion-filtered neighbors.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::nnindex::{Index, NnError};

/// Pairs sampled per evaluation round.
pub const DEFAULT_PAIRS: usize = 100;
/// Size of the retrieval pool a sampled hit is drawn from.
pub const DEFAULT_POOL: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("requested {requested} pairs but only {eligible} queries have cross-artist candidates")]
    NotEnoughQueries { requested: usize, eligible: usize },
    #[error("pair count and pool size must be positive")]
    ZeroCount,
    #[error("expert count must be odd, got {0}")]
    EvenExpertCount(usize),
    #[error("judgment set `{expert}` covers {actual} pairs, expected {expected}")]
    CoverageMismatch { expert: String, expected: usize, actual: usize },
    #[error("judgment set `{expert}` judges pair {pair} more than once")]
    DuplicateVerdict { expert: String, pair: usize },
    #[error("judgment set `{expert}` has pair index {pair} outside 0..{pair_count}")]
    PairOutOfRange { expert: String, pair: usize, pair_count: usize },
    #[error("judgment set `{expert}` is missing pair {pair}")]
    MissingVerdict { expert: String, pair: usize },
    #[error("no verdicts to score")]
    Empty,
    #[error(transparent)]
    Index(#[from] NnError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledPair {
    pub query_row: usize,
    pub query_id: String,
    pub hit_row: usize,
    pub hit_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSample {
    pub pairs: Vec<SampledPair>,
    pub seed: u64,
    pub k_pool: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Meaningful,
    NotMeaningful,
}

/// One expert's verdicts, indexed by pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgmentSet {
    pub expert_id: String,
    verdicts: Vec<Verdict>,
}

impl JudgmentSet {
    /// Checks that `entries` judge every pair in `0..pair_count` exactly once.
    pub fn from_entries(
        expert_id: impl Into<String>,
        entries: impl IntoIterator<Item = (usize, Verdict)>,
        pair_count: usize,
    ) -> Result<Self, EvalError> {
        let expert = expert_id.into();
        let mut slots: Vec<Option<Verdict>> = vec![None; pair_count];
        for (pair, verdict) in entries {
            let slot = slots
                .get_mut(pair)
                .ok_or_else(|| EvalError::PairOutOfRange { expert: expert.clone(), pair, pair_count })?;
            if slot.replace(verdict).is_some() {
                return Err(EvalError::DuplicateVerdict { expert, pair });
            }
        }
        let verdicts = slots
            .into_iter()
            .enumerate()
            .map(|(pair, v)| v.ok_or_else(|| EvalError::MissingVerdict { expert: expert.clone(), pair }))
            .collect::<Result<_, _>>()?;
        Ok(Self { expert_id: expert, verdicts })
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }
}

/// Lemire's multiply-and-reject mapping of a 64-bit draw onto `0..n`.
fn uniform<R: RngCore>(rng: &mut R, n: u64) -> u64 {
    debug_assert!(n > 0);
    let threshold = n.wrapping_neg() % n;
    loop {
        let product = u128::from(rng.next_u64()) * u128::from(n);
        if (product as u64) >= threshold {
            return (product >> 64) as u64;
        }
    }
}

pub fn sample_pairs(index: &Index, m: usize, k_pool: usize, seed: u64) -> Result<PairSample, EvalError> {
    if m == 0 || k_pool == 0 {
        return Err(EvalError::ZeroCount);
    }
    let mut eligible: Vec<usize> = (0..index.len()).filter(|&r| index.has_cross_artist_candidate(r)).collect();
    if m > eligible.len() {
        return Err(EvalError::NotEnoughQueries { requested: m, eligible: eligible.len() });
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let len = eligible.len();
    for i in 0..m {
        let j = i + uniform(&mut rng, (len - i) as u64) as usize;
        eligible.swap(i, j);
    }
    let mut pairs = Vec::with_capacity(m);
    for &query_row in &eligible[..m] {
        let hits = index.query_row(query_row, k_pool, true)?;
        let hit = &hits[uniform(&mut rng, hits.len() as u64) as usize];
        pairs.push(SampledPair {
            query_row,
            query_id: String::from(index.painting_id(query_row)),
            hit_row: hit.row,
            hit_id: hit.painting_id.clone(),
        });
    }
    Ok(PairSample { pairs, seed, k_pool })
}

/// Per-pair majority verdict over an odd panel of experts.
pub fn aggregate(judgments: &[JudgmentSet]) -> Result<Vec<Verdict>, EvalError> {
    if judgments.len().is_multiple_of(2) {
        return Err(EvalError::EvenExpertCount(judgments.len()));
    }
    let expected = judgments[0].verdicts.len();
    if let Some(odd) = judgments.iter().find(|j| j.verdicts.len() != expected) {
        return Err(EvalError::CoverageMismatch {
            expert: odd.expert_id.clone(),
            expected,
            actual: odd.verdicts.len(),
        });
    }
    Ok((0..expected)
        .map(|pair| {
            let yes = judgments.iter().filter(|j| j.verdicts[pair] == Verdict::Meaningful).count();
            if 2 * yes > judgments.len() {
                Verdict::Meaningful
            } else {
                Verdict::NotMeaningful
            }
        })
        .collect())
}

/// Fraction of verdicts that are [`Verdict::Meaningful`].
pub fn precision(verdicts: &[Verdict]) -> Result<f64, EvalError> {
    if verdicts.is_empty() {
        return Err(EvalError::Empty);
    }
    let meaningful = verdicts.iter().filter(|v| **v == Verdict::Meaningful).count();
    Ok(meaningful as f64 / verdicts.len() as f64)
}
