use thiserror::Error;

/// Errors produced by tensor construction, augmentation, completion and metrics.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("shape {shape:?} requires {expected} scalars, got {found}")]
    DataLength {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("invalid shape {0:?}: every mode size must be at least 1")]
    EmptyMode(Vec<usize>),
    #[error("non-finite scalar at linear position {0}")]
    NonFinite(usize),
    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("prefix length {k} out of range 1..{order} for order-{order} tensor")]
    PrefixOutOfRange { k: usize, order: usize },
    #[error("{0:?} is not a permutation of 0..{1}")]
    NotAPermutation(Vec<usize>, usize),
    #[error("cannot reshape {from:?} ({from_len} scalars) into {to:?} ({to_len} scalars)")]
    ReshapeMismatch {
        from: Vec<usize>,
        from_len: usize,
        to: Vec<usize>,
        to_len: usize,
    },
    #[error("shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("image shape {shape:?} does not match {row_radix}^n x {col_radix}^n x channels for any n >= 1")]
    NotAugmentable {
        shape: Vec<usize>,
        row_radix: usize,
        col_radix: usize,
    },
    #[error("rank vector has {found} entries, expected {expected}")]
    RankCount { expected: usize, found: usize },
    #[error("rank {rank} for prefix {k} exceeds unfolding bound min({m}, {n})")]
    RankTooLarge {
        k: usize,
        rank: usize,
        m: usize,
        n: usize,
    },
    #[error("rank for prefix {0} must be at least 1")]
    RankZero(usize),
    #[error("observation mask marks no entries as known")]
    EmptyMask,
    #[error("weights must be non-negative and sum to 1 (sum was {0})")]
    BadWeights(f64),
    #[error("solver produced non-finite values at iteration {0}")]
    Diverged(usize),
    #[error("reference tensor has zero norm; relative error undefined")]
    ZeroNormReference,
    #[error("image {rows}x{cols} is smaller than the {window}x{window} comparison window")]
    WindowTooLarge {
        rows: usize,
        cols: usize,
        window: usize,
    },
    #[error("{0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
