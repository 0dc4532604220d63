//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // -- database ingestion ---------------------------------------------------
    #[error("missing mandatory column `{0}` in header")]
    MissingColumn(String),
    #[error("input contains no data rows")]
    EmptyInput,
    #[error(
        "conflicting definitions for glyph `{glyph}`: inventory {first_inventory} has {first}, \
         inventory {second_inventory} has {second}"
    )]
    GlyphConflict {
        glyph: String,
        first_inventory: String,
        first: String,
        second_inventory: String,
        second: String,
    },
    #[error("invalid feature token `{token}` for feature `{feature}` at data row {row}")]
    InvalidFeatureToken {
        token: String,
        feature: String,
        row: usize,
    },
    #[error("unknown glyph `{0}` (after normalization)")]
    UnknownGlyph(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown inventory `{0}`")]
    UnknownInventory(String),
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("feature vector length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("snapshot was written by version {found}, this tool expects {expected}")]
    SnapshotVersion { found: String, expected: String },

    // -- contrast evaluation --------------------------------------------------
    #[error("contrast target `{0}` appears among the scope constraints")]
    TargetInScope(String),
    #[error("no eligible segments for scope [{0}]")]
    EmptyDataset(String),
    #[error("synthetic mode requires realization parameters")]
    MissingRealization,
    #[error("training data is empty")]
    EmptyTrainingData,
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("train and test language sets overlap: {0}")]
    OverlappingLanguages(String),
    #[error("leave-one-out requires at least 2 languages, got {0}")]
    TooFewLanguages(usize),

    // -- streams and decoding -------------------------------------------------
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("stream has no frames")]
    EmptyStream,
    #[error("frame {0} has no arcs")]
    FrameWithoutArcs(usize),
    #[error("min_duration {min_duration} exceeds the {frames} available frames")]
    MinDurationTooLong { min_duration: usize, frames: usize },
    #[error("no feasible path through the lattice")]
    InfeasibleLattice,
    #[error("inventory `{0}` has no segments")]
    EmptyInventory(String),
    #[error("malformed stream file: {0}")]
    MalformedStream(String),

    // -- induction --------------------------------------------------------------
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("language anchor is empty")]
    EmptyAnchor,
    #[error("ranked language scores are all zero")]
    AllZeroScores,

    // -- parameters, configs, io ----------------------------------------------
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this is a usage error (bad invocation) rather than a domain
    /// error (bad data). The CLI maps usage errors to exit code 2 and domain
    /// errors to exit code 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::MissingRealization
                | Error::OverlappingLanguages(_)
                | Error::TooFewLanguages(_)
                | Error::EmptyCandidates
                | Error::EmptyPool
                | Error::EmptyAnchor
                | Error::AllZeroScores
                | Error::TargetInScope(_)
                | Error::InvalidParams(_)
                | Error::Config(_)
        )
    }
}
