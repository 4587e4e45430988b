//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide error enum. Message prefixes are stable and documented; the
/// batch tools match on them when deciding whether a line-level diagnostic
/// is recoverable.
#[derive(Debug, Error)]
pub enum Error {
    /// A record carried no modality at all.
    #[error("no modalities")]
    NoModalities,

    /// Two vectors that must share a class count K do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// NaN or infinity where a finite value is required.
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },

    /// Vector shorter than the two classes any classification needs.
    #[error("need at least 2 classes, got {got}")]
    TooFewClasses { got: usize },

    /// Evidence entries must be zero or positive.
    #[error("negative evidence: {value}")]
    NegativeEvidence { value: f64 },

    /// Dirichlet parameters must all be at least one.
    #[error("dirichlet alpha below 1: {value}")]
    AlphaBelowOne { value: f64 },

    /// Beliefs and uncertainty failed the simplex constraints.
    #[error("invalid opinion: {reason}")]
    InvalidOpinion { reason: String },

    /// Dempster combination lost essentially all mass to conflict.
    /// Unreachable for opinions with positive uncertainty; hitting it
    /// signals corrupted input.
    #[error("total conflict: 1 - c = {remainder:e}")]
    TotalConflict { remainder: f64 },

    /// An empty opinion list was handed to the fusion fold.
    #[error("nothing to fuse")]
    NothingToFuse,

    /// Uncertainty too close to zero to recover a finite Dirichlet strength.
    #[error("degenerate certainty: uncertainty {uncertainty:e}")]
    DegenerateCertainty { uncertainty: f64 },

    /// Frame selection had no frames left after applying the stride.
    #[error("no candidate frames")]
    NoCandidateFrames,

    /// A frame score sequence violated its structural invariants.
    #[error("invalid frame sequence: {reason}")]
    InvalidFrames { reason: String },

    /// The requested unseen truth label occurs in no record.
    #[error("label absent: {label}")]
    LabelAbsent { label: String },

    /// A record violated its structural invariants (empty id, duplicate
    /// modality, and so on).
    #[error("invalid record: {reason}")]
    Record { reason: String },

    /// Predictions and truths do not cover the same record ids.
    #[error("id mismatch: {detail}")]
    IdMismatch { detail: String },

    /// Taxonomy construction or config parsing failed.
    #[error("invalid taxonomy: {reason}")]
    Taxonomy { reason: String },

    /// A line of an input stream could not be turned into a record.
    /// Surfaced as the abort error in fail-fast mode.
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },

    /// Simulation was configured with out-of-range distribution parameters.
    #[error("invalid distribution parameters: {reason}")]
    Simulation { reason: String },

    /// Run configuration error (bad fusion order, missing files, ...).
    #[error("invalid configuration: {reason}")]
    Config { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
}
