//! Ingestion and persistence: label taxonomies, line-delimited logit
//! records, frame score streams, and evaluation reports.
//!
//! Everything here is deliberately boring text I/O. The wire formats are
//! documented byte-exactly in `docs/formats.md`; loaders validate eagerly
//! against a [`LabelTaxonomy`] and report malformed lines with line
//! numbers instead of panicking.

mod frames;
mod records;
mod report;
mod taxonomy;

pub use frames::{load_frame_sequences, parse_frame_sequence, FrameLoadOutcome, NamedSequence};
pub use records::{
    format_record, load_records, parse_record, write_records, Diagnostic, LoadOutcome,
    LogitRecord,
};
pub use report::{read_report, write_report, EvalReport, ReportFormat};
pub use taxonomy::{AliasTarget, GroundTruth, LabelTaxonomy};
