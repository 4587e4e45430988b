//! Uncertainty-aware multimodal fusion over pre-computed classifier
//! logits.
//!
//! Each modality's logits become non-negative evidence, the evidence
//! parameterizes a Dirichlet distribution, and the Dirichlet collapses to
//! a subjective-logic opinion: per-class belief masses plus one explicit
//! uncertainty mass. Opinions from different modalities are combined with
//! a reduced Dempster-Shafer rule whose conflict factor is kept around
//! for diagnostics, and the fused opinion converts back to calibrated
//! class probabilities. Missing modalities cost nothing: they are exactly
//! the vacuous opinion, and combining with it is an identity.
//!
//! The crate also ships the surrounding batch tooling: line-delimited
//! record I/O, label taxonomies with alias tables, best-frame selection
//! for scored video sequences, the accuracy metrics (standard and
//! neutral-tolerant), a seeded simulator, and the `evifuse` CLI. The
//! `examples/` directory walks through each capability.
//!
//! ```
//! use evifuse::datasetio::LogitRecord;
//! use evifuse::evidence::{LogitVector, Mitigation, Modality};
//! use evifuse::fusion::fuse_record;
//!
//! let record = LogitRecord::new(
//!     "utterance-7",
//!     vec![
//!         LogitVector::new(Modality::Audio, vec![2.0, 0.5, -1.0]).unwrap(),
//!         LogitVector::new(Modality::Video, vec![1.0, 0.0, 1.0]).unwrap(),
//!     ],
//!     None,
//!     Default::default(),
//! )
//! .unwrap();
//!
//! let result = fuse_record(&record, Mitigation::Advanced).unwrap();
//! assert!((result.probabilities[0] - 8.0 / 15.0).abs() < 1e-9);
//! assert!((result.fused.uncertainty() - 0.2).abs() < 1e-9);
//! ```

pub mod cli;
pub mod datasetio;
pub mod error;
pub mod evidence;
pub mod frameselect;
pub mod fusion;
pub mod metrics;
pub mod simulate;

pub use datasetio::{EvalReport, LabelTaxonomy, LogitRecord};
pub use error::Error;
pub use evidence::{Mitigation, Modality, Opinion};
pub use fusion::FusionResult;
