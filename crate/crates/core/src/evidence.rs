//! Logits to evidence to Dirichlet parameters to opinions.
//!
//! Every modality-specific classifier reports one raw logit per class.
//! Working on logits rather than softmax outputs keeps the scale
//! information that encodes how confident a model is, so the pipeline
//! never normalizes them away. Instead the logits are shifted into
//! non-negative *evidence*, the evidence parameterizes a Dirichlet
//! distribution (`alpha = evidence + 1`), and the Dirichlet is read back
//! as a subjective-logic *opinion*: per-class beliefs plus one scalar
//! uncertainty, always summing to one.
//!
//! Two evidence extraction strategies exist:
//!
//! * [`Mitigation::Advanced`] shifts all logits of a record by the single
//!   minimum across its present modalities, so cross-modality scale
//!   differences survive and at least one output entry is exactly zero.
//! * [`Mitigation::Basic`] clips each modality at zero independently,
//!   the common baseline; negative structure is discarded.
//!
//! All functions here are pure; they can be called concurrently from any
//! number of threads.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Tolerance for the `sum(beliefs) + uncertainty == 1` simplex check.
pub const OPINION_SUM_TOLERANCE: f64 = 1e-9;

/// An input channel with its own classifier.
///
/// The derived ordering is the canonical fusion order: audio, video,
/// text, then custom channels by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Audio,
    Video,
    Text,
    Other(String),
}

impl Modality {
    /// Name used in wire formats and CLI flags.
    pub fn name(&self) -> &str {
        match self {
            Modality::Audio => "audio",
            Modality::Video => "video",
            Modality::Text => "text",
            Modality::Other(name) => name,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "audio" => Ok(Modality::Audio),
            "video" => Ok(Modality::Video),
            "text" => Ok(Modality::Text),
            "" => Err(Error::Config {
                reason: "empty modality name".into(),
            }),
            other => Ok(Modality::Other(other.to_string())),
        }
    }
}

/// How raw logits become non-negative evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mitigation {
    /// Per-modality clip at zero: `e_k = max(l_k, 0)`.
    Basic,
    /// Shift every present modality by the global minimum logit of the
    /// record: `e^n = l^n - min_m(min l^m)`.
    Advanced,
}

/// Raw classifier scores for one modality. Entries are unbounded reals
/// but must be finite; length is the class count K >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector {
    modality: Modality,
    values: Vec<f64>,
}

impl LogitVector {
    pub fn new(modality: Modality, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::TooFewClasses { got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "logit" });
        }
        Ok(LogitVector { modality, values })
    }

    pub fn modality(&self) -> &Modality {
        &self.modality
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-class non-negative support derived from logits.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector {
    values: Vec<f64>,
}

impl EvidenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::TooFewClasses { got: values.len() });
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "evidence" });
            }
            if v < 0.0 {
                return Err(Error::NegativeEvidence { value: v });
            }
        }
        Ok(EvidenceVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parameters of a Dirichlet distribution over the class simplex.
/// `strength` is the sum of the alpha vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
    strength: f64,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self, Error> {
        if alpha.len() < 2 {
            return Err(Error::TooFewClasses { got: alpha.len() });
        }
        for &a in &alpha {
            if !a.is_finite() {
                return Err(Error::NonFinite { what: "alpha" });
            }
            if a < 1.0 {
                return Err(Error::AlphaBelowOne { value: a });
            }
        }
        let strength = alpha.iter().sum();
        Ok(DirichletParams { alpha, strength })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }
}

/// Subjective-logic opinion: belief mass per class plus one scalar
/// uncertainty, with `sum(beliefs) + uncertainty = 1`.
///
/// Uncertainty is strictly positive: finite evidence keeps the Dirichlet
/// strength finite, so some mass always stays on the whole frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Opinion {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

impl Opinion {
    pub fn try_new(beliefs: Vec<f64>, uncertainty: f64) -> Result<Self, Error> {
        if beliefs.len() < 2 {
            return Err(Error::TooFewClasses { got: beliefs.len() });
        }
        if beliefs.iter().any(|b| !b.is_finite()) || !uncertainty.is_finite() {
            return Err(Error::NonFinite { what: "belief mass" });
        }
        if let Some(&b) = beliefs.iter().find(|b| **b < 0.0 || **b > 1.0) {
            return Err(Error::InvalidOpinion {
                reason: format!("belief {b} outside [0, 1]"),
            });
        }
        if uncertainty <= 0.0 || uncertainty > 1.0 {
            return Err(Error::InvalidOpinion {
                reason: format!("uncertainty {uncertainty} outside (0, 1]"),
            });
        }
        let total: f64 = beliefs.iter().sum::<f64>() + uncertainty;
        if (total - 1.0).abs() > OPINION_SUM_TOLERANCE {
            return Err(Error::InvalidOpinion {
                reason: format!("beliefs + uncertainty sum to {total}, expected 1"),
            });
        }
        Ok(Opinion {
            beliefs,
            uncertainty,
        })
    }

    /// The opinion of a missing or totally uninformative channel:
    /// zero beliefs, uncertainty one.
    pub fn vacuous(k: usize) -> Self {
        Opinion {
            beliefs: vec![0.0; k],
            uncertainty: 1.0,
        }
    }

    /// Exact check, not tolerance-based: combining with a vacuous opinion
    /// is a bit-level identity, so only exactly-vacuous operands may be
    /// treated as absent.
    pub fn is_vacuous(&self) -> bool {
        self.uncertainty == 1.0 && self.beliefs.iter().all(|&b| b == 0.0)
    }

    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn k(&self) -> usize {
        self.beliefs.len()
    }

    /// Internal constructor for values produced by operations that
    /// preserve the invariants analytically.
    pub(crate) fn from_parts_unchecked(beliefs: Vec<f64>, uncertainty: f64) -> Self {
        debug_assert!(beliefs.len() >= 2);
        debug_assert!(
            (beliefs.iter().sum::<f64>() + uncertainty - 1.0).abs() <= OPINION_SUM_TOLERANCE
        );
        Opinion {
            beliefs,
            uncertainty,
        }
    }
}

/// Map from modality to its raw logits for one sample.
pub type LogitMap = BTreeMap<Modality, LogitVector>;
/// Map from modality to its extracted evidence for one sample.
pub type EvidenceMap = BTreeMap<Modality, EvidenceVector>;

fn check_same_k(record: &LogitMap) -> Result<usize, Error> {
    let mut iter = record.values();
    let first = iter.next().ok_or(Error::NoModalities)?;
    let k = first.len();
    for v in iter {
        if v.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: v.len(),
            });
        }
    }
    Ok(k)
}

/// Advanced mitigation: subtract the minimum logit across all present
/// modalities of the record from every logit.
///
/// The shift is computed per record over the modalities actually present,
/// never across records or batches. The global minimum of the output is
/// exactly zero, and adding one shared constant to every input logit
/// leaves the output unchanged.
pub fn advanced_evidence(record: &LogitMap) -> Result<EvidenceMap, Error> {
    check_same_k(record)?;
    let global_min = record
        .values()
        .flat_map(|v| v.values().iter().copied())
        .fold(f64::INFINITY, f64::min);
    record
        .iter()
        .map(|(modality, logits)| {
            let shifted = logits.values().iter().map(|l| l - global_min).collect();
            EvidenceVector::new(shifted).map(|e| (modality.clone(), e))
        })
        .collect()
}

/// Basic mitigation: per-modality clip at zero, `e_k = max(l_k, 0)`.
///
/// No cross-modality coupling; everything below zero is discarded.
pub fn basic_evidence(record: &LogitMap) -> Result<EvidenceMap, Error> {
    check_same_k(record)?;
    record
        .iter()
        .map(|(modality, logits)| {
            let clipped = logits.values().iter().map(|l| l.max(0.0)).collect();
            EvidenceVector::new(clipped).map(|e| (modality.clone(), e))
        })
        .collect()
}

/// Dispatch on the configured mitigation strategy.
pub fn extract_evidence(record: &LogitMap, mode: Mitigation) -> Result<EvidenceMap, Error> {
    match mode {
        Mitigation::Basic => basic_evidence(record),
        Mitigation::Advanced => advanced_evidence(record),
    }
}

/// `alpha_k = e_k + 1`, `strength = sum(alpha)`.
pub fn evidence_to_dirichlet(evidence: &EvidenceVector) -> DirichletParams {
    let alpha: Vec<f64> = evidence.values().iter().map(|e| e + 1.0).collect();
    let strength = alpha.iter().sum();
    DirichletParams { alpha, strength }
}

/// `b_k = (alpha_k - 1) / strength`, `uncertainty = K / strength`.
///
/// Cannot fail: every alpha is at least one, so the strength is at least
/// K and the uncertainty lands in (0, 1].
pub fn dirichlet_to_opinion(params: &DirichletParams) -> Opinion {
    let strength = params.strength();
    let beliefs: Vec<f64> = params.alpha().iter().map(|a| (a - 1.0) / strength).collect();
    let uncertainty = params.k() as f64 / strength;
    Opinion::from_parts_unchecked(beliefs, uncertainty)
}

/// Full single-modality chain: evidence -> Dirichlet -> opinion.
pub fn evidence_to_opinion(evidence: &EvidenceVector) -> Opinion {
    dirichlet_to_opinion(&evidence_to_dirichlet(evidence))
}
