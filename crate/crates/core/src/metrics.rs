//! Accuracy metrics, confusion matrices, and fallback analysis for
//! unseen truth labels.
//!
//! Two accuracies are reported everywhere: the standard one, and a
//! neutral-tolerant one where predicting the neutral class is always
//! accepted — neutral is the safe fallback, so erring towards it is not
//! penalized. Records whose truth label falls outside the taxonomy can
//! never be predicted; by default they stay in the denominators (and are
//! wrong under standard accuracy), or they can be excluded entirely via
//! [`UnseenPolicy::Exclude`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datasetio::{GroundTruth, LabelTaxonomy};
use crate::error::Error;
use crate::fusion::FusionResult;

/// Ground truths keyed by record id.
pub type TruthMap = BTreeMap<String, GroundTruth>;

/// The class call for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub record_id: String,
    /// Argmax of `probabilities`; ties go to the lowest index.
    pub predicted_index: usize,
    pub probabilities: Vec<f64>,
    pub uncertainty: f64,
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl Prediction {
    pub fn new(
        record_id: impl Into<String>,
        probabilities: Vec<f64>,
        uncertainty: f64,
    ) -> Result<Self, Error> {
        if probabilities.len() < 2 {
            return Err(Error::TooFewClasses {
                got: probabilities.len(),
            });
        }
        if probabilities.iter().any(|p| !p.is_finite()) || !uncertainty.is_finite() {
            return Err(Error::NonFinite {
                what: "probability",
            });
        }
        Ok(Self {
            record_id: record_id.into(),
            predicted_index: argmax(&probabilities),
            probabilities,
            uncertainty,
        })
    }

    /// Wrap a fusion result; its probabilities are valid by construction.
    pub fn from_result(record_id: impl Into<String>, result: &FusionResult) -> Self {
        Self {
            record_id: record_id.into(),
            predicted_index: argmax(&result.probabilities),
            probabilities: result.probabilities.clone(),
            uncertainty: result.fused.uncertainty(),
        }
    }
}

/// How unseen-truth records enter accuracy denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnseenPolicy {
    /// Keep them; they are unpredictable, so standard accuracy counts
    /// them wrong (neutral-tolerant still credits neutral predictions).
    #[default]
    CountAsWrong,
    /// Drop them from both numerator and denominator.
    Exclude,
}

/// Counts of (truth row, predicted column) pairs. Rows are the canonical
/// classes in taxonomy order — always all of them, even at count zero —
/// followed by any unseen truth labels in alphabetical order. Columns are
/// the canonical classes only, since predictions cannot leave the
/// taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    rows: Vec<ConfusionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionRow {
    pub truth: String,
    /// True for rows whose truth label is outside the taxonomy.
    pub unseen: bool,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// Predicted-class column labels.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn rows(&self) -> &[ConfusionRow] {
        &self.rows
    }

    pub fn row(&self, truth: &str) -> Option<&ConfusionRow> {
        self.rows.iter().find(|r| r.truth == truth)
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flat_map(|r| &r.counts).sum()
    }

    /// Standard accuracy recomputed from the counts; must equal
    /// [`accuracy_standard`] exactly (same integer ratio).
    pub fn accuracy_standard(&self, policy: UnseenPolicy) -> f64 {
        let k = self.classes.len();
        let mut numerator = 0u64;
        let mut denominator = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            let row_total: u64 = row.counts.iter().sum();
            if row.unseen {
                if policy == UnseenPolicy::CountAsWrong {
                    denominator += row_total;
                }
            } else {
                denominator += row_total;
                debug_assert!(i < k);
                numerator += row.counts[i];
            }
        }
        ratio(numerator, denominator)
    }

    /// Neutral-tolerant accuracy recomputed from the counts.
    pub fn accuracy_neutral_tolerant(&self, neutral_index: usize, policy: UnseenPolicy) -> f64 {
        let mut numerator = 0u64;
        let mut denominator = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            let row_total: u64 = row.counts.iter().sum();
            if row.unseen {
                if policy == UnseenPolicy::CountAsWrong {
                    denominator += row_total;
                    numerator += row.counts[neutral_index];
                }
            } else {
                denominator += row_total;
                numerator += row.counts[i];
                if i != neutral_index {
                    numerator += row.counts[neutral_index];
                }
            }
        }
        ratio(numerator, denominator)
    }
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Pair predictions with truths by record id; the two sides must cover
/// exactly the same ids.
fn aligned<'a>(
    predictions: &'a [Prediction],
    truths: &'a TruthMap,
    taxonomy: &LabelTaxonomy,
) -> Result<Vec<(&'a Prediction, &'a GroundTruth)>, Error> {
    if predictions.len() != truths.len() {
        return Err(Error::IdMismatch {
            detail: format!(
                "{} predictions vs {} truths",
                predictions.len(),
                truths.len()
            ),
        });
    }
    let mut by_id: BTreeMap<&str, &Prediction> = BTreeMap::new();
    for prediction in predictions {
        if prediction.probabilities.len() != taxonomy.k() {
            return Err(Error::DimensionMismatch {
                expected: taxonomy.k(),
                got: prediction.probabilities.len(),
            });
        }
        if by_id
            .insert(prediction.record_id.as_str(), prediction)
            .is_some()
        {
            return Err(Error::IdMismatch {
                detail: format!("duplicate prediction for id {}", prediction.record_id),
            });
        }
    }
    truths
        .iter()
        .map(|(id, truth)| {
            by_id
                .get(id.as_str())
                .map(|prediction| (*prediction, truth))
                .ok_or_else(|| Error::IdMismatch {
                    detail: format!("no prediction for id {id}"),
                })
        })
        .collect()
}

/// Fraction of records whose predicted class equals the canonical truth.
/// Empty denominators yield 0.
pub fn accuracy_standard(
    predictions: &[Prediction],
    truths: &TruthMap,
    taxonomy: &LabelTaxonomy,
    policy: UnseenPolicy,
) -> Result<f64, Error> {
    let mut numerator = 0u64;
    let mut denominator = 0u64;
    for (prediction, truth) in aligned(predictions, truths, taxonomy)? {
        match truth {
            GroundTruth::Known(index) => {
                denominator += 1;
                if prediction.predicted_index == *index {
                    numerator += 1;
                }
            }
            GroundTruth::Unseen(_) => {
                if policy == UnseenPolicy::CountAsWrong {
                    denominator += 1;
                }
            }
        }
    }
    Ok(ratio(numerator, denominator))
}

/// Like [`accuracy_standard`], but a neutral prediction is always
/// accepted — including for unseen truths, where falling back to neutral
/// is the desired behavior.
pub fn accuracy_neutral_tolerant(
    predictions: &[Prediction],
    truths: &TruthMap,
    taxonomy: &LabelTaxonomy,
    policy: UnseenPolicy,
) -> Result<f64, Error> {
    let neutral = taxonomy.neutral_index();
    let mut numerator = 0u64;
    let mut denominator = 0u64;
    for (prediction, truth) in aligned(predictions, truths, taxonomy)? {
        let predicted = prediction.predicted_index;
        match truth {
            GroundTruth::Known(index) => {
                denominator += 1;
                if predicted == *index || predicted == neutral {
                    numerator += 1;
                }
            }
            GroundTruth::Unseen(_) => {
                if policy == UnseenPolicy::CountAsWrong {
                    denominator += 1;
                    if predicted == neutral {
                        numerator += 1;
                    }
                }
            }
        }
    }
    Ok(ratio(numerator, denominator))
}

/// Build the full confusion matrix: canonical truth rows in taxonomy
/// order (all present), then one row per unseen truth label,
/// alphabetically.
pub fn confusion(
    predictions: &[Prediction],
    truths: &TruthMap,
    taxonomy: &LabelTaxonomy,
) -> Result<ConfusionMatrix, Error> {
    let k = taxonomy.k();
    let mut canonical = vec![vec![0u64; k]; k];
    let mut unseen: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for (prediction, truth) in aligned(predictions, truths, taxonomy)? {
        match truth {
            GroundTruth::Known(index) => canonical[*index][prediction.predicted_index] += 1,
            GroundTruth::Unseen(label) => {
                unseen.entry(label).or_insert_with(|| vec![0u64; k])
                    [prediction.predicted_index] += 1
            }
        }
    }

    let mut rows: Vec<ConfusionRow> = canonical
        .into_iter()
        .enumerate()
        .map(|(i, counts)| ConfusionRow {
            truth: taxonomy.class_name(i).to_string(),
            unseen: false,
            counts,
        })
        .collect();
    rows.extend(unseen.into_iter().map(|(label, counts)| ConfusionRow {
        truth: label.to_string(),
        unseen: true,
        counts,
    }));

    Ok(ConfusionMatrix {
        classes: taxonomy.classes().to_vec(),
        rows,
    })
}

/// Unseen truth labels present in a truth map, sorted.
pub fn unseen_labels(truths: &TruthMap) -> Vec<String> {
    let mut labels: Vec<String> = truths
        .values()
        .filter_map(|truth| match truth {
            GroundTruth::Unseen(label) => Some(label.clone()),
            GroundTruth::Known(_) => None,
        })
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Of the records whose truth is the given unseen label, the fraction
/// predicted as neutral. Errors if no record carries that truth label.
pub fn fallback_rate(
    predictions: &[Prediction],
    truths: &TruthMap,
    taxonomy: &LabelTaxonomy,
    unseen_label: &str,
) -> Result<f64, Error> {
    let wanted = unseen_label.trim().to_lowercase();
    let neutral = taxonomy.neutral_index();
    let mut numerator = 0u64;
    let mut denominator = 0u64;
    for (prediction, truth) in aligned(predictions, truths, taxonomy)? {
        if matches!(truth, GroundTruth::Unseen(label) if *label == wanted) {
            denominator += 1;
            if prediction.predicted_index == neutral {
                numerator += 1;
            }
        }
    }
    if denominator == 0 {
        return Err(Error::LabelAbsent {
            label: wanted,
        });
    }
    Ok(numerator as f64 / denominator as f64)
}
