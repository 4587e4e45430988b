//! Evaluation report rendering: a human tabular format and a structured
//! JSON format that round-trips losslessly. Both are byte-deterministic
//! for identical inputs.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metrics::{confusion, ConfusionMatrix, TruthMap};

use super::taxonomy::LabelTaxonomy;

/// Everything one evaluation run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    /// Records that entered the metrics.
    pub n_records: u64,
    pub accuracy_standard: f64,
    pub accuracy_neutral_tolerant: f64,
    /// Mean conflict factor over every pairwise combination step of every
    /// record; 0 when no record fused more than one modality.
    pub per_step_mean_conflict: f64,
    /// Neutral-fallback rate per unseen truth label present in the data.
    pub fallback_rates: BTreeMap<String, f64>,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    /// The report of an empty evaluation: zeroed fields, all-zero
    /// canonical confusion rows.
    pub fn empty(taxonomy: &LabelTaxonomy) -> Self {
        let matrix = confusion(&[], &TruthMap::new(), taxonomy)
            .expect("empty confusion is always valid");
        Self {
            n_records: 0,
            accuracy_standard: 0.0,
            accuracy_neutral_tolerant: 0.0,
            per_step_mean_conflict: 0.0,
            fallback_rates: BTreeMap::new(),
            confusion: matrix,
        }
    }
}

/// Output encoding for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Aligned text for humans.
    Tabular,
    /// JSON for machines; round-trips losslessly via [`read_report`].
    Structured,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_lowercase().as_str() {
            "tabular" => Ok(Self::Tabular),
            "structured" => Ok(Self::Structured),
            other => Err(Error::Config {
                reason: format!("unknown report format {other:?} (tabular|structured)"),
            }),
        }
    }
}

fn push_trimmed(out: &mut String, line: &str) {
    out.push_str(line.trim_end());
    out.push('\n');
}

fn render_confusion(out: &mut String, matrix: &ConfusionMatrix) {
    push_trimmed(out, "confusion (truth rows, predicted columns)");
    let classes = matrix.classes();
    let truth_width = std::iter::once("truth".len())
        .chain(
            matrix
                .rows()
                .iter()
                .map(|row| row.truth.len() + usize::from(row.unseen)),
        )
        .max()
        .unwrap_or(5);
    let column_widths: Vec<usize> = classes
        .iter()
        .enumerate()
        .map(|(j, class)| {
            matrix
                .rows()
                .iter()
                .map(|row| row.counts.get(j).copied().unwrap_or(0).to_string().len())
                .max()
                .unwrap_or(1)
                .max(class.len())
        })
        .collect();

    let mut header = format!("{:<truth_width$}", "truth");
    for (class, width) in classes.iter().zip(&column_widths) {
        header.push_str(&format!("  {class:>width$}"));
    }
    push_trimmed(out, &header);

    let mut any_unseen = false;
    for row in matrix.rows() {
        any_unseen |= row.unseen;
        let label = if row.unseen {
            format!("{}*", row.truth)
        } else {
            row.truth.clone()
        };
        let mut line = format!("{label:<truth_width$}");
        for (j, width) in column_widths.iter().enumerate() {
            let count = row.counts.get(j).copied().unwrap_or(0);
            line.push_str(&format!("  {count:>width$}"));
        }
        push_trimmed(out, &line);
    }
    if any_unseen {
        out.push('\n');
        push_trimmed(out, "unseen truth labels are marked *");
    }
}

fn render_tabular(report: &EvalReport) -> String {
    const LABELS: [&str; 4] = [
        "records",
        "accuracy (standard)",
        "accuracy (neutral-tolerant)",
        "mean conflict per step",
    ];
    let width = LABELS.iter().map(|l| l.len()).max().unwrap() + 2;

    let mut out = String::new();
    push_trimmed(&mut out, &format!("{:<width$}{}", LABELS[0], report.n_records));
    push_trimmed(
        &mut out,
        &format!("{:<width$}{:.6}", LABELS[1], report.accuracy_standard),
    );
    push_trimmed(
        &mut out,
        &format!("{:<width$}{:.6}", LABELS[2], report.accuracy_neutral_tolerant),
    );
    push_trimmed(
        &mut out,
        &format!("{:<width$}{:.6}", LABELS[3], report.per_step_mean_conflict),
    );
    out.push('\n');
    render_confusion(&mut out, &report.confusion);

    if !report.fallback_rates.is_empty() {
        out.push('\n');
        push_trimmed(&mut out, "fallback to neutral");
        let label_width = report
            .fallback_rates
            .keys()
            .map(String::len)
            .max()
            .unwrap()
            + 2;
        for (label, rate) in &report.fallback_rates {
            push_trimmed(&mut out, &format!("{label:<label_width$}{rate:.6}"));
        }
    }
    out
}

/// Write a report; both formats are deterministic functions of the
/// report value.
pub fn write_report<W: Write>(
    report: &EvalReport,
    mut sink: W,
    format: ReportFormat,
) -> Result<(), Error> {
    match format {
        ReportFormat::Tabular => sink.write_all(render_tabular(report).as_bytes())?,
        ReportFormat::Structured => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Read back a structured report.
pub fn read_report<R: Read>(source: R) -> Result<EvalReport, Error> {
    Ok(serde_json::from_reader(source)?)
}
