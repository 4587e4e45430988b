//! The line-delimited record format: one JSON document per line with
//! fields `id`, `logits.{audio|video|text|...}`, optional `label`, and
//! optional `metadata`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::Error;
use crate::evidence::{LogitMap, LogitVector, Modality};

use super::taxonomy::{GroundTruth, LabelTaxonomy};

/// One sample: per-modality logit vectors, an optional external
/// ground-truth label (kept verbatim as supplied, resolution against a
/// taxonomy happens on demand), and free-form string metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitRecord {
    id: String,
    logits: LogitMap,
    label: Option<String>,
    metadata: BTreeMap<String, String>,
}

impl LogitRecord {
    pub fn new(
        id: impl Into<String>,
        vectors: Vec<LogitVector>,
        label: Option<String>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, Error> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::Record {
                reason: "empty id".into(),
            });
        }
        if vectors.is_empty() {
            return Err(Error::NoModalities);
        }
        let k = vectors[0].len();
        let mut logits = LogitMap::new();
        for vector in vectors {
            if vector.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: vector.len(),
                });
            }
            let modality = vector.modality().clone();
            if logits.insert(modality.clone(), vector).is_some() {
                return Err(Error::Record {
                    reason: format!("duplicate modality: {modality}"),
                });
            }
        }
        Ok(Self {
            id,
            logits,
            label,
            metadata,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn logits(&self) -> &LogitMap {
        &self.logits
    }

    /// The external label exactly as it appeared in the source.
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Number of classes in this record's vectors.
    pub fn k(&self) -> usize {
        self.logits.values().next().map_or(0, LogitVector::len)
    }

    /// Resolve the label (if any) against a taxonomy.
    pub fn resolved_truth(&self, taxonomy: &LabelTaxonomy) -> Option<GroundTruth> {
        self.label.as_deref().map(|label| taxonomy.resolve(label))
    }
}

/// A problem with one line of an input stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line number in the source stream.
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// What a lenient load produces: the records that validated plus a
/// diagnostic for every line that did not.
#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<LogitRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: String,
    logits: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

/// Parse and validate one record line against a taxonomy.
pub fn parse_record(line: &str, taxonomy: &LabelTaxonomy) -> Result<LogitRecord, Error> {
    let raw: RawLine = serde_json::from_str(line)?;
    let mut vectors = Vec::with_capacity(raw.logits.len());
    for (name, values) in raw.logits {
        let modality: Modality = name.parse()?;
        if values.len() != taxonomy.k() {
            return Err(Error::DimensionMismatch {
                expected: taxonomy.k(),
                got: values.len(),
            });
        }
        vectors.push(LogitVector::new(modality, values)?);
    }
    LogitRecord::new(raw.id, vectors, raw.label, raw.metadata)
}

struct LogitsRef<'a>(&'a LogitMap);

impl Serialize for LogitsRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // BTreeMap<Modality, _> iterates in canonical fusion order
        // (audio, video, text, then custom channels by name).
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (modality, vector) in self.0 {
            map.serialize_entry(modality.name(), vector.values())?;
        }
        map.end()
    }
}

fn nested_is_empty(map: &&BTreeMap<String, String>) -> bool {
    map.is_empty()
}

#[derive(Serialize)]
struct WireRecord<'a> {
    id: &'a str,
    logits: LogitsRef<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    #[serde(skip_serializing_if = "nested_is_empty")]
    metadata: &'a BTreeMap<String, String>,
}

/// Render one record as its canonical line (no trailing newline).
/// Modalities appear in canonical order; absent label and empty metadata
/// are omitted.
pub fn format_record(record: &LogitRecord) -> String {
    let wire = WireRecord {
        id: &record.id,
        logits: LogitsRef(&record.logits),
        label: record.label.as_deref(),
        metadata: &record.metadata,
    };
    serde_json::to_string(&wire).expect("record serialization cannot fail")
}

/// Read a line-delimited record stream.
///
/// Blank lines are skipped. With `fail_fast` the first malformed line
/// aborts the load with a line-numbered error; otherwise malformed lines
/// (including duplicate ids) become diagnostics and the load continues.
/// I/O failures abort in either mode.
pub fn load_records<R: BufRead>(
    source: R,
    taxonomy: &LabelTaxonomy,
    fail_fast: bool,
) -> Result<LoadOutcome, Error> {
    let mut outcome = LoadOutcome::default();
    let mut seen_ids = BTreeSet::new();
    for (number, line) in source.lines().enumerate() {
        let line = line?;
        let number = number as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let message = match parse_record(&line, taxonomy) {
            Ok(record) => {
                if seen_ids.insert(record.id().to_string()) {
                    outcome.records.push(record);
                    continue;
                }
                format!("duplicate id: {}", record.id())
            }
            Err(err) => err.to_string(),
        };
        if fail_fast {
            return Err(Error::Line {
                line: number,
                message,
            });
        }
        outcome.diagnostics.push(Diagnostic {
            line: number,
            message,
        });
    }
    Ok(outcome)
}

/// Write records in the canonical line format, one per line.
pub fn write_records<W: Write>(records: &[LogitRecord], mut sink: W) -> Result<(), Error> {
    for record in records {
        writeln!(sink, "{}", format_record(record))?;
    }
    Ok(())
}
