//! Line-delimited frame score streams for best-frame selection: one JSON
//! document per line with an `id`, a `frames` array of
//! `[frame_index, [scores...]]` pairs, and an optional per-sequence
//! `stride` overriding the run-wide default.

use std::io::BufRead;

use serde::Deserialize;

use crate::error::Error;
use crate::frameselect::{FrameScoreSequence, FrameScores};

use super::records::Diagnostic;

/// One input sequence, identified for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSequence {
    pub id: String,
    pub sequence: FrameScoreSequence,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    id: String,
    frames: Vec<(u64, Vec<f64>)>,
    #[serde(default)]
    stride: Option<usize>,
}

/// Parse and validate one sequence line. `default_stride` applies when
/// the line carries no `stride` field.
pub fn parse_frame_sequence(line: &str, default_stride: usize) -> Result<NamedSequence, Error> {
    let raw: RawSequence = serde_json::from_str(line)?;
    if raw.id.trim().is_empty() {
        return Err(Error::Record {
            reason: "empty id".into(),
        });
    }
    let frames: Vec<FrameScores> = raw
        .frames
        .into_iter()
        .map(|(index, scores)| FrameScores { index, scores })
        .collect();
    let sequence = FrameScoreSequence::new(frames, raw.stride.unwrap_or(default_stride))?;
    Ok(NamedSequence {
        id: raw.id,
        sequence,
    })
}

/// Result of a lenient frame-stream load.
#[derive(Debug, Default)]
pub struct FrameLoadOutcome {
    pub sequences: Vec<NamedSequence>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Read a frame score stream; same skip/fail-fast semantics as record
/// loading.
pub fn load_frame_sequences<R: BufRead>(
    source: R,
    default_stride: usize,
    fail_fast: bool,
) -> Result<FrameLoadOutcome, Error> {
    let mut outcome = FrameLoadOutcome::default();
    for (number, line) in source.lines().enumerate() {
        let line = line?;
        let number = number as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_frame_sequence(&line, default_stride) {
            Ok(sequence) => outcome.sequences.push(sequence),
            Err(err) => {
                if fail_fast {
                    return Err(Error::Line {
                        line: number,
                        message: err.to_string(),
                    });
                }
                outcome.diagnostics.push(Diagnostic {
                    line: number,
                    message: err.to_string(),
                });
            }
        }
    }
    Ok(outcome)
}
