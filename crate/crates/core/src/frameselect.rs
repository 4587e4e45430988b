//! Best-frame selection for video sequences scored frame by frame.
//!
//! Long clips are subsampled by a stride before fusion: only every T-th
//! scored frame (by position in the sequence, not by frame index) is kept,
//! and the survivor with the highest per-class peak score wins. Ties go to
//! the earliest frame so selection is deterministic.

use crate::error::Error;

/// Default subsampling stride.
pub const DEFAULT_STRIDE: usize = 5;

/// Per-class scores for one frame of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores {
    /// Position of the frame in the source video.
    pub index: u64,
    /// Classifier scores for the frame, one per class.
    pub scores: Vec<f64>,
}

/// A validated, stride-annotated sequence of scored frames.
///
/// Frame indices must be strictly increasing, every frame must carry the
/// same non-zero number of finite scores, and the stride must be at least
/// one. Construction through [`FrameScoreSequence::new`] enforces all of
/// this so selection itself cannot fail on malformed data.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScoreSequence {
    frames: Vec<FrameScores>,
    stride: usize,
}

/// The winning frame and the score that won it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestFrame {
    pub frame_index: u64,
    pub score: f64,
}

impl FrameScoreSequence {
    pub fn new(frames: Vec<FrameScores>, stride: usize) -> Result<Self, Error> {
        if stride == 0 {
            return Err(Error::InvalidFrames {
                reason: "stride must be at least 1".into(),
            });
        }
        let mut width = None;
        let mut previous_index = None;
        for frame in &frames {
            if let Some(prev) = previous_index {
                if frame.index <= prev {
                    return Err(Error::InvalidFrames {
                        reason: format!(
                            "frame indices must be strictly increasing ({} after {})",
                            frame.index, prev
                        ),
                    });
                }
            }
            previous_index = Some(frame.index);

            match width {
                None => {
                    if frame.scores.is_empty() {
                        return Err(Error::InvalidFrames {
                            reason: format!("frame {} has no scores", frame.index),
                        });
                    }
                    width = Some(frame.scores.len());
                }
                Some(w) if frame.scores.len() != w => {
                    return Err(Error::InvalidFrames {
                        reason: format!(
                            "frame {} has {} scores, expected {}",
                            frame.index,
                            frame.scores.len(),
                            w
                        ),
                    });
                }
                Some(_) => {}
            }
            if frame.scores.iter().any(|s| !s.is_finite()) {
                return Err(Error::InvalidFrames {
                    reason: format!("frame {} has a non-finite score", frame.index),
                });
            }
        }
        Ok(Self { frames, stride })
    }

    pub fn with_default_stride(frames: Vec<FrameScores>) -> Result<Self, Error> {
        Self::new(frames, DEFAULT_STRIDE)
    }

    pub fn frames(&self) -> &[FrameScores] {
        &self.frames
    }

    pub fn stride(&self) -> usize {
        self.stride
    }
}

/// Pick the best frame of a sequence.
///
/// Keeps the frames at positions `0, T, 2T, ...` (T = stride), scores each
/// survivor by its maximum per-class score, and returns the survivor with
/// the highest such score. On an exact score tie the frame with the lower
/// index wins. The first frame always survives subsampling, so the only
/// failure mode is an empty sequence.
pub fn select_best_frame(sequence: &FrameScoreSequence) -> Result<BestFrame, Error> {
    let mut best: Option<BestFrame> = None;
    for frame in sequence.frames().iter().step_by(sequence.stride()) {
        let peak = frame.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Strictly-greater keeps the earlier frame on ties; indices are
        // strictly increasing so "earlier" is "lower index".
        if best.is_none_or(|b| peak > b.score) {
            best = Some(BestFrame {
                frame_index: frame.index,
                score: peak,
            });
        }
    }
    best.ok_or(Error::NoCandidateFrames)
}
