//! Picking the most salient frame of a scored sequence: stride
//! subsampling, the max-score rule, and the deterministic tie-break.
//!
//! Run with `cargo run --example frame_selection`.

use evifuse::frameselect::{select_best_frame, FrameScoreSequence, FrameScores, DEFAULT_STRIDE};
use evifuse::Error;

fn frame(index: u64, scores: &[f64]) -> FrameScores {
    FrameScores {
        index,
        scores: scores.to_vec(),
    }
}

fn main() -> Result<(), Error> {
    // Pre-strided input: every frame is a candidate.
    let sequence = FrameScoreSequence::new(
        vec![
            frame(0, &[0.1, 0.9]),
            frame(5, &[0.2, 0.3]),
            frame(10, &[0.95, 0.1]),
        ],
        1,
    )?;
    let best = select_best_frame(&sequence)?;
    println!(
        "stride 1: best frame {} with saliency {}",
        best.frame_index, best.score
    );

    // With the default stride only ordinal positions 0, 5, 10, ... are
    // candidates; a louder frame in between is deliberately skipped.
    let frames: Vec<FrameScores> = (0..30)
        .map(|i| {
            let score = if i == 7 { 5.0 } else { 0.1 + (i as f64) * 0.01 };
            frame(i, &[score])
        })
        .collect();
    let strided = FrameScoreSequence::new(frames, DEFAULT_STRIDE)?;
    let best = select_best_frame(&strided)?;
    println!(
        "stride {DEFAULT_STRIDE}: best frame {} with saliency {} (the 5.0 peak at frame 7 is not a candidate)",
        best.frame_index, best.score
    );

    // Exact ties go to the lower frame index, so reruns always agree.
    let tied = FrameScoreSequence::new(
        vec![frame(3, &[0.6, 0.2]), frame(9, &[0.1, 0.6])],
        1,
    )?;
    let best = select_best_frame(&tied)?;
    println!("tie: best frame {} (earlier index wins)", best.frame_index);
    Ok(())
}
