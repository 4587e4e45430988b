//! A missing modality and an explicitly vacuous one are the same thing:
//! combining with a vacuous opinion is a bit-exact identity, and a record
//! with no informative modality at all falls back to uniform
//! probabilities.
//!
//! Run with `cargo run --example missing_modality`.

use evifuse::evidence::{evidence_to_opinion, EvidenceVector};
use evifuse::fusion::fuse_sequence;
use evifuse::{Error, Modality, Opinion};

fn main() -> Result<(), Error> {
    let audio = evidence_to_opinion(&EvidenceVector::new(vec![3.0, 1.5, 0.0])?);
    let video = evidence_to_opinion(&EvidenceVector::new(vec![2.0, 1.0, 2.0])?);

    // Fuse the two present modalities.
    let present = vec![
        (Modality::Audio, audio.clone()),
        (Modality::Video, video.clone()),
    ];
    let direct = fuse_sequence(&present)?;

    // Same record, but text is carried along as an explicit vacuous
    // opinion (all belief on the whole frame).
    let padded = vec![
        (Modality::Audio, audio),
        (Modality::Video, video),
        (Modality::Text, Opinion::vacuous(3)),
    ];
    let explicit = fuse_sequence(&padded)?;

    println!("present-only  p = {:?}", direct.probabilities);
    println!("with vacuous  p = {:?}", explicit.probabilities);
    let identical = direct
        .probabilities
        .iter()
        .zip(&explicit.probabilities)
        .all(|(a, b)| a.to_bits() == b.to_bits())
        && direct.fused == explicit.fused;
    println!("bit-identical: {identical}");
    assert!(identical);

    // Nothing informative at all: the fused opinion is vacuous and the
    // probabilities are uniform.
    let nothing = vec![
        (Modality::Audio, Opinion::vacuous(3)),
        (Modality::Text, Opinion::vacuous(3)),
    ];
    let fallback = fuse_sequence(&nothing)?;
    println!(
        "all vacuous   p = {:?}  uncertainty = {}",
        fallback.probabilities,
        fallback.fused.uncertainty()
    );
    assert!(fallback.fused.is_vacuous());
    Ok(())
}
