//! Negative-logit mitigation changes answers. A record whose audio is
//! confidently angry (all-negative logits) but whose text reads cheerful
//! flips from "joy" to "anger" when evidence extraction preserves the
//! audio channel, and the conflict trace points at the contradiction.
//!
//! Run with `cargo run --example conflict_inspection`.

use std::collections::BTreeMap;

use evifuse::evidence::{extract_evidence, LogitVector};
use evifuse::fusion::fuse_record;
use evifuse::{Error, LogitRecord, Mitigation, Modality};

fn main() -> Result<(), Error> {
    let classes = ["anger", "joy", "neutral"];
    let record = LogitRecord::new(
        "irony",
        vec![
            LogitVector::new(Modality::Audio, vec![-1.0, -6.0, -6.0])?,
            LogitVector::new(Modality::Video, vec![0.5, -1.0, -1.0])?,
            LogitVector::new(Modality::Text, vec![0.0, 1.5, 0.0])?,
        ],
        Some("anger".into()),
        BTreeMap::new(),
    )?;

    for mode in [Mitigation::Basic, Mitigation::Advanced] {
        println!("--- {mode:?} ---");
        // Basic clips at zero, so the all-negative audio channel clips
        // to zero evidence and silently becomes vacuous. Advanced shifts
        // by the record's global minimum and keeps it.
        for (modality, vector) in extract_evidence(record.logits(), mode)? {
            println!("  {modality:5} evidence {:?}", vector.values());
        }
        let result = fuse_record(&record, mode)?;
        let predicted = result
            .probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| classes[i])
            .unwrap();
        println!(
            "  informative modalities {:?}",
            result
                .per_modality
                .iter()
                .map(|(m, _)| m.name())
                .collect::<Vec<_>>()
        );
        println!("  conflict trace {:?}", result.conflict_trace);
        println!(
            "  p = {:?}  ->  {predicted} (truth anger)\n",
            result
                .probabilities
                .iter()
                .map(|p| (p * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
    }

    // The advanced run keeps all three channels, and its high mean step
    // conflict is itself a useful signal: the modalities genuinely
    // disagree on this record.
    let advanced = fuse_record(&record, Mitigation::Advanced)?;
    let mean: f64 =
        advanced.conflict_trace.iter().sum::<f64>() / advanced.conflict_trace.len() as f64;
    println!("advanced mean step conflict {mean:.4} -- contradiction surfaced, not hidden");
    Ok(())
}
