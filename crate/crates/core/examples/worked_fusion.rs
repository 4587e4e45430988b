//! Stage-by-stage walk through fusing one two-modality record: logits
//! become evidence, evidence a Dirichlet, the Dirichlet an opinion, and
//! two opinions one fused prediction.
//!
//! Run with `cargo run --example worked_fusion`.

use std::collections::BTreeMap;

use evifuse::evidence::{
    advanced_evidence, dirichlet_to_opinion, evidence_to_dirichlet, LogitVector,
};
use evifuse::fusion::{ds_combine, fuse_record, opinion_to_probabilities};
use evifuse::{Error, LogitRecord, Mitigation, Modality};

fn main() -> Result<(), Error> {
    let record = LogitRecord::new(
        "worked",
        vec![
            LogitVector::new(Modality::Audio, vec![2.0, 0.5, -1.0])?,
            LogitVector::new(Modality::Video, vec![1.0, 0.0, 1.0])?,
        ],
        None,
        BTreeMap::new(),
    )?;
    println!("record {:?}", record.id());
    for (modality, logits) in record.logits() {
        println!("  {modality:5} logits   {:?}", logits.values());
    }

    // Advanced mitigation shifts every modality by the global minimum
    // logit (-1.0 here), so evidence is non-negative and the audio
    // channel's confident negatives survive.
    let evidence = advanced_evidence(record.logits())?;
    println!("\nevidence (advanced: shift by global min)");
    let mut opinions = Vec::new();
    for (modality, vector) in &evidence {
        let dirichlet = evidence_to_dirichlet(vector);
        let opinion = dirichlet_to_opinion(&dirichlet);
        println!(
            "  {modality:5} evidence {:?}  alpha {:?}  S {}",
            vector.values(),
            dirichlet.alpha(),
            dirichlet.strength()
        );
        println!(
            "        beliefs {:?}  uncertainty {:.6}",
            opinion.beliefs(),
            opinion.uncertainty()
        );
        opinions.push(opinion);
    }

    let (fused, conflict) = ds_combine(&opinions[0], &opinions[1])?;
    println!("\ncombination conflict c = {conflict:.6}");
    println!(
        "fused beliefs {:?}  uncertainty {:.6}",
        fused.beliefs(),
        fused.uncertainty()
    );

    let (dirichlet, probabilities) = opinion_to_probabilities(&fused)?;
    println!(
        "fused alpha {:?}  probabilities {probabilities:?}",
        dirichlet.alpha()
    );

    // The one-call path gives the same numbers.
    let result = fuse_record(&record, Mitigation::Advanced)?;
    assert_eq!(result.probabilities, probabilities);
    println!("\nfuse_record agrees: p = {:?}", result.probabilities);
    Ok(())
}
