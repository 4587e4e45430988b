//! The whole harness as library calls: synthesize a labeled stream,
//! round-trip it through the line format, fuse every record, and
//! aggregate an evaluation report.
//!
//! Run with `cargo run --example batch_pipeline`.

use evifuse::datasetio::{load_records, write_records, write_report, ReportFormat};
use evifuse::fusion::fuse_record;
use evifuse::metrics::{
    accuracy_neutral_tolerant, accuracy_standard, confusion, fallback_rate, unseen_labels,
    Prediction, TruthMap, UnseenPolicy,
};
use evifuse::simulate::Simulation;
use evifuse::{Error, EvalReport, LabelTaxonomy, Mitigation};

fn main() -> Result<(), Error> {
    let taxonomy = LabelTaxonomy::default();

    // A noisy stream: flaky text channel, occasional unseen labels.
    let mut simulation = Simulation::new(200, 7);
    simulation.noise = 2.0;
    simulation.text.dropout = 0.3;
    simulation.disagreement = 0.2;
    simulation.unseen_rate = 0.1;
    let records = simulation.generate(&taxonomy)?;

    // Through the wire format and back, just to show nothing is lost.
    let mut buffer = Vec::new();
    write_records(&records, &mut buffer)?;
    let outcome = load_records(buffer.as_slice(), &taxonomy, true)?;
    assert_eq!(outcome.records, records);

    let mut predictions = Vec::new();
    let mut truths = TruthMap::new();
    let mut conflict_sum = 0.0;
    let mut conflict_steps = 0u64;
    for record in &outcome.records {
        let result = fuse_record(record, Mitigation::Advanced)?;
        conflict_sum += result.conflict_trace.iter().sum::<f64>();
        conflict_steps += result.conflict_trace.len() as u64;
        predictions.push(Prediction::from_result(record.id(), &result));
        truths.insert(
            record.id().to_string(),
            record.resolved_truth(&taxonomy).expect("simulated records are labeled"),
        );
    }

    let policy = UnseenPolicy::CountAsWrong;
    let mut fallback_rates = std::collections::BTreeMap::new();
    for label in unseen_labels(&truths) {
        fallback_rates.insert(
            label.clone(),
            fallback_rate(&predictions, &truths, &taxonomy, &label)?,
        );
    }
    let report = EvalReport {
        n_records: predictions.len() as u64,
        accuracy_standard: accuracy_standard(&predictions, &truths, &taxonomy, policy)?,
        accuracy_neutral_tolerant: accuracy_neutral_tolerant(
            &predictions,
            &truths,
            &taxonomy,
            policy,
        )?,
        per_step_mean_conflict: conflict_sum / conflict_steps as f64,
        fallback_rates,
        confusion: confusion(&predictions, &truths, &taxonomy)?,
    };

    write_report(&report, std::io::stdout().lock(), ReportFormat::Tabular)?;
    Ok(())
}
