//! Label taxonomies beyond the built-in seven emotions: declare classes,
//! route dataset-specific spellings through aliases, and mark labels the
//! classifier was never trained on as unseen.
//!
//! Run with `cargo run --example custom_taxonomy`.

use evifuse::datasetio::GroundTruth;
use evifuse::{Error, LabelTaxonomy};

fn main() -> Result<(), Error> {
    let config = "
        # Sentiment taxonomy for a three-way classifier.
        classes = negative, neutral, positive
        neutral = neutral

        # Dataset spellings that map onto canonical classes.
        alias.pos = positive
        alias.neg = negative
        alias.meh = neutral

        # Labels the classifier has no column for.
        alias.mixed = unseen
    ";
    let taxonomy = LabelTaxonomy::from_config(config)?;
    println!(
        "{} classes: {:?}, neutral = {:?}",
        taxonomy.k(),
        taxonomy.classes(),
        taxonomy.neutral_name()
    );

    for label in ["Positive", "neg", "MEH", "mixed", "sarcastic"] {
        let resolved = taxonomy.resolve(label);
        let shown = match &resolved {
            GroundTruth::Known(index) => format!("class {index} ({})", taxonomy.class_name(*index)),
            GroundTruth::Unseen(name) => format!("unseen ({name})"),
        };
        println!("  {label:10} -> {shown}");
    }

    // The default taxonomy ships the same machinery pre-configured.
    let default = LabelTaxonomy::default();
    println!(
        "\nbuilt-in: {:?} with e.g. \"happiness\" -> {:?}",
        default.classes(),
        default.resolve("happiness")
    );
    Ok(())
}
