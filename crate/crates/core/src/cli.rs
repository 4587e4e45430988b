//! The batch command-line surface: `fuse`, `evaluate`, `simulate`, and
//! `select-frame`.
//!
//! Every command is deterministic given its flags, inputs, and seed; two
//! runs produce byte-identical outputs, and `--workers` never changes any
//! output byte because per-record outputs are sorted by id before
//! writing. Exit codes: 0 success, 1 validation failure (only reachable
//! with `--fail-fast` or a broken environment), 2 usage error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::datasetio::{
    load_frame_sequences, load_records, write_records, write_report, Diagnostic, EvalReport,
    LabelTaxonomy, LogitRecord, ReportFormat,
};
use crate::error::Error;
use crate::evidence::{Mitigation, Modality};
use crate::frameselect::{select_best_frame, DEFAULT_STRIDE};
use crate::fusion::{fuse_record_ordered, FusionResult};
use crate::metrics::{
    accuracy_neutral_tolerant, accuracy_standard, confusion, fallback_rate, unseen_labels,
    Prediction, TruthMap, UnseenPolicy,
};
use crate::simulate::{ModalityProfile, Simulation};

#[derive(Parser)]
#[command(
    name = "evifuse",
    version,
    about = "Uncertainty-aware multimodal fusion over pre-computed classifier logits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse per-modality logits into class probabilities, one JSON line per record
    Fuse(FuseArgs),
    /// Fuse a labeled stream and report accuracy metrics
    Evaluate(EvaluateArgs),
    /// Generate a synthetic logit stream
    Simulate(SimulateArgs),
    /// Pick the best frame of each scored frame sequence
    SelectFrame(SelectFrameArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input path, or - for stdin
    #[arg(long = "in", value_name = "PATH", default_value = "-")]
    input: String,
    /// Output path, or - for stdout
    #[arg(long = "out", value_name = "PATH", default_value = "-")]
    output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Basic,
    Advanced,
}

impl From<ModeArg> for Mitigation {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Basic => Mitigation::Basic,
            ModeArg::Advanced => Mitigation::Advanced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalModeArg {
    Basic,
    Advanced,
    /// Run both mitigations and report their delta
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Tabular,
    Structured,
}

impl From<FormatArg> for ReportFormat {
    fn from(format: FormatArg) -> Self {
        match format {
            FormatArg::Tabular => ReportFormat::Tabular,
            FormatArg::Structured => ReportFormat::Structured,
        }
    }
}

#[derive(Debug, Clone)]
struct FusionOrder(Vec<Modality>);

fn parse_order(raw: &str) -> Result<FusionOrder, String> {
    let mut order = Vec::new();
    for part in raw.split(',') {
        let modality: Modality = part
            .trim()
            .parse()
            .map_err(|err: Error| err.to_string())?;
        if order.contains(&modality) {
            return Err(format!("modality {modality} listed twice"));
        }
        order.push(modality);
    }
    Ok(FusionOrder(order))
}

#[derive(Args)]
struct FuseArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Evidence mitigation mode
    #[arg(long, value_enum, default_value_t = ModeArg::Advanced)]
    mode: ModeArg,
    /// Fusion order as a comma-separated modality list (e.g. audio,text);
    /// present modalities not listed follow in canonical order
    #[arg(long, value_parser = parse_order, value_name = "LIST")]
    order: Option<FusionOrder>,
    /// Taxonomy config path; defaults to the built-in seven-class set
    #[arg(long, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    /// Abort on the first malformed line or failed record
    #[arg(long)]
    fail_fast: bool,
    /// Worker threads for record processing
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    workers: u32,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Evidence mitigation mode, or compare to run both
    #[arg(long, value_enum, default_value_t = EvalModeArg::Advanced)]
    mode: EvalModeArg,
    /// Fusion order (affects only the conflict trace statistics)
    #[arg(long, value_parser = parse_order, value_name = "LIST")]
    order: Option<FusionOrder>,
    /// Taxonomy config path; defaults to the built-in seven-class set
    #[arg(long, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    /// Abort on the first malformed line or failed record
    #[arg(long)]
    fail_fast: bool,
    /// Worker threads for record processing
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    workers: u32,
    /// Report encoding
    #[arg(long, value_enum, default_value_t = FormatArg::Tabular)]
    format: FormatArg,
    /// Drop unseen-truth records from accuracy denominators instead of
    /// counting them as wrong
    #[arg(long)]
    exclude_unseen: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Audio,
    Video,
    Text,
}

fn parse_knob(raw: &str) -> Result<(ChannelArg, f64), String> {
    let (channel, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected MODALITY=VALUE, got {raw:?}"))?;
    let channel = ChannelArg::from_str(channel.trim(), true)?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|err| format!("bad value in {raw:?}: {err}"))?;
    Ok((channel, value))
}

#[derive(Args)]
struct SimulateArgs {
    /// Output path, or - for stdout
    #[arg(long = "out", value_name = "PATH", default_value = "-")]
    output: String,
    /// RNG seed; the stream is byte-deterministic per seed
    #[arg(long)]
    seed: u64,
    /// Number of records to generate
    #[arg(long, default_value_t = 100)]
    count: u64,
    /// Taxonomy config path; defaults to the built-in seven-class set
    #[arg(long, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    /// Per-modality dropout probability (repeatable), e.g. --dropout text=0.5
    #[arg(long, value_parser = parse_knob, value_name = "MODALITY=RATE")]
    dropout: Vec<(ChannelArg, f64)>,
    /// Per-modality boost multiplier (repeatable), e.g. --reliability audio=0.2
    #[arg(long, value_parser = parse_knob, value_name = "MODALITY=FACTOR")]
    reliability: Vec<(ChannelArg, f64)>,
    /// Probability that text argues for neutral instead of the truth
    #[arg(long, default_value_t = 0.0)]
    disagreement: f64,
    /// Probability that a record's truth is the unseen label
    #[arg(long, default_value_t = 0.0)]
    unseen_rate: f64,
    /// Truth label used for unseen records
    #[arg(long, default_value = "contempt")]
    unseen_label: String,
    /// Location shift on the argued class's logit
    #[arg(long, default_value_t = 3.0)]
    boost: f64,
    /// Standard deviation of the logit noise
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
}

#[derive(Args)]
struct SelectFrameArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Subsampling stride T; kept frames are positions 0, T, 2T, ...
    /// (sequences may override it per line)
    #[arg(long, default_value_t = DEFAULT_STRIDE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    stride: u64,
    /// Abort on the first malformed or unselectable sequence
    #[arg(long)]
    fail_fast: bool,
}

/// Parse the process arguments and run. Clap itself exits with status 2
/// on usage errors.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Fuse(args) => cmd_fuse(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::SelectFrame(args) => cmd_select_frame(args),
    }
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>, Error> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let file = File::open(path).map_err(|err| Error::Config {
            reason: format!("cannot open {path}: {err}"),
        })?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn open_output(path: &str) -> Result<Box<dyn Write>, Error> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        let file = File::create(path).map_err(|err| Error::Config {
            reason: format!("cannot create {path}: {err}"),
        })?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn load_taxonomy(path: Option<&Path>) -> Result<LabelTaxonomy, Error> {
    match path {
        None => Ok(LabelTaxonomy::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|err| Error::Config {
                reason: format!("cannot read {}: {err}", path.display()),
            })?;
            LabelTaxonomy::from_config(&text)
        }
    }
}

fn report_diagnostics(diagnostics: &[Diagnostic]) {
    for diagnostic in diagnostics {
        eprintln!("{diagnostic}");
    }
}

/// Fan records out over a worker pool and collect per-record results
/// keyed by id. Failed records become stderr diagnostics (or abort the
/// run under fail-fast); the survivors come back sorted by id so worker
/// scheduling can never influence output bytes.
fn process_records<T, F>(
    records: &[LogitRecord],
    workers: u32,
    fail_fast: bool,
    process: F,
) -> Result<Vec<(String, T)>, Error>
where
    T: Send,
    F: Fn(&LogitRecord) -> Result<T, Error> + Sync,
{
    let mapped: Vec<(String, Result<T, Error>)> = if workers <= 1 {
        records
            .iter()
            .map(|record| (record.id().to_string(), process(record)))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers as usize)
            .build()
            .map_err(|err| Error::Config {
                reason: format!("cannot build worker pool: {err}"),
            })?;
        pool.install(|| {
            records
                .par_iter()
                .map(|record| (record.id().to_string(), process(record)))
                .collect()
        })
    };

    let mut results = Vec::with_capacity(mapped.len());
    for (id, outcome) in mapped {
        match outcome {
            Ok(value) => results.push((id, value)),
            Err(err) => {
                if fail_fast {
                    return Err(Error::Record {
                        reason: format!("{id}: {err}"),
                    });
                }
                eprintln!("record {id}: {err}");
            }
        }
    }
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(results)
}

#[derive(Serialize)]
struct FuseLine<'a> {
    id: &'a str,
    probabilities: &'a [f64],
    predicted: &'a str,
    uncertainty: f64,
    conflict_trace: &'a [f64],
}

fn cmd_fuse(args: FuseArgs) -> Result<(), Error> {
    let taxonomy = load_taxonomy(args.taxonomy.as_deref())?;
    let order = args.order.map(|o| o.0).unwrap_or_default();
    let mode: Mitigation = args.mode.into();

    let outcome = load_records(open_input(&args.io.input)?, &taxonomy, args.fail_fast)?;
    report_diagnostics(&outcome.diagnostics);

    let lines = process_records(&outcome.records, args.workers, args.fail_fast, |record| {
        let result = fuse_record_ordered(record, mode, &order)?;
        let prediction = Prediction::from_result(record.id(), &result);
        let line = FuseLine {
            id: record.id(),
            probabilities: &result.probabilities,
            predicted: taxonomy.class_name(prediction.predicted_index),
            uncertainty: prediction.uncertainty,
            conflict_trace: &result.conflict_trace,
        };
        Ok(serde_json::to_string(&line)?)
    })?;

    let mut sink = open_output(&args.io.output)?;
    for (_, line) in &lines {
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}

/// Fuse every labeled record under one mitigation mode and aggregate the
/// metrics into a report.
fn evaluate_records(
    records: &[LogitRecord],
    taxonomy: &LabelTaxonomy,
    mode: Mitigation,
    order: &[Modality],
    policy: UnseenPolicy,
    workers: u32,
    fail_fast: bool,
) -> Result<EvalReport, Error> {
    let fused: Vec<(String, FusionResult)> =
        process_records(records, workers, fail_fast, |record| {
            fuse_record_ordered(record, mode, order)
        })?;
    if fused.is_empty() {
        return Ok(EvalReport::empty(taxonomy));
    }

    let by_id: BTreeMap<&str, &LogitRecord> =
        records.iter().map(|record| (record.id(), record)).collect();
    let mut predictions = Vec::with_capacity(fused.len());
    let mut truths = TruthMap::new();
    let mut conflict_sum = 0.0;
    let mut conflict_steps = 0u64;
    for (id, result) in &fused {
        predictions.push(Prediction::from_result(id.clone(), result));
        let record = by_id[id.as_str()];
        let truth = record
            .resolved_truth(taxonomy)
            .expect("evaluate only sees labeled records");
        truths.insert(id.clone(), truth);
        conflict_sum += result.conflict_trace.iter().sum::<f64>();
        conflict_steps += result.conflict_trace.len() as u64;
    }

    let standard = accuracy_standard(&predictions, &truths, taxonomy, policy)?;
    let tolerant = accuracy_neutral_tolerant(&predictions, &truths, taxonomy, policy)?;
    let matrix = confusion(&predictions, &truths, taxonomy)?;

    // The accuracies must equal the ratios recomputed from the confusion
    // counts; a mismatch is an internal bug, not bad input.
    assert_eq!(
        standard,
        matrix.accuracy_standard(policy),
        "standard accuracy disagrees with the confusion matrix"
    );
    assert_eq!(
        tolerant,
        matrix.accuracy_neutral_tolerant(taxonomy.neutral_index(), policy),
        "neutral-tolerant accuracy disagrees with the confusion matrix"
    );

    let mut fallback_rates = BTreeMap::new();
    for label in unseen_labels(&truths) {
        let rate = fallback_rate(&predictions, &truths, taxonomy, &label)?;
        fallback_rates.insert(label, rate);
    }

    Ok(EvalReport {
        n_records: fused.len() as u64,
        accuracy_standard: standard,
        accuracy_neutral_tolerant: tolerant,
        per_step_mean_conflict: if conflict_steps == 0 {
            0.0
        } else {
            conflict_sum / conflict_steps as f64
        },
        fallback_rates,
        confusion: matrix,
    })
}

#[derive(Serialize)]
struct DeltaDoc {
    accuracy_standard: f64,
    accuracy_neutral_tolerant: f64,
    per_step_mean_conflict: f64,
}

#[derive(Serialize)]
struct CompareDoc {
    basic: EvalReport,
    advanced: EvalReport,
    delta: DeltaDoc,
}

fn write_compare<W: Write>(
    basic: &EvalReport,
    advanced: &EvalReport,
    mut sink: W,
    format: ReportFormat,
) -> Result<(), Error> {
    let delta = DeltaDoc {
        accuracy_standard: advanced.accuracy_standard - basic.accuracy_standard,
        accuracy_neutral_tolerant: advanced.accuracy_neutral_tolerant
            - basic.accuracy_neutral_tolerant,
        per_step_mean_conflict: advanced.per_step_mean_conflict - basic.per_step_mean_conflict,
    };
    match format {
        ReportFormat::Structured => {
            let doc = CompareDoc {
                basic: basic.clone(),
                advanced: advanced.clone(),
                delta,
            };
            serde_json::to_writer_pretty(&mut sink, &doc)?;
            sink.write_all(b"\n")?;
        }
        ReportFormat::Tabular => {
            writeln!(sink, "== basic ==")?;
            write_report(basic, &mut sink, format)?;
            writeln!(sink)?;
            writeln!(sink, "== advanced ==")?;
            write_report(advanced, &mut sink, format)?;
            writeln!(sink)?;
            writeln!(sink, "== delta (advanced - basic) ==")?;
            writeln!(sink, "accuracy (standard)          {:+.6}", delta.accuracy_standard)?;
            writeln!(
                sink,
                "accuracy (neutral-tolerant)  {:+.6}",
                delta.accuracy_neutral_tolerant
            )?;
            writeln!(
                sink,
                "mean conflict per step       {:+.6}",
                delta.per_step_mean_conflict
            )?;
        }
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let taxonomy = load_taxonomy(args.taxonomy.as_deref())?;
    let order = args.order.map(|o| o.0).unwrap_or_default();
    let policy = if args.exclude_unseen {
        UnseenPolicy::Exclude
    } else {
        UnseenPolicy::CountAsWrong
    };

    let outcome = load_records(open_input(&args.io.input)?, &taxonomy, args.fail_fast)?;
    report_diagnostics(&outcome.diagnostics);

    let mut labeled = Vec::with_capacity(outcome.records.len());
    for record in outcome.records {
        if record.label().is_none() {
            if args.fail_fast {
                return Err(Error::Record {
                    reason: format!("{}: missing ground truth", record.id()),
                });
            }
            eprintln!("record {}: missing ground truth", record.id());
            continue;
        }
        labeled.push(record);
    }

    let mut sink = open_output(&args.io.output)?;
    match args.mode {
        EvalModeArg::Basic | EvalModeArg::Advanced => {
            let mode = if args.mode == EvalModeArg::Basic {
                Mitigation::Basic
            } else {
                Mitigation::Advanced
            };
            let report = evaluate_records(
                &labeled,
                &taxonomy,
                mode,
                &order,
                policy,
                args.workers,
                args.fail_fast,
            )?;
            write_report(&report, &mut sink, args.format.into())?;
        }
        EvalModeArg::Compare => {
            let basic = evaluate_records(
                &labeled,
                &taxonomy,
                Mitigation::Basic,
                &order,
                policy,
                args.workers,
                args.fail_fast,
            )?;
            let advanced = evaluate_records(
                &labeled,
                &taxonomy,
                Mitigation::Advanced,
                &order,
                policy,
                args.workers,
                args.fail_fast,
            )?;
            write_compare(&basic, &advanced, &mut sink, args.format.into())?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let taxonomy = load_taxonomy(args.taxonomy.as_deref())?;
    let mut simulation = Simulation::new(args.count, args.seed);
    simulation.disagreement = args.disagreement;
    simulation.unseen_rate = args.unseen_rate;
    simulation.unseen_label = args.unseen_label;
    simulation.boost = args.boost;
    simulation.noise = args.noise;
    for (channel, rate) in args.dropout {
        profile_mut(&mut simulation, channel).dropout = rate;
    }
    for (channel, factor) in args.reliability {
        profile_mut(&mut simulation, channel).reliability = factor;
    }

    let records = simulation.generate(&taxonomy)?;
    let mut sink = open_output(&args.output)?;
    write_records(&records, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn profile_mut(simulation: &mut Simulation, channel: ChannelArg) -> &mut ModalityProfile {
    match channel {
        ChannelArg::Audio => &mut simulation.audio,
        ChannelArg::Video => &mut simulation.video,
        ChannelArg::Text => &mut simulation.text,
    }
}

#[derive(Serialize)]
struct FrameLine<'a> {
    id: &'a str,
    frame_index: u64,
    saliency: f64,
}

#[derive(Serialize)]
struct FrameErrorLine<'a> {
    id: &'a str,
    error: String,
}

fn cmd_select_frame(args: SelectFrameArgs) -> Result<(), Error> {
    let outcome = load_frame_sequences(
        open_input(&args.io.input)?,
        args.stride as usize,
        args.fail_fast,
    )?;
    report_diagnostics(&outcome.diagnostics);

    let mut lines: Vec<(String, String)> = Vec::with_capacity(outcome.sequences.len());
    for named in &outcome.sequences {
        let frames = named.sequence.frames().len();
        let stride = named.sequence.stride();
        // A stride exceeding the sequence length is a degenerate
        // configuration: flag it instead of silently returning frame 0.
        let selected = if frames > 0 && stride > frames {
            Err(Error::InvalidFrames {
                reason: format!("stride {stride} exceeds sequence length {frames}"),
            })
        } else {
            select_best_frame(&named.sequence)
        };
        let line = match selected {
            Ok(best) => serde_json::to_string(&FrameLine {
                id: &named.id,
                frame_index: best.frame_index,
                saliency: best.score,
            })?,
            Err(err) => {
                if args.fail_fast {
                    return Err(Error::Record {
                        reason: format!("{}: {err}", named.id),
                    });
                }
                serde_json::to_string(&FrameErrorLine {
                    id: &named.id,
                    error: err.to_string(),
                })?
            }
        };
        lines.push((named.id.clone(), line));
    }
    lines.sort_by(|a, b| a.0.cmp(&b.0));

    let mut sink = open_output(&args.io.output)?;
    for (_, line) in &lines {
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}
