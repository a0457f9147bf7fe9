//! Command-line front end for anonymization and evaluation.
//!
//! Exit codes: 0 success, 1 failure, 3 partial evaluation (some metrics were
//! skipped for missing inputs). The `VOICEANON_SEED` environment variable
//! overrides any `--seed` flag.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use voiceanon::embedding::{anonymize_embedding, DistanceSpec, EmbeddingPool, SourceEmbedding};
use voiceanon::error::{Error, Result};
use voiceanon::harness::{
    rank_systems, run_pipeline, EvalConfig, Manifest, PipelineStatus, SystemEntry,
};
use voiceanon::mcadams::{anonymize_corpus, AnonLevel, McAdamsConfig};
use voiceanon::metrics::{
    compute_det, compute_eer, corpus_wer, gain_vd, read_transcripts, segments_by_speaker,
    similarity_matrix, ScoreSet, TrialList, WordSequence,
};
use voiceanon::pitch::{dataset_rho_from_tracks, read_track_file, PitchConfig};

#[derive(Parser)]
#[command(name = "voiceanon", version, about = "Speech anonymization and privacy-utility evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anonymize a corpus of WAV files listed in a manifest.
    Anonymize(AnonymizeArgs),
    /// Anonymize speaker embeddings against a pool.
    AnonEmbed(AnonEmbedArgs),
    /// Compute evaluation metrics.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Rank system reports into evaluation conditions.
    Rank(RankArgs),
    /// Export a DET curve as CSV.
    DetExport(DetExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Speaker,
    Utterance,
}

#[derive(Args)]
struct AnonymizeArgs {
    /// 6-column TSV manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// One alpha per speaker or per utterance.
    #[arg(long, value_enum, default_value = "speaker")]
    level: LevelArg,
    /// Output directory for anonymized WAV files.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha_min: f64,
    #[arg(long, default_value_t = 0.9)]
    alpha_max: f64,
    #[arg(long, default_value_t = 20)]
    lpc_order: usize,
    /// Where to write the per-utterance alpha report (TSV).
    #[arg(long)]
    alpha_report: Option<PathBuf>,
}

#[derive(Args)]
struct AnonEmbedArgs {
    /// Pool embeddings, one `id<TAB>v1 v2 ...` line each.
    #[arg(long)]
    pool: PathBuf,
    /// Source embeddings to anonymize, same format.
    #[arg(long)]
    sources: PathBuf,
    /// Candidate count: the N farthest pool entries.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Random subset size averaged into the anonymized embedding.
    #[arg(long = "n-star", default_value_t = 100)]
    n_star: usize,
    /// Optional precomputed affinity scores (`source pool score` lines);
    /// cosine distance is used when absent.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output TSV of anonymized embeddings.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Equal error rate from a trial list and LLR scores.
    Eer {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        scores: PathBuf,
    },
    /// Word error rate from reference and hypothesis transcripts.
    Wer {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
    },
    /// Dataset pitch correlation from original and anonymized track files.
    Rho {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        anonymized: PathBuf,
    },
    /// Gain of voice distinctiveness from segment-level score files.
    Gvd {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        anonymized: PathBuf,
    },
    /// Run the full pipeline from a TOML config.
    All {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct RankArgs {
    /// Pipeline `results.csv` files; the file stem names the system.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Output CSV with per-condition rankings.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetExportArgs {
    #[arg(long)]
    trials: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// The `VOICEANON_SEED` environment variable wins over the CLI flag.
fn resolve_seed(cli_seed: u64) -> Result<u64> {
    match std::env::var("VOICEANON_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("VOICEANON_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(cli_seed),
    }
}

fn cmd_anonymize(args: &AnonymizeArgs) -> Result<PipelineStatus> {
    let manifest = Manifest::from_file(&args.manifest)?;
    let mut cfg = McAdamsConfig::new(resolve_seed(args.seed)?);
    cfg.alpha_min = args.alpha_min;
    cfg.alpha_max = args.alpha_max;
    cfg.lpc_order = args.lpc_order;
    let level = match args.level {
        LevelArg::Speaker => AnonLevel::SpeakerLevel,
        LevelArg::Utterance => AnonLevel::UtteranceLevel,
    };
    let report = anonymize_corpus(&manifest, level, &cfg, &args.out_dir)?;
    if let Some(path) = &args.alpha_report {
        std::fs::write(path, report.to_tsv()).map_err(|e| Error::io(path, e))?;
    }
    for (utt, msg) in &report.failures {
        eprintln!("failed: {utt}: {msg}");
    }
    println!(
        "anonymized {} of {} utterances",
        report.assignments.len() - report.failures.len(),
        report.assignments.len()
    );
    Ok(if report.failures.is_empty() {
        PipelineStatus::Full
    } else {
        PipelineStatus::Partial
    })
}

fn cmd_anon_embed(args: &AnonEmbedArgs) -> Result<()> {
    let pool = EmbeddingPool::from_file(&args.pool)?;
    let sources = EmbeddingPool::from_file(&args.sources)?;
    let dist = match &args.scores {
        Some(path) => DistanceSpec::precomputed_from_file(path)?,
        None => DistanceSpec::CosineDistance,
    };
    let seed = resolve_seed(args.seed)?;
    let mut out = String::new();
    for (id, vector) in &sources.entries {
        let source = SourceEmbedding {
            id: id.clone(),
            vector: vector.clone(),
        };
        let anon = anonymize_embedding(&source, &pool, &dist, args.n, args.n_star, seed, id)?;
        let values: Vec<String> = anon.iter().map(|v| format!("{v:.12}")).collect();
        out.push_str(&format!("{id}\t{}\n", values.join(" ")));
    }
    std::fs::write(&args.out, out).map_err(|e| Error::io(&args.out, e))?;
    Ok(())
}

fn cmd_eval(cmd: &EvalCommand) -> Result<PipelineStatus> {
    match cmd {
        EvalCommand::Eer { trials, scores } => {
            let trials = TrialList::from_file(trials)?;
            let scores = ScoreSet::from_file(scores)?;
            let det = compute_det(&scores, &trials)?;
            println!("EER%: {:.4}", 100.0 * compute_eer(&det));
        }
        EvalCommand::Wer { reference, hyp } => {
            let refs = read_transcripts(reference)?;
            let hyps = read_transcripts(hyp)?;
            let pairs: Vec<(WordSequence, WordSequence)> = refs
                .iter()
                .map(|(utt, text)| {
                    let h = hyps.get(utt).map(String::as_str).unwrap_or("");
                    (WordSequence::from_text(text), WordSequence::from_text(h))
                })
                .collect();
            let b = corpus_wer(&pairs)?;
            println!(
                "WER%: {:.4} (sub {}, del {}, ins {}, ref {})",
                100.0 * b.wer,
                b.n_sub,
                b.n_del,
                b.n_ins,
                b.n_ref
            );
        }
        EvalCommand::Rho {
            original,
            anonymized,
        } => {
            let orig = read_track_file(original)?;
            let anon = read_track_file(anonymized)?;
            let mut pairs = Vec::new();
            for (utt, o) in &orig {
                let a = anon.get(utt).ok_or_else(|| {
                    Error::Data(format!("no anonymized pitch track for utterance {utt}"))
                })?;
                pairs.push((o.clone(), a.clone()));
            }
            let rho = dataset_rho_from_tracks(&pairs, &PitchConfig::default())?;
            println!(
                "rho_F0: {:.4} ({} pairs, {} undefined)",
                rho.rho, rho.defined_pairs, rho.undefined_pairs
            );
        }
        EvalCommand::Gvd {
            original,
            anonymized,
        } => {
            let orig_scores = ScoreSet::from_file(original)?;
            let anon_scores = ScoreSet::from_file(anonymized)?;
            let orig_segs = segments_by_speaker(&orig_scores);
            let anon_segs = segments_by_speaker(&anon_scores);
            let speakers: Vec<String> = orig_segs.keys().cloned().collect();
            let m_orig = similarity_matrix(&orig_scores, &speakers, &orig_segs)?;
            let m_anon = similarity_matrix(&anon_scores, &speakers, &anon_segs)?;
            println!("G_VD_dB: {:.4}", gain_vd(&m_orig, &m_anon)?);
        }
        EvalCommand::All { config, out_dir } => {
            let cfg = EvalConfig::from_file(config)?;
            let (report, status) = run_pipeline(&cfg, out_dir)?;
            print!("{}", voiceanon::harness::results_summary(&report));
            return Ok(status);
        }
    }
    Ok(PipelineStatus::Full)
}

/// Read the `__summary__` row of a pipeline `results.csv`.
fn read_report_summary(path: &PathBuf) -> Result<SystemEntry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let system_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    for line in text.lines() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.first() != Some(&"__summary__") || cols.len() != 5 {
            continue;
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::Data(format!("{}: bad {what} in summary row: {s:?}", path.display()))
            })
        };
        let weighted_eer = parse(cols[1], "weighted EER")?;
        let avg_wer = parse(cols[2], "average WER")?;
        let rho_pass = cols[3] == "1";
        let condition = if cols[4].is_empty() {
            None
        } else {
            Some(parse(cols[4], "condition")? as u8)
        };
        return Ok(SystemEntry {
            system_id,
            weighted_eer,
            avg_wer,
            condition: condition.filter(|_| rho_pass),
        });
    }
    Err(Error::Data(format!(
        "{}: no __summary__ row (is this a pipeline results.csv?)",
        path.display()
    )))
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let mut entries = Vec::new();
    let mut seen = BTreeMap::new();
    for path in &args.reports {
        let entry = read_report_summary(path)?;
        if let Some(prev) = seen.insert(entry.system_id.clone(), path) {
            return Err(Error::InvalidArgument(format!(
                "system id {:?} appears twice ({} and {})",
                entry.system_id,
                prev.display(),
                path.display()
            )));
        }
        entries.push(entry);
    }
    let table = rank_systems(&entries);
    table.write_csv(&args.out)?;
    Ok(())
}

fn cmd_det_export(args: &DetExportArgs) -> Result<()> {
    let trials = TrialList::from_file(&args.trials)?;
    let scores = ScoreSet::from_file(&args.scores)?;
    let det = compute_det(&scores, &trials)?;
    det.write_csv(&args.out)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<PipelineStatus> {
    match &cli.command {
        Command::Anonymize(args) => cmd_anonymize(args),
        Command::AnonEmbed(args) => cmd_anon_embed(args).map(|_| PipelineStatus::Full),
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Rank(args) => cmd_rank(args).map(|_| PipelineStatus::Full),
        Command::DetExport(args) => cmd_det_export(args).map(|_| PipelineStatus::Full),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(PipelineStatus::Full) => ExitCode::SUCCESS,
        Ok(PipelineStatus::Partial) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
