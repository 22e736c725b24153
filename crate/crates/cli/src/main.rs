//! `argclust`: deterministic experiment runner for argument similarity and
//! clustering.

mod commands;
mod config;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use argclust::evaluation::Setup;
use config::Options;
use output::{json_document, Artifacts, Meta};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

/// Bad flags or a missing required option.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser, Debug)]
#[command(name = "argclust", version, about = "Argument similarity, clustering and evaluation toolkit")]
struct Cli {
    /// TOML file with option defaults; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving <command>.json, <command>.txt and extra artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the text report on stdout
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Consolidate raw votes into gold labels with MACE (needs --out)
    Consolidate(Args),
    /// Krippendorff's alpha with binary and weighted label distances
    Agreement(Args),
    /// Split-half estimate of human performance
    HumanPerformance(Args),
    /// Cross-topic evaluation of thresholded pair similarities
    EvalPairs(Args),
    /// Cross-topic evaluation of cluster-induced pair labels
    EvalClustering(Args),
    /// Tune both thresholds on the selected topics
    Tune(Args),
    /// Cluster the sentences of each selected topic
    Cluster(Args),
    /// Per-topic correlation with graded similarity scores
    Correlations(Args),
    /// Transitivity violations among gold labels
    Transitivity(Args),
    /// F scores against the number of training topics
    LearningCurve(Args),
    /// Stance classification scores averaged over topics and seeds
    EvalClassification(Args),
    /// Check input files and report their sizes
    Validate(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    #[command(flatten)]
    options: Options,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Consolidate(_) => "consolidate",
            Command::Agreement(_) => "agreement",
            Command::HumanPerformance(_) => "human-performance",
            Command::EvalPairs(_) => "eval-pairs",
            Command::EvalClustering(_) => "eval-clustering",
            Command::Tune(_) => "tune",
            Command::Cluster(_) => "cluster",
            Command::Correlations(_) => "correlations",
            Command::Transitivity(_) => "transitivity",
            Command::LearningCurve(_) => "learning-curve",
            Command::EvalClassification(_) => "eval-classification",
            Command::Validate(_) => "validate",
        }
    }

    fn options(&self) -> &Options {
        match self {
            Command::Consolidate(a)
            | Command::Agreement(a)
            | Command::HumanPerformance(a)
            | Command::EvalPairs(a)
            | Command::EvalClustering(a)
            | Command::Tune(a)
            | Command::Cluster(a)
            | Command::Correlations(a)
            | Command::Transitivity(a)
            | Command::LearningCurve(a)
            | Command::EvalClassification(a)
            | Command::Validate(a) => &a.options,
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(p) => Options::from_file(p).map_err(|e| UsageError(format!("{e:#}")))?,
        None => Options::default(),
    };
    let mut opts = file.overlay(cli.command.options())?;

    if let Some(jobs) = opts.jobs {
        if jobs == 0 {
            return Err(UsageError("--jobs must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker threads")?;
    }

    if matches!(cli.command, Command::Consolidate(_)) && cli.out.is_none() {
        return Err(UsageError("consolidate writes gold.tsv and competence.tsv and needs --out".into()).into());
    }

    let outcome = match &cli.command {
        Command::Consolidate(_) => commands::consolidate(&mut opts),
        Command::Agreement(_) => commands::agreement(&mut opts),
        Command::HumanPerformance(_) => commands::human_performance(&mut opts),
        Command::EvalPairs(_) => commands::eval_setup(&mut opts, Setup::WithoutClustering),
        Command::EvalClustering(_) => commands::eval_setup(&mut opts, Setup::WithClustering),
        Command::Tune(_) => commands::tune(&mut opts),
        Command::Cluster(_) => commands::cluster(&mut opts),
        Command::Correlations(_) => commands::correlations(&mut opts),
        Command::Transitivity(_) => commands::transitivity(&mut opts),
        Command::LearningCurve(_) => commands::learning_curve_cmd(&mut opts),
        Command::EvalClassification(_) => commands::eval_classification(&mut opts),
        Command::Validate(_) => commands::validate(&mut opts),
    }?;

    let meta = Meta::new(name, &opts);
    let text = meta.header() + &outcome.text;
    if let Some(dir) = &cli.out {
        let mut artifacts = Artifacts::default();
        artifacts.add(format!("{name}.json"), json_document(&meta, &outcome.result)?);
        artifacts.add(format!("{name}.txt"), text.clone());
        for (file, content) in outcome.files {
            artifacts.add(file, content);
        }
        artifacts.commit(dir)?;
    }
    if !cli.quiet {
        print!("{text}");
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error, command: Option<&Command>) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    let validating = matches!(command, Some(Command::Validate(_)));
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<argclust::Error>() {
            return match e {
                argclust::Error::Invariant(_) => EXIT_INVARIANT,
                argclust::Error::InvalidArgument(_) => EXIT_USAGE,
                _ if validating => EXIT_USAGE,
                _ if e.is_data_error() => EXIT_DATA,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_DATA
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e, Some(&cli.command)))
        }
    }
}
