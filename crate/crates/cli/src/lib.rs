//! Command-line surface for pseudosum.
//!
//! Exit codes: 0 on success (per-function failures included), 1 when a run
//! fails at runtime, 2 for bad usage, configuration or input documents.

mod commands;
pub mod config;
mod dataset;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pseudosum_core::corpus::{Ratio, StripLevel};
use pseudosum_core::fcg::GraphFormat;
use pseudosum_core::MetricParams;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "pseudosum", version, about = "Call-graph ordered summaries of decompiled pseudocode")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the callee-first processing order of a call graph.
    Resort {
        graph: PathBuf,
        /// Graph format; guessed from the extension when omitted.
        #[arg(long)]
        format: Option<GraphFormat>,
        /// Emit a JSON array instead of one id per line.
        #[arg(long)]
        json: bool,
    },
    /// Annotate and summarize a corpus as described by a TOML run config.
    Summarize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Score summaries against references, or probe BLEU's length bias.
    Evaluate(EvaluateArgs),
    /// Build datasets from a JSON-lines corpus.
    #[command(subcommand)]
    Dataset(DatasetCommand),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Transcript (.jsonl) or summaries map (.json).
    #[arg(long, requires = "references")]
    pub transcript: Option<PathBuf>,
    /// Reference summaries: a JSON map of id to sentence, or a JSON-lines corpus.
    #[arg(long, requires = "transcript")]
    pub references: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a per-function struc computed after rank-normalizing each metric over this run.
    #[arg(long)]
    pub normalize_struc: bool,
    /// Zero-overlap BLEU grid over lengths 1..=N.
    #[arg(long, value_name = "N")]
    pub bias_probe: Option<usize>,
    /// CSV destination for the probe; stdout when omitted.
    #[arg(long, requires = "bias_probe")]
    pub probe_out: Option<PathBuf>,
    #[command(flatten)]
    pub metrics: MetricArgs,
}

/// Overrides for the metric parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct MetricArgs {
    #[arg(long)]
    pub bleu_max_n: Option<usize>,
    #[arg(long)]
    pub rouge_beta: Option<f64>,
    #[arg(long)]
    pub meteor_beta: Option<f64>,
    #[arg(long)]
    pub meteor_gamma: Option<f64>,
    #[arg(long)]
    pub meteor_theta: Option<f64>,
    #[arg(long)]
    pub p_semantic: Option<f64>,
    /// File with one stopword per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Drop short, malformed and duplicate functions.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON-lines rejection log.
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Replace function names (demi) or all identifiers (all).
    Strip {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        level: StripLevel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// API names to keep, one per line.
        #[arg(long)]
        apis: Option<PathBuf>,
    },
    /// Token and N/A/S label sequences.
    Csl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        apis: Option<PathBuf>,
    },
    /// Labeled sentence pairs from record summaries.
    Evas {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "1:1")]
        ratio: Ratio,
        #[arg(long)]
        total: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        metrics: MetricArgs,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration or input documents.
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

pub(crate) fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

pub(crate) fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

impl MetricArgs {
    /// Applies the overrides on top of `base` and validates the result.
    pub fn apply(&self, mut base: MetricParams) -> Result<MetricParams, CliError> {
        if let Some(v) = self.bleu_max_n {
            base.bleu_max_n = v;
        }
        for (slot, v) in [
            (&mut base.rouge_beta, self.rouge_beta),
            (&mut base.meteor_beta, self.meteor_beta),
            (&mut base.meteor_gamma, self.meteor_gamma),
            (&mut base.meteor_theta, self.meteor_theta),
            (&mut base.p_semantic, self.p_semantic),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(path) = &self.stopwords {
            let text = config::read_input(path)?;
            base.stopwords = text.split_whitespace().map(str::to_lowercase).collect();
        }
        base.validate().map_err(usage)?;
        Ok(base)
    }
}

/// Runs one command, writing normal output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Resort { graph, format, json } => commands::resort(&graph, format, json, out),
        Command::Summarize { config, output_dir, seed, budget } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(b) = budget {
                cfg.backend.budget_words = b;
            }
            commands::summarize(&cfg, out)
        }
        Command::Evaluate(args) => commands::evaluate(&args, out),
        Command::Dataset(cmd) => dataset::run(cmd, out),
    }
}
