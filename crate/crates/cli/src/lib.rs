//! Batch commands behind the `scribeforge` binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod toy;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::RunConfig;
pub use manifest::{DatasetManifest, ManifestRecord};

#[derive(Debug, Parser)]
#[command(name = "scribeforge", version, about = "Synthetic handwritten line generation and evaluation")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Base seed; per-line seeds are derived as `seed ^ line_index`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Exit with a failure status if any line fails.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Worker threads.
    #[arg(long, global = true, env = "SCRIBEFORGE_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align transcripts to CTC posteriors and write per-character boundaries.
    Segment(commands::segment::Args),
    /// Build MWE lexicons and the fragment index from boundary files.
    BuildIndex(commands::build_index::Args),
    /// Synthesize labelled lines (or a page) from corpus text.
    Synthesize(commands::synthesize::Args),
    /// Apply strikethrough blots to every line of a manifest.
    Augment(commands::augment::Args),
    /// Compute CER, WER and string accuracy from a prediction TSV.
    Evaluate(commands::evaluate::Args),
    /// Render a contact sheet of original, blotted and synthesized lines.
    Preview(commands::preview::Args),
    /// Write the small synthetic dataset used by the end-to-end tests.
    #[command(hide = true)]
    ToyDataset(toy::Args),
}

/// A line that could not be processed.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LineFailure {
    pub id: String,
    pub error: String,
}

/// Summary printed as JSON on stdout after every command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub processed: usize,
    pub succeeded: usize,
    pub failures: Vec<LineFailure>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub details: serde_json::Map<String, serde_json::Value>,
    /// Printed instead of the report when set.
    #[serde(skip)]
    pub payload: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            processed: 0,
            succeeded: 0,
            failures: Vec::new(),
            details: serde_json::Map::new(),
            payload: None,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(
            key.to_string(),
            serde_json::to_value(value).expect("report values serialize"),
        );
    }

    /// Text printed on stdout for this report.
    pub fn to_json(&self) -> String {
        match &self.payload {
            Some(v) => serde_json::to_string(v),
            None => serde_json::to_string_pretty(self),
        }
        .expect("report serializes")
    }

    pub fn fail(&mut self, id: impl Into<String>, error: impl std::fmt::Display) {
        let id = id.into();
        log::warn!("line {id}: {error:#}");
        self.failures.push(LineFailure {
            id,
            error: format!("{error:#}"),
        });
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub pool: std::sync::Arc<rayon::ThreadPool>,
}

impl Context {
    pub fn new(config: RunConfig, seed: Option<u64>, jobs: Option<usize>) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()?;
        Ok(Self {
            seed: seed.unwrap_or(config.seed),
            config,
            pool: std::sync::Arc::new(pool),
        })
    }
}

/// Parse-free entry point: run a command and return its report.
pub fn run(cli: Cli) -> anyhow::Result<Report> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let ctx = Context::new(config, cli.seed, cli.jobs)?;
    match cli.command {
        Command::Segment(args) => commands::segment::run(&ctx, args),
        Command::BuildIndex(args) => commands::build_index::run(&ctx, args),
        Command::Synthesize(args) => commands::synthesize::run(&ctx, args),
        Command::Augment(args) => commands::augment::run(&ctx, args),
        Command::Evaluate(args) => commands::evaluate::run(&ctx, args),
        Command::Preview(args) => commands::preview::run(&ctx, args),
        Command::ToyDataset(args) => toy::run(args),
    }
}

/// Use the flag if given, otherwise the config path, otherwise fail naming the flag.
pub(crate) fn require_path(
    flag: Option<PathBuf>,
    fallback: &Option<PathBuf>,
    name: &str,
) -> anyhow::Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| anyhow::anyhow!("missing --{name} (or paths.{name} in the config)"))
}
