use std::path::PathBuf;

use anyhow::{Context as _, Result};

use scribeforge::metrics::{evaluate, parse_eval_tsv, EvalOptions};

use crate::{Context, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// TSV with columns id, prediction, truth.
    #[arg(long)]
    pub input: PathBuf,
    /// Lowercase predictions and truths before scoring.
    #[arg(long)]
    pub lowercase: bool,
    /// Also write the metrics JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(_ctx: &Context, args: Args) -> Result<Report> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let pairs = parse_eval_tsv(&text)?;
    let metrics = evaluate(&pairs, EvalOptions { lowercase: args.lowercase })?;
    if let Some(out) = &args.out {
        super::ensure_parent(out)?;
        std::fs::write(out, serde_json::to_string(&metrics)? + "\n")?;
    }
    let mut report = Report::new("evaluate");
    report.processed = pairs.len();
    report.succeeded = pairs.len();
    report.payload = Some(serde_json::to_value(metrics)?);
    Ok(report)
}
