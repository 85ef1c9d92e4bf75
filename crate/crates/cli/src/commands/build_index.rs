use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use anyhow::{bail, Result};

use scribeforge::ctc::Alphabet;
use scribeforge::stackmix::{build_fragment_index, build_mwe_lexicons, IndexFile, SourceLine, DEFAULT_DIMS};

use crate::manifest::DatasetManifest;
use crate::{require_path, Context, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Line manifest; only records in the train split (or untagged) are indexed.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Boundary file written by `segment`.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    /// Lexicon dimensions (maximum expression lengths).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DIMS)]
    pub dims: Vec<usize>,
    /// Output index file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: Args) -> Result<Report> {
    let paths = &ctx.config.paths;
    let manifest = DatasetManifest::load(&require_path(args.manifest, &paths.manifest, "manifest")?)?;
    let boundaries = IndexFile::load(require_path(args.boundaries, &paths.boundaries, "boundaries")?)?;
    let out = require_path(args.out, &paths.index, "out")?;

    let by_id: HashMap<&str, _> = boundaries.lines.iter().map(|l| (l.id.as_str(), l)).collect();
    let mut lines = Vec::new();
    let mut transcripts = Vec::new();
    let mut report = Report::new("build-index");
    for record in manifest.records.iter().filter(|r| r.is_train()) {
        report.processed += 1;
        let Some(line) = by_id.get(record.id.as_str()) else {
            bail!("line {:?} of the manifest has no entry in the boundary file", record.id);
        };
        let bounds = line.boundaries()?;
        bounds.check_transcript(&record.transcript)?;
        transcripts.push(record.transcript.as_str());
        lines.push(SourceLine {
            boundaries: bounds,
            image_path: record.image_path.clone(),
        });
        report.succeeded += 1;
    }
    if lines.is_empty() {
        bail!("no training lines to index");
    }

    let alphabet = Alphabet::from_str(&boundaries.alphabet)?;
    let bank = build_mwe_lexicons(&transcripts, &args.dims)?;
    let index = build_fragment_index(lines, &alphabet, &bank)?;
    super::ensure_parent(&out)?;
    index.save(&out)?;

    let lexicon_sizes: BTreeMap<usize, usize> =
        bank.lexicons().iter().map(|l| (l.max_dim(), l.len())).collect();
    report.detail("output", out.display().to_string());
    report.detail("lexicon_sizes", lexicon_sizes);
    report.detail("tokens_by_length", index.token_counts());
    report.detail("fragments", index.fragment_count());
    report.detail("digest", index.digest());
    Ok(report)
}
