use std::path::PathBuf;

use anyhow::{Context as _, Result};
use rayon::prelude::*;

use scribeforge::ctc::{extract_boundaries_scored, read_posteriors, Alphabet};
use scribeforge::stackmix::{IndexFile, LineRecord};
use scribeforge::RasterImage;

use crate::manifest::{file_stem, DatasetManifest, ManifestRecord};
use crate::{require_path, Context, Report};

const WEAKEST_SHOWN: usize = 5;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Line manifest (TSV).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory holding one `<id>.ctcp` posterior file per line.
    #[arg(long)]
    pub posteriors: Option<PathBuf>,
    /// Output boundary file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn segment_line(record: &ManifestRecord, dir: &std::path::Path) -> Result<(LineRecord, Alphabet, f64)> {
    let path = dir.join(format!("{}.ctcp", file_stem(&record.id)));
    let (posteriors, alphabet) = read_posteriors(&path)
        .with_context(|| format!("posteriors for line {:?}", record.id))?;
    let image = RasterImage::load(&record.image_path)
        .with_context(|| format!("reading {}", record.image_path.display()))?;
    let (bounds, score) = extract_boundaries_scored(
        &posteriors,
        &record.transcript,
        &alphabet,
        image.width(),
        &record.id,
    )?;
    Ok((
        LineRecord {
            id: record.id.clone(),
            image_path: record.image_path.to_string_lossy().into_owned(),
            spans: bounds.spans().to_vec(),
            width: bounds.width(),
        },
        alphabet,
        score,
    ))
}

pub fn run(ctx: &Context, args: Args) -> Result<Report> {
    let paths = &ctx.config.paths;
    let manifest_path = require_path(args.manifest, &paths.manifest, "manifest")?;
    let dir = require_path(args.posteriors, &paths.posteriors, "posteriors")?;
    let out = require_path(args.out, &paths.boundaries, "out")?;

    let manifest = DatasetManifest::load(&manifest_path)?;
    let mut report = Report::new("segment");
    if manifest.records.is_empty() {
        log::warn!("manifest {} is empty", manifest_path.display());
    }

    let results: Vec<_> = ctx.pool.install(|| {
        manifest
            .records
            .par_iter()
            .map(|r| segment_line(r, &dir))
            .collect()
    });

    let mut file = IndexFile::default();
    let mut alphabet: Option<Alphabet> = None;
    let mut scores = Vec::new();
    for (record, result) in manifest.records.iter().zip(results) {
        report.processed += 1;
        match result {
            Ok((line, a, score)) => {
                let expected = alphabet.get_or_insert_with(|| a.clone());
                if *expected != a {
                    report.fail(
                        &record.id,
                        format!(
                            "alphabet {:?} differs from {:?} used by earlier lines",
                            a.as_string(),
                            expected.as_string()
                        ),
                    );
                    continue;
                }
                scores.push((score, line.id.clone()));
                file.lines.push(line);
                report.succeeded += 1;
            }
            Err(e) => report.fail(&record.id, e),
        }
    }
    file.alphabet = alphabet.map(|a| a.as_string()).unwrap_or_default();
    super::ensure_parent(&out)?;
    file.save(&out)?;
    report.detail("output", out.display().to_string());
    // no quality filter is applied; the least confident lines are listed for review
    scores.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let weakest: Vec<_> = scores
        .iter()
        .take(WEAKEST_SHOWN)
        .map(|(s, id)| serde_json::json!({"id": id, "mean_log_prob": s}))
        .collect();
    report.detail("weakest_alignments", weakest);
    Ok(report)
}
