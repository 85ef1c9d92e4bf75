use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use rayon::prelude::*;

use scribeforge::blot::apply_blots_detailed;
use scribeforge::ctc::BoundarySet;
use scribeforge::stackmix::IndexFile;
use scribeforge::{RasterImage, RngState};

use crate::manifest::{file_stem, DatasetManifest, ManifestRecord};
use crate::{require_path, Context, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Optional boundary file; blots are then centred on characters.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Blot one line. Untouched images are copied byte for byte; the output
/// keeps the input's file extension.
fn augment_line(
    ctx: &Context,
    index: usize,
    record: &ManifestRecord,
    bounds: Option<&BoundarySet>,
    out_dir: &Path,
) -> Result<PathBuf> {
    let image = RasterImage::load(&record.image_path)
        .with_context(|| format!("reading {}", record.image_path.display()))?;
    let mut rng = RngState::derive(ctx.seed, index as u64);
    let outcome = apply_blots_detailed(&image, &ctx.config.blot, &mut rng, bounds)?;
    let ext = record
        .image_path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("png");
    let out = out_dir.join(format!("{}.{ext}", file_stem(&record.id)));
    if outcome.applied && outcome.image != image {
        outcome.image.save(&out)?;
    } else {
        std::fs::copy(&record.image_path, &out)?;
    }
    Ok(out)
}

pub fn run(ctx: &Context, args: Args) -> Result<Report> {
    let paths = &ctx.config.paths;
    let manifest = DatasetManifest::load(&require_path(args.manifest, &paths.manifest, "manifest")?)?;
    let out_dir = require_path(args.out_dir, &paths.out, "out-dir")?;
    let bounds: HashMap<String, BoundarySet> = match args.boundaries {
        Some(p) => IndexFile::load(p)?
            .lines
            .iter()
            .map(|l| Ok((l.id.clone(), l.boundaries()?)))
            .collect::<Result<_>>()?,
        None => HashMap::new(),
    };
    std::fs::create_dir_all(&out_dir)?;

    let results: Vec<_> = ctx.pool.install(|| {
        manifest
            .records
            .par_iter()
            .enumerate()
            .map(|(i, r)| augment_line(ctx, i, r, bounds.get(&r.id), &out_dir))
            .collect()
    });

    let mut report = Report::new("augment");
    let mut out = DatasetManifest::default();
    for (record, result) in manifest.records.iter().zip(results) {
        report.processed += 1;
        match result {
            Ok(path) => {
                out.records.push(ManifestRecord {
                    image_path: path,
                    ..record.clone()
                });
                report.succeeded += 1;
            }
            Err(e) => report.fail(&record.id, e),
        }
    }
    let manifest_path = out_dir.join("manifest.tsv");
    out.save(&manifest_path)?;
    report.detail("output", manifest_path.display().to_string());
    Ok(report)
}
