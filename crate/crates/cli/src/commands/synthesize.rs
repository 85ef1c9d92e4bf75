use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use rayon::prelude::*;
use serde::Serialize;

use scribeforge::stackmix::{
    filter_corpus, missing_characters, synthesize_line, synthesize_page, FileImageStore,
    FragmentIndex, Provenance,
};
use scribeforge::RngState;

use super::{bank_for, read_corpus};
use crate::manifest::{DatasetManifest, ManifestRecord};
use crate::{require_path, Context, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Fragment index written by `build-index`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// UTF-8 text corpus, one line per record.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Number of lines to synthesize.
    #[arg(long, default_value_t = 100)]
    pub n_lines: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Write one page image of `n_lines` lines instead of separate lines.
    #[arg(long)]
    pub page: bool,
    /// Overrides `stackmix.target_height`.
    #[arg(long)]
    pub target_height: Option<u32>,
}

#[derive(Serialize)]
struct ProvenanceRecord<'a> {
    id: &'a str,
    label: &'a str,
    lexicon_dim: usize,
    fragments: &'a [Provenance],
}

pub fn run(ctx: &Context, args: Args) -> Result<Report> {
    let paths = &ctx.config.paths;
    let index = FragmentIndex::load(require_path(args.index, &paths.index, "index")?)?;
    let corpus = read_corpus(&require_path(args.corpus, &paths.corpus, "corpus")?)?;
    let out_dir = require_path(args.out_dir, &paths.out, "out-dir")?;
    let height = args.target_height.unwrap_or(ctx.config.stackmix.target_height);
    let bank = bank_for(&index, &ctx.config.stackmix)?;
    let store = FileImageStore::for_index(&index);

    let mut report = Report::new("synthesize");
    let filtered = filter_corpus(&corpus, index.alphabet());
    let (usable, unusable): (Vec<_>, Vec<_>) = filtered
        .kept
        .into_iter()
        .partition(|l| missing_characters(l.text(), &index).is_empty());
    report.detail("corpus_lines", corpus.len());
    report.detail("dropped_out_of_alphabet", filtered.dropped);
    report.detail("skipped_unsynthesizable", unusable.len());
    if usable.is_empty() {
        bail!("no synthesizable corpus lines");
    }
    std::fs::create_dir_all(&out_dir)?;

    if args.page {
        let texts: Vec<_> = (0..args.n_lines.max(1)).map(|i| usable[i % usable.len()].clone()).collect();
        let mut rng = RngState::from_seed(ctx.seed);
        let page = synthesize_page(&texts, &index, &bank, &store, &mut rng, height, ctx.config.stackmix.page_gap)?;
        let path = out_dir.join("page.png");
        page.save(&path)?;
        let text: String = texts.iter().map(|t| format!("{}\n", t.text())).collect();
        std::fs::write(out_dir.join("page.txt"), text)?;
        report.processed = texts.len();
        report.succeeded = texts.len();
        report.detail("output", path.display().to_string());
        return Ok(report);
    }

    let results: Vec<_> = ctx.pool.install(|| {
        (0..args.n_lines)
            .into_par_iter()
            .map(|i| {
                let text = &usable[i % usable.len()];
                let mut rng = RngState::derive(ctx.seed, i as u64);
                let id = format!("synth_{i:06}");
                let result = synthesize_line(text, &index, &bank, &store, &mut rng, height)?;
                let path = out_dir.join(format!("{id}.png"));
                result.image.save(&path)?;
                Ok::<_, anyhow::Error>((id, path, result))
            })
            .collect()
    });

    let mut manifest = DatasetManifest::default();
    let mut sidecar = std::io::BufWriter::new(
        std::fs::File::create(out_dir.join("provenance.jsonl")).context("creating provenance sidecar")?,
    );
    for (i, r) in results.into_iter().enumerate() {
        report.processed += 1;
        match r {
            Ok((id, path, result)) => {
                let record = ProvenanceRecord {
                    id: &id,
                    label: &result.label,
                    lexicon_dim: bank.lexicons()[result.lexicon].max_dim(),
                    fragments: &result.provenance,
                };
                serde_json::to_writer(&mut sidecar, &record)?;
                sidecar.write_all(b"\n")?;
                manifest.records.push(ManifestRecord {
                    id,
                    image_path: path,
                    transcript: result.label,
                    split: None,
                });
                report.succeeded += 1;
            }
            Err(e) => report.fail(format!("synth_{i:06}"), e),
        }
    }
    sidecar.flush()?;
    let manifest_path = out_dir.join("manifest.tsv");
    manifest.save(&manifest_path)?;
    report.detail("output", manifest_path.display().to_string());
    Ok(report)
}
