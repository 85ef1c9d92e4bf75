use std::path::PathBuf;

use anyhow::{bail, Result};

use scribeforge::blot::{apply_handwritten_blots, BlotConfig};
use scribeforge::raster::{vstack, WHITE};
use scribeforge::stackmix::{synthesize_line, CorpusLine, FileImageStore, FragmentIndex};
use scribeforge::{RasterImage, RngState};

use super::{bank_for, read_corpus};
use crate::manifest::DatasetManifest;
use crate::{Context, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Originals,
    Blotted,
    Synthesized,
    /// Original and blotted rows adjacent, then a synthesized row when an index is given.
    Mixed,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Source of original lines.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Fragment index; required for synthesized rows, and a source of
    /// original lines when no manifest is given.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Texts for synthesized rows; defaults to the source transcripts.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Mode::Mixed)]
    pub mode: Mode,
    /// Row height of the sheet; overrides `stackmix.target_height`.
    #[arg(long)]
    pub target_height: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

const ROW_GAP: u32 = 8;

pub fn run(ctx: &Context, args: Args) -> Result<Report> {
    let height = args.target_height.unwrap_or(ctx.config.stackmix.target_height);
    let index = args.index.as_ref().map(FragmentIndex::load).transpose()?;

    // (image path, transcript) of the original lines to show
    let sources: Vec<(PathBuf, String)> = match (&args.manifest, &index) {
        (Some(m), _) => DatasetManifest::load(m)?
            .records
            .into_iter()
            .map(|r| (r.image_path, r.transcript))
            .collect(),
        (None, Some(ix)) => ix
            .lines()
            .iter()
            .map(|l| (l.image_path.clone(), l.boundaries.text()))
            .collect(),
        (None, None) => bail!("preview needs --manifest or --index"),
    };
    if sources.is_empty() || args.samples == 0 {
        bail!("nothing to preview");
    }
    let wants_synth = matches!(args.mode, Mode::Synthesized) || (args.mode == Mode::Mixed && index.is_some());
    let synth = match (&index, wants_synth) {
        (Some(ix), true) => {
            let texts: Vec<String> = match &args.corpus {
                Some(p) => read_corpus(p)?,
                None => sources.iter().map(|s| s.1.clone()).collect(),
            };
            let texts: Vec<CorpusLine> = texts
                .into_iter()
                .filter_map(|t| CorpusLine::new(t, ix.alphabet()).ok())
                .filter(|t| scribeforge::stackmix::missing_characters(t.text(), ix).is_empty())
                .collect();
            if texts.is_empty() {
                bail!("no synthesizable texts for the preview");
            }
            Some((ix, bank_for(ix, &ctx.config.stackmix)?, FileImageStore::for_index(ix), texts))
        }
        (None, true) => bail!("synthesized rows need --index"),
        _ => None,
    };
    // always blot in the preview so the effect is visible
    let blot = BlotConfig { proba: 1.0, ..ctx.config.blot.clone() };

    let mut rows: Vec<RasterImage> = Vec::new();
    for i in 0..args.samples {
        let mut rng = RngState::derive(ctx.seed, i as u64);
        let (path, _) = &sources[i % sources.len()];
        let needs_original = args.mode != Mode::Synthesized;
        let original = if needs_original {
            Some(RasterImage::load(path)?.resize_to_height(height)?)
        } else {
            None
        };
        if matches!(args.mode, Mode::Originals | Mode::Mixed) {
            rows.push(original.clone().expect("loaded above"));
        }
        if matches!(args.mode, Mode::Blotted | Mode::Mixed) {
            let im = original.as_ref().expect("loaded above");
            rows.push(apply_handwritten_blots(im, &blot, &mut rng, None)?);
        }
        if let Some((ix, bank, store, texts)) = &synth {
            let text = &texts[i % texts.len()];
            rows.push(synthesize_line(text, ix, bank, store, &mut rng, height)?.image);
        }
    }
    let sheet = vstack(&rows, ROW_GAP, WHITE)?;
    super::ensure_parent(&args.out)?;
    sheet.save(&args.out)?;

    let mut report = Report::new("preview");
    report.processed = args.samples;
    report.succeeded = args.samples;
    report.detail("rows", rows.len());
    report.detail("output", args.out.display().to_string());
    report.detail("digest", sheet.digest());
    Ok(report)
}
