//! Small synthetic dataset for end-to-end runs.
//!
//! Each character is a fixed pair of Bezier strokes in a cell of known
//! width, so the true character boundaries are known exactly. Posteriors
//! put 0.9 on the character at the frame nearest each cell centre and 0.9 on
//! the blank elsewhere.

use std::path::{Path, PathBuf};

use anyhow::Result;

use scribeforge::bezier::{rasterize_stroke, sample_curve, ControlPolygon, Point2};
use scribeforge::ctc::{write_posteriors, Alphabet, PosteriorMatrix, SymbolSpan};
use scribeforge::stackmix::{IndexFile, LineRecord};
use scribeforge::{RasterImage, RngState};

use crate::manifest::{DatasetManifest, ManifestRecord};

pub const ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz .,";
pub const LINE_WIDTH: u32 = 512;
pub const LINE_HEIGHT: u32 = 128;
/// Pixels per posterior frame.
pub const FRAME_STRIDE: u32 = 4;
const MARGIN: u32 = 8;

const WORDS: &[&str] = &[
    "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog", "pack", "my", "box", "with",
    "five", "dozen", "liquor", "jugs", "sphinx", "of", "black", "quartz", "judge", "vow", "how",
    "vexingly", "daft", "zebras", "waltz", "bad", "nymph", "fjord", "glib", "jocks", "quiz",
    "a", "wizard", "job", "is", "to", "keep", "hello", "world,", "ink.", "pen,", "line.",
];

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub lines: usize,
    #[arg(long, default_value_t = 200)]
    pub corpus_lines: usize,
}

fn cell_width(c: char) -> u32 {
    match c {
        ' ' => 12,
        '.' | ',' => 8,
        _ => 12 + (c as u32 % 5) * 2,
    }
}

/// Draw `c` into the cell starting at `x0`.
fn draw_glyph(image: &RasterImage, c: char, x0: u32) -> Result<RasterImage> {
    let w = cell_width(c) as f64;
    let left = x0 as f64 + 2.0;
    let right = x0 as f64 + w - 2.0;
    let (top, bottom) = match c {
        ' ' => return Ok(image.clone()),
        '.' | ',' => (84.0, if c == ',' { 100.0 } else { 90.0 }),
        'b' | 'd' | 'f' | 'h' | 'k' | 'l' | 't' => (24.0, 90.0),
        'g' | 'j' | 'p' | 'q' | 'y' => (50.0, 112.0),
        _ => (50.0, 90.0),
    };
    let mut rng = RngState::from_seed(c as u64);
    let mut out = image.clone();
    for _ in 0..2 {
        let pts = (0..4)
            .map(|_| Point2::new(rng.uniform_real(left, right), rng.uniform_real(top, bottom)))
            .collect();
        let poly = ControlPolygon::new(pts)?;
        let path = sample_curve(&poly, 40)?;
        out = rasterize_stroke(&out, &path, 2.5, 1.0, 0)?;
    }
    Ok(out)
}

fn line_text(rng: &mut RngState) -> String {
    let budget = LINE_WIDTH - 2 * MARGIN;
    let mut text = String::new();
    loop {
        let word = WORDS[rng.index(WORDS.len())];
        let candidate = if text.is_empty() {
            word.to_string()
        } else {
            format!("{text} {word}")
        };
        if candidate.chars().map(cell_width).sum::<u32>() > budget {
            return text;
        }
        text = candidate;
    }
}

/// Render a line; returns the image and the true character cells, with
/// the outer margins given to the first and last character.
pub fn render_line(text: &str) -> Result<(RasterImage, Vec<SymbolSpan>)> {
    let mut image = RasterImage::new_blank(LINE_WIDTH, LINE_HEIGHT, 255)?;
    let mut spans = Vec::new();
    let mut x = MARGIN;
    for c in text.chars() {
        image = draw_glyph(&image, c, x)?;
        spans.push(SymbolSpan { ch: c, start_px: x, end_px: x + cell_width(c) });
        x += cell_width(c);
    }
    if let Some(first) = spans.first_mut() {
        first.start_px = 0;
    }
    if let Some(last) = spans.last_mut() {
        last.end_px = LINE_WIDTH;
    }
    Ok((image, spans))
}

/// Posteriors that peak on each character at the frame nearest its cell centre.
pub fn posteriors_for(text: &str, alphabet: &Alphabet) -> Result<PosteriorMatrix> {
    let frames = (LINE_WIDTH / FRAME_STRIDE) as usize;
    let columns = alphabet.len() + 1;
    let mut labels = vec![alphabet.blank(); frames];
    let mut x = MARGIN;
    for c in text.chars() {
        let center = x + cell_width(c) / 2;
        labels[(center / FRAME_STRIDE) as usize] = alphabet
            .index_of(c)
            .ok_or_else(|| anyhow::anyhow!("{c:?} not in toy alphabet"))?;
        x += cell_width(c);
    }
    let rest = 0.1 / (columns - 1) as f32;
    let values = labels
        .iter()
        .flat_map(|&l| (0..columns).map(move |k| if k == l { 0.9 } else { rest }))
        .collect();
    Ok(PosteriorMatrix::new(frames, columns, values)?)
}

fn corpus(n: usize) -> Vec<String> {
    let mut rng = RngState::from_seed(0xC0FFEE);
    (0..n)
        .map(|i| {
            if i % 40 == 39 {
                // outside the alphabet; filtered out downstream
                return format!("Chapter {}", i / 40 + 1);
            }
            let k = rng.uniform_int(2, 6) as usize;
            (0..k)
                .map(|_| WORDS[rng.index(WORDS.len())])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Write `images/`, `posteriors/`, `manifest.tsv`, `boundaries.json` and `corpus.txt`.
pub fn generate(dir: &Path, lines: usize, corpus_lines: usize) -> Result<()> {
    let alphabet = Alphabet::from_str(ALPHABET)?;
    std::fs::create_dir_all(dir.join("images"))?;
    std::fs::create_dir_all(dir.join("posteriors"))?;
    let mut rng = RngState::from_seed(2021);
    let mut manifest = DatasetManifest::default();
    let mut truth = IndexFile {
        alphabet: ALPHABET.to_string(),
        ..Default::default()
    };
    for i in 0..lines {
        let id = format!("line_{i:02}");
        let text = line_text(&mut rng);
        let (image, spans) = render_line(&text)?;
        let image_path = dir.join("images").join(format!("{id}.png"));
        image.save(&image_path)?;
        let post = posteriors_for(&text, &alphabet)?;
        let file = std::fs::File::create(dir.join("posteriors").join(format!("{id}.ctcp")))?;
        write_posteriors(std::io::BufWriter::new(file), &post, &alphabet)?;
        truth.lines.push(LineRecord {
            id: id.clone(),
            image_path: image_path.to_string_lossy().into_owned(),
            spans,
            width: LINE_WIDTH,
        });
        manifest.records.push(ManifestRecord {
            id,
            image_path,
            transcript: text,
            split: Some("train".into()),
        });
    }
    manifest.save(&dir.join("manifest.tsv"))?;
    truth.save(dir.join("boundaries.json"))?;
    let text: String = corpus(corpus_lines).iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.join("corpus.txt"), text)?;
    Ok(())
}

pub fn run(args: Args) -> Result<crate::Report> {
    generate(&args.out, args.lines, args.corpus_lines)?;
    let mut report = crate::Report::new("toy-dataset");
    report.processed = args.lines;
    report.succeeded = args.lines;
    report.detail("output", args.out.display().to_string());
    Ok(report)
}
