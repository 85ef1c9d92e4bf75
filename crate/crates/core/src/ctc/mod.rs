//! Character segmentation from CTC posteriors.
//!
//! A recogniser trained with CTC emits, for every horizontal frame of the
//! line, a distribution over the alphabet plus a blank. Forced alignment
//! against the known transcript assigns each frame to one position of the
//! extended label `blank c1 blank c2 ... blank`; the frame extents of each
//! character are then mapped back to pixel columns.

mod align;
mod format;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use align::{forced_align, frames_to_pixels, min_frames, Alignment, LOG_FLOOR};
pub use format::{read_posteriors, write_posteriors, CTCP_MAGIC, CTCP_VERSION};

/// Ordered symbol set of a recogniser. The blank is implicit and occupies the
/// column after the last symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    lookup: HashMap<char, usize>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        let mut lookup = HashMap::with_capacity(symbols.len());
        for (i, &c) in symbols.iter().enumerate() {
            if lookup.insert(c, i).is_some() {
                return Err(Error::invalid(format!("duplicate symbol {c:?} in alphabet")));
            }
        }
        Ok(Self { symbols, lookup })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(s: &str) -> Result<Self> {
        Self::new(s.chars())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Column of the blank symbol.
    pub fn blank(&self) -> usize {
        self.symbols.len()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.lookup.get(&c).copied()
    }

    pub fn contains(&self, c: char) -> bool {
        self.lookup.contains_key(&c)
    }

    pub fn as_string(&self) -> String {
        self.symbols.iter().collect()
    }
}

/// Tolerance on per-frame probability sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

/// `frames x (symbols + 1)` per-frame probabilities, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    frames: usize,
    columns: usize,
    values: Vec<f32>,
}

impl PosteriorMatrix {
    /// Validates shape, non-negativity and that each row sums to one.
    pub fn new(frames: usize, columns: usize, values: Vec<f32>) -> Result<Self> {
        if columns < 2 {
            return Err(Error::invalid(format!(
                "posteriors need at least one symbol plus blank, got {columns} columns"
            )));
        }
        if values.len() != frames * columns {
            return Err(Error::invalid(format!(
                "posterior buffer has {} values, expected {frames}x{columns}",
                values.len()
            )));
        }
        for (t, row) in values.chunks_exact(columns).enumerate() {
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::invalid(format!("frame {t} has invalid probability {v}")));
            }
            let sum: f64 = row.iter().map(|&v| v as f64).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "frame {t} probabilities sum to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            frames,
            columns,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let columns = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != columns) {
            return Err(Error::invalid("posterior rows have unequal lengths"));
        }
        Self::new(rows.len(), columns, rows.concat())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.values[t * self.columns..(t + 1) * self.columns]
    }

    pub fn prob(&self, t: usize, column: usize) -> f32 {
        self.values[t * self.columns + column]
    }
}

/// Pixel extent `[start_px, end_px)` of one transcript character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolSpan {
    pub ch: char,
    pub start_px: u32,
    pub end_px: u32,
}

impl Serialize for SymbolSpan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.ch.to_string(), self.start_px, self.end_px).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymbolSpan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (s, start_px, end_px) = <(String, u32, u32)>::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(ch), None) => Ok(SymbolSpan { ch, start_px, end_px }),
            _ => Err(serde::de::Error::custom(format!(
                "span symbol must be a single character, got {s:?}"
            ))),
        }
    }
}

/// Per-character pixel spans for one line image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySet {
    line_id: String,
    width: u32,
    spans: Vec<SymbolSpan>,
}

impl BoundarySet {
    /// Checks that spans are non-empty, ordered, non-overlapping and inside the image.
    pub fn new(line_id: impl Into<String>, width: u32, spans: Vec<SymbolSpan>) -> Result<Self> {
        let line_id = line_id.into();
        let corrupt = |reason: String| Error::CorruptBoundary {
            line_id: line_id.clone(),
            reason,
        };
        let mut prev_end = 0;
        for (i, s) in spans.iter().enumerate() {
            if s.start_px >= s.end_px {
                return Err(corrupt(format!("span {i} ({:?}) is empty", s.ch)));
            }
            if s.end_px > width {
                return Err(corrupt(format!(
                    "span {i} ends at {} beyond width {width}",
                    s.end_px
                )));
            }
            if s.start_px < prev_end {
                return Err(corrupt(format!("span {i} overlaps or precedes span {}", i.max(1) - 1)));
            }
            prev_end = s.end_px;
        }
        Ok(Self {
            line_id,
            width,
            spans,
        })
    }

    pub fn line_id(&self) -> &str {
        &self.line_id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn spans(&self) -> &[SymbolSpan] {
        &self.spans
    }

    /// Characters of the spans, in order.
    pub fn text(&self) -> String {
        self.spans.iter().map(|s| s.ch).collect()
    }

    /// Fails with a corrupt-boundary error unless the spans spell `transcript`.
    pub fn check_transcript(&self, transcript: &str) -> Result<()> {
        let text = self.text();
        if text != transcript {
            return Err(Error::CorruptBoundary {
                line_id: self.line_id.clone(),
                reason: format!("spans spell {text:?} but transcript is {transcript:?}"),
            });
        }
        Ok(())
    }

    /// True when the spans cover `[0, width)` without gaps.
    pub fn tiles_width(&self) -> bool {
        !self.spans.is_empty()
            && self.spans[0].start_px == 0
            && self.spans.last().is_some_and(|s| s.end_px == self.width)
            && self.spans.windows(2).all(|w| w[0].end_px == w[1].start_px)
    }
}

/// Align `transcript` to `posteriors` and convert the result to pixel spans
/// over an image `width` pixels wide.
pub fn extract_boundaries(
    posteriors: &PosteriorMatrix,
    transcript: &str,
    alphabet: &Alphabet,
    width: u32,
    line_id: &str,
) -> Result<BoundarySet> {
    extract_boundaries_scored(posteriors, transcript, alphabet, width, line_id).map(|(b, _)| b)
}

/// As [`extract_boundaries`], also returning the path's mean log
/// probability per frame, a rough confidence for the segmentation.
pub fn extract_boundaries_scored(
    posteriors: &PosteriorMatrix,
    transcript: &str,
    alphabet: &Alphabet,
    width: u32,
    line_id: &str,
) -> Result<(BoundarySet, f64)> {
    let alignment = forced_align(posteriors, transcript, alphabet)?;
    let chars: Vec<char> = transcript.chars().collect();
    let ranges = frames_to_pixels(&alignment.states, posteriors.frames(), width)?;
    let spans = chars
        .iter()
        .zip(ranges)
        .map(|(&ch, (start_px, end_px))| SymbolSpan { ch, start_px, end_px })
        .collect();
    let per_frame = alignment.log_score / posteriors.frames() as f64;
    Ok((BoundarySet::new(line_id, width, spans)?, per_frame))
}
