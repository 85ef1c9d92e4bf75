use std::collections::BTreeSet;

use serde::Serialize;

use super::index::{FragmentIndex, ImageStore};
use super::lexicon::{tokenize, TokenizerBank};
use crate::ctc::Alphabet;
use crate::raster::{hstack, vstack, WHITE};
use crate::{Error, RasterImage, Result, RngState};

/// Corpus text whose every character belongs to the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorpusLine(String);

impl CorpusLine {
    pub fn new(text: impl Into<String>, alphabet: &Alphabet) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::invalid("corpus line is empty"));
        }
        if let Some(c) = text.chars().find(|c| !alphabet.contains(*c)) {
            return Err(Error::invalid(format!("character {c:?} is not in the alphabet")));
        }
        Ok(Self(text))
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusFilter {
    pub kept: Vec<CorpusLine>,
    pub dropped: usize,
}

/// Keep the non-empty lines made only of alphabet characters, in order.
/// Trailing `\n` / `\r` are trimmed first.
pub fn filter_corpus<S: AsRef<str>>(lines: &[S], alphabet: &Alphabet) -> CorpusFilter {
    let mut out = CorpusFilter::default();
    for line in lines {
        let text = line.as_ref().trim_end_matches(['\n', '\r']);
        match CorpusLine::new(text, alphabet) {
            Ok(l) => out.kept.push(l),
            Err(_) => out.dropped += 1,
        }
    }
    out
}

/// Where one token of a synthesized line came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub token: String,
    pub line_id: String,
    pub start_px: u32,
    pub end_px: u32,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub image: RasterImage,
    pub label: String,
    pub provenance: Vec<Provenance>,
    /// Index of the lexicon drawn from the bank.
    pub lexicon: usize,
}

/// Characters of `text` with no fragment in the index, sorted.
pub fn missing_characters(text: &str, index: &FragmentIndex) -> Vec<char> {
    text.chars()
        .filter(|c| !index.atoms().contains(c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Build a labelled line image for `text` from training fragments.
///
/// One lexicon is drawn from the bank and used to tokenize the text; each
/// token is depicted by a fragment chosen uniformly among those indexed for
/// it. Tokens the index lacks are broken into characters. Fragments are
/// scaled to `target_height` and concatenated in token order.
pub fn synthesize_line(
    text: &CorpusLine,
    index: &FragmentIndex,
    bank: &TokenizerBank,
    store: &dyn ImageStore,
    rng: &mut RngState,
    target_height: u32,
) -> Result<SynthesisResult> {
    let missing = missing_characters(text.text(), index);
    if !missing.is_empty() {
        return Err(Error::UnsynthesizableLine { missing });
    }
    let lexicon = bank.choose(rng);
    let mut provenance = Vec::new();
    let mut pieces = Vec::new();
    for token in tokenize(text.text(), &bank.lexicons()[lexicon]) {
        let parts: Vec<String> = if index.fragments(&token).is_empty() {
            token.chars().map(String::from).collect()
        } else {
            vec![token]
        };
        for part in parts {
            let candidates = index.fragments(&part);
            let frag = &candidates[rng.index(candidates.len())];
            let source = store.image(&frag.line_id)?;
            pieces.push(source.crop_columns(frag.start_px, frag.end_px)?);
            provenance.push(Provenance {
                token: part,
                line_id: frag.line_id.to_string(),
                start_px: frag.start_px,
                end_px: frag.end_px,
            });
        }
    }
    Ok(SynthesisResult {
        image: hstack(&pieces, target_height)?,
        label: text.text().to_string(),
        provenance,
        lexicon,
    })
}

/// Synthesize each text and stack the lines into a page, `gap` white rows apart.
pub fn synthesize_page(
    texts: &[CorpusLine],
    index: &FragmentIndex,
    bank: &TokenizerBank,
    store: &dyn ImageStore,
    rng: &mut RngState,
    target_height: u32,
    gap: u32,
) -> Result<RasterImage> {
    if texts.is_empty() {
        return Err(Error::invalid("page needs at least one line"));
    }
    let lines = texts
        .iter()
        .map(|t| synthesize_line(t, index, bank, store, rng, target_height).map(|r| r.image))
        .collect::<Result<Vec<_>>>()?;
    vstack(&lines, gap, WHITE)
}
