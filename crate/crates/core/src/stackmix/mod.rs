//! StackMix: new labelled lines stacked from fragments of training lines.
//!
//! Training lines with per-character boundaries are indexed by every short
//! character sequence they contain. A corpus line is tokenized with a
//! randomly drawn multi-character lexicon, each token is matched to an image
//! fragment, and the fragments are concatenated in order.

mod index;
mod lexicon;
mod synth;

pub use index::{
    build_fragment_index, FileImageStore, Fragment, FragmentIndex, ImageStore, IndexFile,
    LineRecord, MemoryImageStore, SourceLine,
};
pub use lexicon::{build_mwe_lexicons, tokenize, MweLexicon, TokenizerBank, DEFAULT_DIMS, DEFAULT_PROBS};
pub use synth::{
    filter_corpus, missing_characters, synthesize_line, synthesize_page, CorpusFilter, CorpusLine,
    Provenance, SynthesisResult,
};
