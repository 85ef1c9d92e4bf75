use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::{Error, Result, RngState};

/// Maximum expression lengths of the tokenizer bank.
pub const DEFAULT_DIMS: [usize; 6] = [3, 4, 5, 6, 7, 8];
/// Selection probabilities matching [`DEFAULT_DIMS`].
pub const DEFAULT_PROBS: [f64; 6] = [0.05, 0.15, 0.2, 0.2, 0.2, 0.2];

/// Contiguous character sequences of length `2..=max_dim` seen in training
/// transcripts. Single characters are the atomic tokens and are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MweLexicon {
    max_dim: usize,
    expressions: BTreeSet<String>,
}

impl MweLexicon {
    pub fn new(max_dim: usize, expressions: impl IntoIterator<Item = String>) -> Result<Self> {
        let expressions: BTreeSet<String> = expressions.into_iter().collect();
        if let Some(e) = expressions.iter().find(|e| {
            let n = e.chars().count();
            n < 2 || n > max_dim
        }) {
            return Err(Error::invalid(format!(
                "expression {e:?} does not fit lexicon dimension {max_dim}"
            )));
        }
        Ok(Self {
            max_dim,
            expressions,
        })
    }

    /// A lexicon without expressions; tokenizes per character.
    pub fn empty(max_dim: usize) -> Self {
        Self {
            max_dim,
            expressions: BTreeSet::new(),
        }
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn expressions(&self) -> &BTreeSet<String> {
        &self.expressions
    }

    pub fn contains(&self, expr: &str) -> bool {
        self.expressions.contains(expr)
    }

    pub fn len(&self) -> usize {
        self.expressions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expressions.is_empty()
    }
}

/// Greedy left-to-right longest-match tokenization.
///
/// At each position the longest lexicon expression starting there becomes one
/// token; otherwise the single character does. There is no backtracking.
pub fn tokenize(text: &str, lexicon: &MweLexicon) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut candidate = String::new();
    while i < chars.len() {
        let longest = lexicon.max_dim.min(chars.len() - i);
        let mut taken = 1;
        for n in (2..=longest).rev() {
            candidate.clear();
            candidate.extend(&chars[i..i + n]);
            if lexicon.contains(&candidate) {
                taken = n;
                break;
            }
        }
        tokens.push(chars[i..i + taken].iter().collect());
        i += taken;
    }
    tokens
}

/// A set of lexicons of different dimensions, one of which is drawn for
/// every synthesized line.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerBank {
    lexicons: Vec<MweLexicon>,
    probs: Vec<f64>,
    atoms: BTreeSet<char>,
}

impl TokenizerBank {
    pub fn new(lexicons: Vec<MweLexicon>, probs: Vec<f64>, atoms: BTreeSet<char>) -> Result<Self> {
        check_probs(lexicons.len(), &probs)?;
        Ok(Self {
            lexicons,
            probs,
            atoms,
        })
    }

    /// Bank that always tokenizes per character.
    pub fn per_character(atoms: BTreeSet<char>) -> Self {
        Self {
            lexicons: vec![MweLexicon::empty(1)],
            probs: vec![1.0],
            atoms,
        }
    }

    pub fn with_probabilities(mut self, probs: Vec<f64>) -> Result<Self> {
        check_probs(self.lexicons.len(), &probs)?;
        self.probs = probs;
        Ok(self)
    }

    pub fn lexicons(&self) -> &[MweLexicon] {
        &self.lexicons
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Single characters observed in the training transcripts.
    pub fn atoms(&self) -> &BTreeSet<char> {
        &self.atoms
    }

    /// Draw a lexicon index according to the bank probabilities.
    pub fn choose(&self, rng: &mut RngState) -> usize {
        rng.categorical(&self.probs)
    }

    /// Largest expression length over all lexicons.
    pub fn max_dim(&self) -> usize {
        self.lexicons.iter().map(MweLexicon::max_dim).max().unwrap_or(1)
    }

    /// Whether `expr` is an expression of any lexicon.
    pub fn knows(&self, expr: &str) -> bool {
        self.lexicons.iter().any(|l| l.contains(expr))
    }

    /// SHA-256 of a canonical dump of all lexicons.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for lex in &self.lexicons {
            h.update(format!("dim {}\n", lex.max_dim));
            for e in &lex.expressions {
                h.update(e.as_bytes());
                h.update(b"\n");
            }
        }
        hex::encode(h.finalize())
    }
}

fn check_probs(n: usize, probs: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("tokenizer bank needs at least one lexicon"));
    }
    if probs.len() != n {
        return Err(Error::invalid(format!(
            "{} probabilities for {n} lexicons",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "tokenizer probabilities {probs:?} must be in [0, 1] and sum to 1"
        )));
    }
    Ok(())
}

/// Harvest every character n-gram (`2 <= n <= d`) of the transcripts into one
/// lexicon per dimension `d`.
///
/// With the default dimensions the bank gets the default selection
/// probabilities; any other set of dimensions is weighted uniformly.
pub fn build_mwe_lexicons<S: AsRef<str>>(transcripts: &[S], dims: &[usize]) -> Result<TokenizerBank> {
    if transcripts.is_empty() {
        return Err(Error::invalid("no transcripts to build lexicons from"));
    }
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::invalid(format!("lexicon dimensions {dims:?} must be >= 2")));
    }
    let max_dim = *dims.iter().max().expect("dims is non-empty");
    let mut by_len: Vec<BTreeSet<String>> = vec![BTreeSet::new(); max_dim + 1];
    let mut atoms = BTreeSet::new();
    for t in transcripts {
        let chars: Vec<char> = t.as_ref().chars().collect();
        atoms.extend(chars.iter().copied());
        for i in 0..chars.len() {
            for n in 2..=max_dim.min(chars.len() - i) {
                by_len[n].insert(chars[i..i + n].iter().collect());
            }
        }
    }
    let lexicons = dims
        .iter()
        .map(|&d| MweLexicon {
            max_dim: d,
            expressions: by_len[2..=d].iter().flatten().cloned().collect(),
        })
        .collect();
    let probs = if dims == DEFAULT_DIMS {
        DEFAULT_PROBS.to_vec()
    } else {
        vec![1.0 / dims.len() as f64; dims.len()]
    };
    TokenizerBank::new(lexicons, probs, atoms)
}
