//! Recognition quality: character error rate, word error rate and string
//! accuracy, all in percent and micro-averaged over the evaluation set.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub pred: String,
    pub truth: String,
}

impl EvalPair {
    pub fn new(pred: impl Into<String>, truth: impl Into<String>) -> Self {
        Self {
            pred: pred.into(),
            truth: truth.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cer: f64,
    pub wer: f64,
    pub acc: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// Lowercase both prediction and truth before scoring.
    pub lowercase: bool,
}

/// Unit-cost edit distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Words are maximal runs of non-space characters.
pub fn words(s: &str) -> Vec<&str> {
    s.split(' ').filter(|w| !w.is_empty()).collect()
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Character error rate: total character edits over total truth length, in percent.
pub fn cer(pairs: &[EvalPair]) -> Result<f64> {
    let (mut dist, mut len) = (0usize, 0usize);
    for p in pairs {
        let truth = chars(&p.truth);
        dist += levenshtein(&chars(&p.pred), &truth);
        len += truth.len();
    }
    if len == 0 {
        return Err(Error::UndefinedDenominator("all reference strings are empty"));
    }
    Ok(100.0 * dist as f64 / len as f64)
}

/// Word error rate: total word edits over total truth word count, in percent.
pub fn wer(pairs: &[EvalPair]) -> Result<f64> {
    let (mut dist, mut len) = (0usize, 0usize);
    for p in pairs {
        let truth = words(&p.truth);
        dist += levenshtein(&words(&p.pred), &truth);
        len += truth.len();
    }
    if len == 0 {
        return Err(Error::UndefinedDenominator("no reference string contains a word"));
    }
    Ok(100.0 * dist as f64 / len as f64)
}

/// Percentage of predictions equal to their truth. Case sensitive.
pub fn accuracy(pairs: &[EvalPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedDenominator("no evaluation pairs"));
    }
    let hits = pairs.iter().filter(|p| p.pred == p.truth).count();
    Ok(100.0 * hits as f64 / pairs.len() as f64)
}

pub fn evaluate(pairs: &[EvalPair], options: EvalOptions) -> Result<EvalReport> {
    let folded;
    let pairs = if options.lowercase {
        folded = pairs
            .iter()
            .map(|p| EvalPair::new(p.pred.to_lowercase(), p.truth.to_lowercase()))
            .collect::<Vec<_>>();
        &folded[..]
    } else {
        pairs
    };
    Ok(EvalReport {
        cer: cer(pairs)?,
        wer: wer(pairs)?,
        acc: accuracy(pairs)?,
        n: pairs.len(),
    })
}

/// Parse `id<TAB>prediction<TAB>truth` rows. Blank lines and a leading
/// `id\tprediction\ttruth` header are skipped.
pub fn parse_eval_tsv(text: &str) -> Result<Vec<EvalPair>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || (lineno == 0 && line == "id\tprediction\ttruth") {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(_), Some(pred), Some(truth)) => pairs.push(EvalPair::new(pred, truth)),
            _ => {
                return Err(Error::invalid(format!(
                    "line {}: expected 3 tab-separated columns",
                    lineno + 1
                )))
            }
        }
    }
    Ok(pairs)
}
