use super::{Alphabet, PosteriorMatrix};
use crate::{Error, Result};

/// Log-probability assigned to exact zeros, keeping scores finite.
pub const LOG_FLOOR: f64 = -1e30;

/// Best path through the CTC lattice of a transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Extended-label position occupied by each frame. Even positions are
    /// blanks; position `2i + 1` is transcript character `i`.
    pub states: Vec<usize>,
    /// Natural-log probability of the path.
    pub log_score: f64,
}

/// Frames needed to emit `chars`: one per character plus one blank between
/// each pair of equal neighbours.
pub fn min_frames(chars: &[usize]) -> usize {
    chars.len() + chars.windows(2).filter(|w| w[0] == w[1]).count()
}

fn log_prob(p: f32) -> f64 {
    (p as f64).ln().max(LOG_FLOOR)
}

/// Viterbi forced alignment of `transcript` against `posteriors`.
///
/// Transitions follow the usual CTC rules: stay, advance by one, or skip a
/// blank between two different characters. Among equally scored
/// predecessors the order of preference is stay, advance by one, skip, so
/// characters keep the longest possible frame runs. At the last frame a tie
/// between ending on the final character and the trailing blank goes to the
/// character.
pub fn forced_align(
    posteriors: &PosteriorMatrix,
    transcript: &str,
    alphabet: &Alphabet,
) -> Result<Alignment> {
    if posteriors.columns() != alphabet.len() + 1 {
        return Err(Error::invalid(format!(
            "posteriors have {} columns but the alphabet needs {}",
            posteriors.columns(),
            alphabet.len() + 1
        )));
    }
    if transcript.is_empty() {
        return Err(Error::InvalidTranscript("transcript is empty".into()));
    }
    let chars = transcript
        .chars()
        .map(|c| {
            alphabet.index_of(c).ok_or_else(|| {
                Error::InvalidTranscript(format!("character {c:?} is not in the alphabet"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let frames = posteriors.frames();
    let needed = min_frames(&chars);
    if frames < needed {
        return Err(Error::AlignmentInfeasible {
            frames,
            chars: chars.len(),
            min_frames: needed,
        });
    }

    let blank = alphabet.blank();
    let labels: Vec<usize> = (0..2 * chars.len() + 1)
        .map(|s| if s % 2 == 0 { blank } else { chars[s / 2] })
        .collect();
    let n_states = labels.len();

    let mut score = vec![f64::NEG_INFINITY; n_states];
    let mut next = vec![f64::NEG_INFINITY; n_states];
    let mut back = vec![0usize; frames * n_states];

    score[0] = log_prob(posteriors.prob(0, labels[0]));
    score[1] = log_prob(posteriors.prob(0, labels[1]));

    for t in 1..frames {
        let row = posteriors.row(t);
        for s in 0..n_states {
            let mut best = score[s];
            let mut from = s;
            if s >= 1 && score[s - 1] > best {
                best = score[s - 1];
                from = s - 1;
            }
            if s >= 2 && labels[s] != blank && labels[s] != labels[s - 2] && score[s - 2] > best {
                best = score[s - 2];
                from = s - 2;
            }
            next[s] = if best == f64::NEG_INFINITY {
                best
            } else {
                best + log_prob(row[labels[s]])
            };
            back[t * n_states + s] = from;
        }
        std::mem::swap(&mut score, &mut next);
    }

    let last_char = n_states - 2;
    let mut state = if score[n_states - 1] > score[last_char] {
        n_states - 1
    } else {
        last_char
    };
    let log_score = score[state];
    if log_score == f64::NEG_INFINITY {
        return Err(Error::AlignmentInfeasible {
            frames,
            chars: chars.len(),
            min_frames: needed,
        });
    }

    let mut states = vec![0; frames];
    for t in (0..frames).rev() {
        states[t] = state;
        state = back[t * n_states + state];
    }
    Ok(Alignment { states, log_score })
}

/// Pixel ranges `[start, end)` of each transcript character.
///
/// Frame extents are scaled by `width / frames`. Blank frames between two
/// characters are split at their midpoint, leading blanks go to the first
/// character and trailing blanks to the last, so the ranges tile
/// `[0, width)`. When the image is too narrow for every character to get
/// its own column after flooring, boundaries are nudged apart by whole
/// pixels.
pub fn frames_to_pixels(states: &[usize], frames: usize, width: u32) -> Result<Vec<(u32, u32)>> {
    if states.len() != frames || frames == 0 {
        return Err(Error::invalid(format!(
            "assignment has {} frames, expected {frames}",
            states.len()
        )));
    }
    let n_chars = states.iter().max().copied().unwrap_or(0).div_ceil(2);
    let mut first = vec![usize::MAX; n_chars];
    let mut last = vec![0usize; n_chars];
    for (t, &s) in states.iter().enumerate() {
        if s % 2 == 1 {
            let i = s / 2;
            first[i] = first[i].min(t);
            last[i] = t;
        }
    }
    if n_chars == 0 || first.contains(&usize::MAX) {
        return Err(Error::invalid("assignment skips a transcript character"));
    }
    if (width as usize) < n_chars {
        return Err(Error::invalid(format!(
            "image width {width} cannot hold {n_chars} characters"
        )));
    }

    let (w, denom) = (width as u64, 2 * frames as u64);
    let mut cuts: Vec<u32> = Vec::with_capacity(n_chars + 1);
    cuts.push(0);
    for i in 1..n_chars {
        let mid2 = (last[i - 1] + 1 + first[i]) as u64;
        cuts.push((mid2 * w / denom) as u32);
    }
    cuts.push(width);
    for i in 1..n_chars {
        cuts[i] = cuts[i].max(cuts[i - 1] + 1);
    }
    for i in (1..n_chars).rev() {
        cuts[i] = cuts[i].min(cuts[i + 1] - 1);
    }
    Ok(cuts.windows(2).map(|c| (c[0], c[1])).collect())
}
