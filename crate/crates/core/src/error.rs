use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("alignment infeasible: {frames} frames cannot hold transcript of {chars} characters ({min_frames} frames required)")]
    AlignmentInfeasible {
        frames: usize,
        chars: usize,
        min_frames: usize,
    },

    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),

    #[error("corrupt boundaries for line {line_id}: {reason}")]
    CorruptBoundary { line_id: String, reason: String },

    #[error("unsynthesizable line: no fragments for {}", format_chars(.missing))]
    UnsynthesizableLine { missing: Vec<char> },

    #[error("undefined denominator: {0}")]
    UndefinedDenominator(&'static str),

    #[error("format error in {}: {reason}", .path.display())]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

fn format_chars(chars: &[char]) -> String {
    chars
        .iter()
        .map(|c| format!("{c:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}
