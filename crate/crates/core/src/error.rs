use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    // media ingest
    #[error("cannot read {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("unsupported color format: {0}")]
    UnsupportedColorFormat(String),
    #[error("video {0} contains no frames")]
    EmptySequence(String),
    #[error("frame is {width}x{height}; both dimensions must be at least {min}")]
    DegenerateFrame { width: u32, height: u32, min: u32 },
    #[error("frame {index} is {found:?}, sequence is {expected:?}")]
    InconsistentFrameSize {
        index: usize,
        expected: (u32, u32),
        found: (u32, u32),
    },

    // feature backend
    #[error("failed to load feature graph: {0}")]
    GraphLoad(String),
    #[error("tap `{0}` does not name a graph tensor")]
    MissingTap(String),
    #[error("stage {stage}: expected {expected} channels, graph produces {found}")]
    ChannelMismatch {
        stage: usize,
        expected: usize,
        found: usize,
    },
    #[error("inference failed: {0}")]
    InferenceFailure(String),
    #[error("invalid backend config: {0}")]
    BadBackendConfig(String),

    // frame quality
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pyramid mismatch: {0}")]
    PyramidMismatch(String),
    #[error("invalid similarity weights: {0}")]
    BadWeights(String),

    // temporal pooling
    #[error("score series is empty")]
    EmptySeries,
    #[error("score series contains a non-finite value at frame {0}")]
    NonFiniteScore(usize),
    #[error("invalid memory parameters: {0}")]
    BadMemoryParams(String),
    #[error("unknown pooling strategy `{0}`")]
    UnknownStrategy(String),
    #[error("bad pooling parameter: {0}")]
    BadStrategyParam(String),

    // subjective ratings
    #[error("subject `{0}` has zero rating variance")]
    DegenerateSubject(String),
    #[error("video `{0}` has no ratings")]
    InsufficientRatings(String),
    #[error("rating {score} by `{subject}` for `{video}` is outside [1, 5]")]
    RatingOutOfRange {
        subject: String,
        video: String,
        score: f64,
    },

    // benchmark evaluation
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("group `{group}` has {n} records, at least {min} required")]
    GroupTooSmall { group: String, n: usize, min: usize },

    // baselines
    #[error("image is {width}x{height}, metric needs at least {min}x{min}")]
    TooSmall { width: u32, height: u32, min: u32 },

    // pipeline / io
    #[error("reference has {reference} frames, distorted has {distorted}")]
    FrameCountMismatch { reference: usize, distorted: usize },
    #[error("{file}, row {row}: {reason}")]
    Schema {
        file: String,
        row: usize,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
