use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed line in a subgraph file.
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("no functional units")]
    NoUnits,

    #[error("line {line}: functional unit has no input objects")]
    NoInputs { line: usize },

    #[error("line {line}: functional unit has no output objects")]
    NoOutputs { line: usize },

    #[error("line {line}: end frame {end} precedes start frame {start}")]
    FrameOrder { line: usize, start: u64, end: u64 },

    /// Trace document does not match the schema; `path` points at the offending value.
    #[error("trace schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },

    #[error("segments[{segment}]: degenerate motion distribution")]
    DegenerateMotion { segment: usize },

    #[error("segments[{second}] overlaps or precedes segments[{first}]")]
    OverlappingSegments { first: usize, second: usize },

    #[error("segments[{segment}].frames[{frame}]: frame indices are not strictly increasing")]
    NonMonotoneFrames { segment: usize, frame: usize },

    #[error("taxonomy line {line}: {msg}")]
    Taxonomy { line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Probing produced no functional unit above the overlap threshold.
    #[error("no candidate functional units")]
    NoCandidates,

    #[error("video {video_id}: trace has {segments} segments but ground truth has {units} units")]
    SegmentMismatch {
        video_id: String,
        segments: usize,
        units: usize,
    },

    #[error("leave-one-out needs at least two videos, got {0}")]
    CorpusTooSmall(usize),
}
