//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by sketch construction, updates, queries, stream
/// loading, and snapshot decoding.
#[derive(Debug, Error)]
pub enum Error {
    /// Construction-time parameter validation failed.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An element's absolute value exceeds the configured value bound.
    #[error("element {value} at position {position} exceeds the value bound {bound}")]
    ValueOutOfBounds {
        /// Offending element value.
        value: i64,
        /// 1-based stream position of the element.
        position: u64,
        /// Configured bound on absolute element values.
        bound: i64,
    },

    /// A stream element arrived with a position other than `now + 1`.
    #[error("element position {got} is not the next position {expected}")]
    PositionSkew {
        /// The position the sketch expected next.
        expected: u64,
        /// The position that was presented.
        got: u64,
    },

    /// A magnitude handed to the minimum tracker is outside `[1, bound]`.
    #[error("magnitude {magnitude} outside the tracked range [1, {bound}]")]
    MagnitudeOutOfRange {
        /// Offending magnitude.
        magnitude: i64,
        /// Largest tracked magnitude.
        bound: i64,
    },

    /// A bit-only operation met an element that is neither 0 nor 1.
    #[error("window contains non-bit element {value}")]
    NonBitElement {
        /// Offending element value.
        value: i64,
    },

    /// A stream spec string does not match the grammar.
    #[error("invalid stream spec `{spec}`: {reason}")]
    InvalidStreamSpec {
        /// The spec string as given.
        spec: String,
        /// What was wrong with it.
        reason: String,
    },

    /// A stream file line failed to parse as a decimal integer.
    #[error("{path}:{line}: cannot parse `{content}` as an integer")]
    StreamParse {
        /// File the stream was read from.
        path: PathBuf,
        /// 1-based line number of the offending line.
        line: usize,
        /// The offending line content.
        content: String,
    },

    /// A stream file holds fewer values than the requested length.
    #[error("stream file {path} has {lines} values, need {need}")]
    StreamTooShort {
        /// File the stream was read from.
        path: PathBuf,
        /// Number of values in the file.
        lines: usize,
        /// Number of values requested.
        need: u64,
    },

    /// A stream file could not be read.
    #[error("cannot read {path}: {source}")]
    StreamIo {
        /// File the stream was read from.
        path: PathBuf,
        /// Underlying I/O error.
        #[source]
        source: std::io::Error,
    },

    /// A snapshot byte string or JSON document failed to decode.
    #[error("snapshot decode failed: {0}")]
    SnapshotDecode(String),

    /// A maintained invariant does not hold; carries a full diagnostic.
    #[error("invariant violated at t={t}: {message}")]
    InvariantViolation {
        /// Stream position at which the violation was detected.
        t: u64,
        /// Human-readable description plus state dump.
        message: String,
    },

    /// A run configuration is semantically invalid.
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
