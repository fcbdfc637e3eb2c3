//! Streaming estimators for the maximum subarray sum over a sliding
//! window, with exact references, reproducible input streams, and an
//! experiment harness.
//!
//! The centerpiece is [`SketchState`]: a smooth histogram of Kadane
//! interval summaries that answers the window's maximum subarray sum
//! (clamped at zero) within a one-sided `(1 - eps)` factor, using space
//! that grows with `log` of the window instead of the window itself.
//! Queries are exact until the first window fills. Around it:
//!
//! * [`NonemptyState`] extends the estimate to the nonempty variant of
//!   the statistic, which can be negative on all-negative windows;
//! * [`EhState`] is the classic exponential-histogram bit counter, the
//!   comparison baseline from the sliding-window literature;
//! * [`WindowBuffer`] and the `brute_*` functions are exact references
//!   used throughout the tests and the harness;
//! * [`StreamSpec`] generates reproducible experiment streams;
//! * [`snapshot`] persists estimator states with validating decoders;
//! * [`harness`] runs estimator-versus-exact comparisons and benchmarks.
//!
//! # Example
//!
//! ```
//! use winsum::{Params, PruneRule, SketchState, WindowBuffer};
//!
//! let params = Params::new(1000, 0.5, 1000).unwrap();
//! let mut sketch = SketchState::new(params, PruneRule::Refined { eps: 0.5 }).unwrap();
//! let mut exact = WindowBuffer::new(1000);
//!
//! for t in 0..10_000i64 {
//!     let value = (t * 37 % 1001) - 500; // anything in [-1000, 1000]
//!     sketch.update(value).unwrap();
//!     exact.push(value);
//!
//!     let estimate = sketch.query();
//!     let answer = exact.max_subarray();
//!     assert!(estimate <= answer);
//!     assert!(2 * estimate >= answer, "within the (1 - eps) factor");
//! }
//! // The window holds 1000 elements; the sketch keeps two orders of
//! // magnitude less.
//! assert!(sketch.size().instances < 100);
//! ```

pub mod eh;
pub mod error;
pub mod gen;
pub mod harness;
pub mod nonempty;
mod numeric;
pub mod oracle;
pub mod sketch;
pub mod snapshot;
pub mod summary;

pub use eh::{within_relative_error, EhBucket, EhState};
pub use error::{Error, Result};
pub use gen::{GeneratedStream, SplitMix64, StreamKind, StreamSpec};
pub use harness::{
    run_bench, run_compare, write_bench_csv, write_csv, write_json, Algo, BenchConfig,
    BenchPoint, BenchTarget, RunConfig, RunReport, RunSummary, StepRecord,
};
pub use nonempty::{within_extended_error, MinTracker, NonemptyState};
pub use oracle::{
    brute_max_subarray, brute_max_subarray_nonempty, brute_prefix_max, brute_suffix_max,
    MssWindow, WindowBuffer,
};
pub use sketch::{PruneRule, SketchSize, SketchState};
pub use summary::{kadane_max_subarray, IntervalSummary, Params, StreamElement, MAX_WINDOW_SUM};
