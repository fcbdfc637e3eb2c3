//! Sliding-window maximum subarray sum over *nonempty* subarrays.
//!
//! The nonempty statistic differs from the clamped one only when every
//! element of the window is negative, in which case it equals the single
//! largest element instead of zero. That value is `-g` for `g` the
//! smallest in-window magnitude, so the composite estimator runs the
//! clamped sketch alongside a tiny bucketed minimum tracker and picks a
//! side per query:
//!
//! * some in-window element is `>= 0` — the nonempty and clamped values
//!   coincide, and the sketch answers within its usual one-sided factor;
//! * all in-window elements are negative — the tracker's smallest active
//!   bucket lower-bounds `g`, and `-threshold` answers within the same
//!   relative error, overestimating (shrinking toward zero) instead of
//!   underestimating.
//!
//! Which side applies is decided exactly by remembering the position of
//! the most recent nonnegative element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{floor_mul, le_fraction};
use crate::sketch::{PruneRule, SketchSize, SketchState};
use crate::summary::{Params, StreamElement};

/// Whether `estimate` approximates the signed value `exact` to relative
/// error `eps`, never overshooting in magnitude: the estimate has the
/// same sign and `(1 - eps) * |exact| <= |estimate| <= |exact|`. Decided
/// in exact integer arithmetic.
pub fn within_extended_error(estimate: i64, exact: i64, eps: f64) -> bool {
    if exact >= 0 {
        0 <= estimate && estimate <= exact && le_fraction(exact - estimate, eps, exact)
    } else {
        exact <= estimate && estimate < 0 && le_fraction(estimate - exact, eps, -exact)
    }
}

/// Bucketed tracker for the smallest magnitude among recent negative
/// elements.
///
/// Magnitudes `1..=bound` are split into buckets at thresholds
/// `b_0 = 1` and `b_{i+1} = b_i + max(1, floor(eps * b_i))`, so
/// consecutive thresholds stay within a `(1 + eps)` ratio while small
/// magnitudes get exact singleton buckets. Each bucket remembers the
/// most recent stream position that hit it; the smallest bucket with an
/// in-window mark is the bucket of the in-window minimum magnitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinTracker {
    eps: f64,
    bound: i64,
    thresholds: Vec<i64>,
    marks: Vec<Option<u64>>,
}

impl MinTracker {
    /// Tracker for magnitudes in `1..=bound`.
    pub fn new(eps: f64, bound: i64) -> Result<Self> {
        if !(eps.is_finite() && 0.0 < eps && eps < 1.0) {
            return Err(Error::InvalidParams(format!(
                "tracker eps must lie strictly between 0 and 1, got {eps}"
            )));
        }
        if bound < 1 {
            return Err(Error::InvalidParams(format!(
                "tracker bound must be at least 1, got {bound}"
            )));
        }
        let thresholds = Self::build_thresholds(eps, bound);
        let marks = vec![None; thresholds.len()];
        Ok(MinTracker {
            eps,
            bound,
            thresholds,
            marks,
        })
    }

    fn build_thresholds(eps: f64, bound: i64) -> Vec<i64> {
        let mut thresholds = Vec::new();
        let mut b: i64 = 1;
        while b <= bound {
            thresholds.push(b);
            b += floor_mul(eps, b).max(1);
        }
        thresholds
    }

    /// Bucket boundaries, ascending; bucket `i` covers
    /// `thresholds[i] ..= thresholds[i+1] - 1`.
    pub fn thresholds(&self) -> &[i64] {
        &self.thresholds
    }

    /// Number of buckets.
    pub fn bucket_count(&self) -> usize {
        self.thresholds.len()
    }

    /// Most recent mark per bucket, aligned with [`thresholds`](Self::thresholds).
    pub fn marks(&self) -> &[Option<u64>] {
        &self.marks
    }

    /// Index of the bucket containing `magnitude`.
    pub fn bucket_index(&self, magnitude: i64) -> Result<usize> {
        if magnitude < 1 || magnitude > self.bound {
            return Err(Error::MagnitudeOutOfRange {
                magnitude,
                bound: self.bound,
            });
        }
        Ok(self.thresholds.partition_point(|&b| b <= magnitude) - 1)
    }

    /// Record that `magnitude` was observed at stream position `position`.
    pub fn mark(&mut self, magnitude: i64, position: u64) -> Result<()> {
        let bucket = self.bucket_index(magnitude)?;
        self.marks[bucket] = Some(position);
        Ok(())
    }

    /// Smallest bucket whose most recent mark lies within the length-`n`
    /// window ending at `now`, if any.
    pub fn smallest_active(&self, now: u64, n: u64) -> Option<usize> {
        self.marks
            .iter()
            .position(|mark| mark.map_or(false, |p| p + n > now))
    }

    fn from_parts(
        eps: f64,
        bound: i64,
        thresholds: Vec<i64>,
        marks: Vec<Option<u64>>,
    ) -> Result<Self> {
        let tracker = MinTracker::new(eps, bound)?;
        if thresholds != tracker.thresholds {
            return Err(Error::SnapshotDecode(format!(
                "tracker thresholds do not match eps {eps} and bound {bound}"
            )));
        }
        if marks.len() != thresholds.len() {
            return Err(Error::SnapshotDecode(format!(
                "tracker has {} thresholds but {} marks",
                thresholds.len(),
                marks.len()
            )));
        }
        Ok(MinTracker {
            eps,
            bound,
            thresholds,
            marks,
        })
    }
}

/// Composite estimator for the nonempty sliding-window maximum subarray
/// sum: clamped sketch plus minimum-magnitude tracker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonemptyState {
    sketch: SketchState,
    tracker: MinTracker,
    last_nonneg: Option<u64>,
}

impl NonemptyState {
    /// New estimator using the refined prune rule at the params' `eps`.
    pub fn new(params: Params) -> Result<Self> {
        let eps = params.eps();
        let tracker = MinTracker::new(eps, params.value_bound())?;
        let sketch = SketchState::new(params, PruneRule::Refined { eps })?;
        Ok(NonemptyState {
            sketch,
            tracker,
            last_nonneg: None,
        })
    }

    /// Stream parameters.
    pub fn params(&self) -> &Params {
        self.sketch.params()
    }

    /// Number of elements processed so far.
    pub fn now(&self) -> u64 {
        self.sketch.now()
    }

    /// The underlying clamped sketch.
    pub fn sketch(&self) -> &SketchState {
        &self.sketch
    }

    /// The underlying magnitude tracker.
    pub fn tracker(&self) -> &MinTracker {
        &self.tracker
    }

    /// Position of the most recent nonnegative element, if any.
    pub fn last_nonneg(&self) -> Option<u64> {
        self.last_nonneg
    }

    /// Process the next stream element.
    pub fn update(&mut self, value: i64) -> Result<()> {
        self.sketch.update(value)?;
        let position = self.sketch.now();
        if value >= 0 {
            self.last_nonneg = Some(position);
        } else {
            self.tracker.mark(-value, position)?;
        }
        Ok(())
    }

    /// As [`update`](Self::update), checking the element's position.
    pub fn update_element(&mut self, element: StreamElement) -> Result<()> {
        if element.position != self.now() + 1 {
            return Err(Error::PositionSkew {
                expected: self.now() + 1,
                got: element.position,
            });
        }
        self.update(element.value)
    }

    /// Whether the current window contains only negative elements. Exact:
    /// decided by the position of the most recent nonnegative element.
    pub fn in_negative_regime(&self) -> bool {
        let now = self.now();
        now >= 1
            && !self
                .last_nonneg
                .map_or(false, |p| p + self.params().n() > now)
    }

    /// Estimate of the window's nonempty maximum subarray sum, or `None`
    /// before the first element. Satisfies [`within_extended_error`] at
    /// the params' `eps` against the exact value.
    pub fn query(&self) -> Option<i64> {
        if self.now() == 0 {
            return None;
        }
        if self.in_negative_regime() {
            let bucket = self
                .tracker
                .smallest_active(self.now(), self.params().n())
                .expect("an all-negative window marks at least one bucket");
            Some(-self.tracker.thresholds[bucket])
        } else {
            Some(self.sketch.query())
        }
    }

    /// Sketch size plus one tracked position per bucket.
    pub fn size(&self) -> SketchSize {
        let sketch = self.sketch.size();
        SketchSize {
            instances: sketch.instances,
            bits_estimate: sketch.bits_estimate + 64 * (self.tracker.bucket_count() as u64 + 1),
        }
    }

    /// Verify the sketch invariants plus tracker/regime bookkeeping.
    pub fn check_invariants(&self) -> Result<()> {
        self.sketch.check_invariants()?;
        let now = self.now();
        let fail = |message: String| Err(Error::InvariantViolation { t: now, message });
        let rebuilt = MinTracker::build_thresholds(self.tracker.eps, self.tracker.bound);
        if self.tracker.thresholds != rebuilt {
            return fail("tracker thresholds do not match their recurrence".into());
        }
        if self.tracker.marks.len() != self.tracker.thresholds.len() {
            return fail("tracker mark and threshold counts differ".into());
        }
        for (i, mark) in self.tracker.marks.iter().enumerate() {
            if let Some(p) = *mark {
                if p == 0 || p > now {
                    return fail(format!("bucket {i} marked at position {p} outside [1, {now}]"));
                }
            }
        }
        if let Some(p) = self.last_nonneg {
            if p == 0 || p > now {
                return fail(format!("nonnegative seen at position {p} outside [1, {now}]"));
            }
        }
        if self.in_negative_regime()
            && self
                .tracker
                .smallest_active(now, self.params().n())
                .is_none()
        {
            return fail("negative regime with no active bucket".into());
        }
        Ok(())
    }

    /// Reassemble from raw parts (snapshot decoding), validating the
    /// tracker against the sketch parameters and all invariants.
    pub(crate) fn from_parts(
        sketch: SketchState,
        thresholds: Vec<i64>,
        marks: Vec<Option<u64>>,
        last_nonneg: Option<u64>,
    ) -> Result<Self> {
        let eps = sketch.params().eps();
        let bound = sketch.params().value_bound();
        let tracker = MinTracker::from_parts(eps, bound, thresholds, marks)?;
        let state = NonemptyState {
            sketch,
            tracker,
            last_nonneg,
        };
        state.check_invariants()?;
        Ok(state)
    }
}
