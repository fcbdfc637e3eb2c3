//! Stream parameters and Kadane-style interval summaries.
//!
//! An [`IntervalSummary`] is the constant-size state the classic Kadane
//! recurrence keeps for one interval `[start, t]`: the maximum suffix sum
//! and the maximum subarray sum, both clamped at zero (the empty subarray
//! is allowed). Appending one element on the right updates both in O(1),
//! which is what lets a sketch maintain many candidate intervals cheaply.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest permitted value of `n * value_bound`.
///
/// Interval sums are kept in `i64`. The leading expired instance of a
/// sketch may span a few multiples of the window, so an 8-bit safety
/// margin is enforced on top of the window-sum bound; every addition is
/// additionally checked so an overflow can never pass silently.
pub const MAX_WINDOW_SUM: i64 = i64::MAX >> 8;

/// Stream and accuracy parameters shared by all sketches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    n: u64,
    eps: f64,
    value_bound: i64,
}

impl Params {
    /// Validate and build parameters.
    ///
    /// Requires `n >= 1`, `0 < eps < 1`, `value_bound >= 1`, and
    /// `n * value_bound <= MAX_WINDOW_SUM` so no maintained sum can
    /// overflow. Fails loudly otherwise.
    pub fn new(n: u64, eps: f64, value_bound: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("window size n must be at least 1".into()));
        }
        if !(eps.is_finite() && 0.0 < eps && eps < 1.0) {
            return Err(Error::InvalidParams(format!(
                "eps must lie strictly between 0 and 1, got {eps}"
            )));
        }
        if value_bound < 1 {
            return Err(Error::InvalidParams(format!(
                "value bound must be at least 1, got {value_bound}"
            )));
        }
        if (n as i128) * (value_bound as i128) > MAX_WINDOW_SUM as i128 {
            return Err(Error::InvalidParams(format!(
                "n * value_bound = {} * {} exceeds the supported sum range {}",
                n, value_bound, MAX_WINDOW_SUM
            )));
        }
        Ok(Params { n, eps, value_bound })
    }

    /// Window size.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Relative-error target.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Largest permitted absolute element value.
    pub fn value_bound(&self) -> i64 {
        self.value_bound
    }

    /// Reject elements outside `[-value_bound, value_bound]`.
    pub(crate) fn check_value(&self, value: i64, position: u64) -> Result<()> {
        if value.checked_abs().map_or(true, |a| a > self.value_bound) {
            return Err(Error::ValueOutOfBounds {
                value,
                position,
                bound: self.value_bound,
            });
        }
        Ok(())
    }
}

/// One stream element: a signed value at a 1-based absolute position.
///
/// Positions presented to a sketch must increase by exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamElement {
    /// Signed element value.
    pub value: i64,
    /// 1-based absolute stream position.
    pub position: u64,
}

impl StreamElement {
    /// Build an element.
    pub fn new(value: i64, position: u64) -> Self {
        StreamElement { value, position }
    }
}

/// Kadane state for one interval `[start, t]`.
///
/// `suffix_max` is the largest sum of a suffix of the interval and
/// `max_subarray` the largest sum of any contiguous run, both clamped at
/// zero because the empty subarray counts. `0 <= suffix_max <=
/// max_subarray` always holds, and `max_subarray` never decreases as the
/// interval grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSummary {
    start: u64,
    suf: i64,
    f: i64,
}

impl IntervalSummary {
    /// Summary of the one-element interval `[position, position]`.
    pub fn singleton(value: i64, position: u64) -> Self {
        let clamped = value.max(0);
        IntervalSummary {
            start: position,
            suf: clamped,
            f: clamped,
        }
    }

    /// Extend the interval by one element on the right.
    pub fn append(&mut self, value: i64) {
        // suf is nonnegative, so the sum can only overflow upward.
        self.suf = self
            .suf
            .checked_add(value)
            .expect("interval sum overflowed i64; value bound too large")
            .max(0);
        self.f = self.f.max(self.suf);
    }

    /// Reassemble a summary from raw parts (snapshot decoding and tests).
    pub(crate) fn from_parts(start: u64, suf: i64, f: i64) -> Self {
        IntervalSummary { start, suf, f }
    }

    /// First position covered by the interval.
    pub fn start(&self) -> u64 {
        self.start
    }

    /// Maximum suffix sum of the interval, clamped at zero.
    pub fn suffix_max(&self) -> i64 {
        self.suf
    }

    /// Maximum subarray sum of the interval, clamped at zero.
    pub fn max_subarray(&self) -> i64 {
        self.f
    }
}

/// Maximum subarray sum of `values` with the empty subarray allowed, so
/// the result is never negative. One pass of the Kadane recurrence.
pub fn kadane_max_subarray(values: &[i64]) -> i64 {
    let mut suf = 0i64;
    let mut best = 0i64;
    for &x in values {
        suf = (suf + x).max(0);
        best = best.max(suf);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_max_subarray, brute_suffix_max};
    use proptest::prelude::*;

    #[test]
    fn params_validate_their_ranges() {
        assert!(Params::new(10, 0.1, 100).is_ok());
        assert!(Params::new(0, 0.1, 100).is_err());
        assert!(Params::new(10, 0.0, 100).is_err());
        assert!(Params::new(10, 1.0, 100).is_err());
        assert!(Params::new(10, f64::NAN, 100).is_err());
        assert!(Params::new(10, 0.1, 0).is_err());
        assert!(Params::new(10, 0.1, -5).is_err());
    }

    #[test]
    fn params_reject_window_sums_that_could_overflow() {
        assert!(Params::new(1, 0.1, MAX_WINDOW_SUM).is_ok());
        assert!(Params::new(2, 0.1, MAX_WINDOW_SUM).is_err());
        assert!(Params::new(u64::MAX, 0.1, 2).is_err());
    }

    #[test]
    fn params_reject_out_of_bound_values() {
        let p = Params::new(10, 0.1, 5).unwrap();
        assert!(p.check_value(5, 1).is_ok());
        assert!(p.check_value(-5, 1).is_ok());
        assert!(p.check_value(6, 1).is_err());
        assert!(p.check_value(-6, 1).is_err());
        assert!(p.check_value(i64::MIN, 1).is_err());
    }

    #[test]
    fn singleton_clamps_at_zero() {
        let s = IntervalSummary::singleton(5, 3);
        assert_eq!((s.start(), s.suffix_max(), s.max_subarray()), (3, 5, 5));

        let s = IntervalSummary::singleton(-2, 1);
        assert_eq!((s.start(), s.suffix_max(), s.max_subarray()), (1, 0, 0));

        let s = IntervalSummary::singleton(0, 9);
        assert_eq!((s.start(), s.suffix_max(), s.max_subarray()), (9, 0, 0));
    }

    #[test]
    fn append_follows_the_recurrence() {
        // Folding (2, -1, 3): suffix maxima 2, 1, 4; best 2, 2, 4.
        let mut s = IntervalSummary::singleton(2, 1);
        s.append(-1);
        assert_eq!((s.suffix_max(), s.max_subarray()), (1, 2));
        s.append(3);
        assert_eq!((s.suffix_max(), s.max_subarray()), (4, 4));
        assert_eq!(brute_max_subarray(&[2, -1, 3]), 4);

        // A deep negative clamps the suffix but not the best.
        let mut s = IntervalSummary::singleton(5, 7);
        s.append(-9);
        assert_eq!((s.suffix_max(), s.max_subarray()), (0, 5));
    }

    #[test]
    fn kadane_handles_empty_and_all_negative_inputs() {
        assert_eq!(kadane_max_subarray(&[]), 0);
        assert_eq!(kadane_max_subarray(&[-2, -5]), 0);
        assert_eq!(kadane_max_subarray(&[2, -1, 3, -4, 2]), 4);
        assert_eq!(brute_max_subarray(&[2, -1, 3, -4, 2]), 4);
    }

    proptest! {
        #[test]
        fn fold_matches_brute_force(values in prop::collection::vec(-3i64..=3, 0..=12)) {
            prop_assert_eq!(kadane_max_subarray(&values), brute_max_subarray(&values));
            if let Some((&first, rest)) = values.split_first() {
                let mut s = IntervalSummary::singleton(first, 1);
                for &x in rest {
                    s.append(x);
                }
                prop_assert_eq!(s.max_subarray(), brute_max_subarray(&values));
                prop_assert_eq!(s.suffix_max(), brute_suffix_max(&values));
            }
        }

        #[test]
        fn summary_invariants_hold_under_appends(
            first in -3i64..=3,
            rest in prop::collection::vec(-3i64..=3, 0..=12),
        ) {
            let mut s = IntervalSummary::singleton(first, 1);
            let mut prev_best = s.max_subarray();
            for &x in &rest {
                s.append(x);
                prop_assert!(0 <= s.suffix_max());
                prop_assert!(s.suffix_max() <= s.max_subarray());
                prop_assert!(s.max_subarray() >= prev_best, "best never decreases");
                prev_best = s.max_subarray();
            }
        }
    }
}
