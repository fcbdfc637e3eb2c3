//! Exponential-histogram baseline: counting ones in a sliding window of
//! bits, after Datar, Gionis, Indyk and Motwani (2002).
//!
//! Ones are grouped into buckets of power-of-two sizes, at most `k + 1`
//! buckets per size with `k = ceil(1/eps)`. When a size overflows, its
//! two oldest buckets merge into one of twice the size, cascading upward,
//! so sizes run nonincreasing from oldest to newest and only
//! `O(k log n)` buckets exist. A bucket expires once its newest one
//! leaves the window; the surviving oldest bucket may straddle the window
//! boundary, which the query compensates for by subtracting half of its
//! size. The straddling slack is what limits the relative error to
//! `1/k <= eps`.
//!
//! This serves as a comparison point: it is the classic smooth-histogram
//! alternative for a statistic (a count) that is exactly additive, where
//! the much simpler bucket algebra applies. The maximum subarray sum has
//! no such algebra, which is what the interval-summary sketch works
//! around.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dyadic_parts, le_fraction};
use crate::sketch::SketchSize;

/// Whether `estimate` is within relative error `eps` of `exact`
/// (two-sided), decided in exact integer arithmetic.
pub fn within_relative_error(estimate: u64, exact: u64, eps: f64) -> bool {
    let diff = estimate.abs_diff(exact);
    diff <= i64::MAX as u64 && exact <= i64::MAX as u64 && le_fraction(diff as i64, eps, exact as i64)
}

/// A group of `size` ones whose most recent one arrived at `newest`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EhBucket {
    /// Number of ones in the bucket; always a power of two.
    pub size: u64,
    /// Stream position of the bucket's most recent one.
    pub newest: u64,
}

/// Exponential histogram counting ones over the last `n` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EhState {
    k: u64,
    n: u64,
    now: u64,
    /// Oldest first; sizes nonincreasing, timestamps increasing.
    buckets: Vec<EhBucket>,
}

impl EhState {
    /// Histogram for window length `n` at accuracy `eps`, using
    /// `k = ceil(1/eps)` computed exactly from the binary value of `eps`.
    pub fn new(n: u64, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && 0.0 < eps && eps < 1.0) {
            return Err(Error::InvalidParams(format!(
                "eps must lie strictly between 0 and 1, got {eps}"
            )));
        }
        let (m, e) = dyadic_parts(eps);
        if e >= 127 {
            return Err(Error::InvalidParams(format!(
                "eps {eps} is too small for the counting baseline"
            )));
        }
        let k = ((1u128 << e) + m as u128 - 1) / m as u128;
        if k > u128::from(u32::MAX) {
            return Err(Error::InvalidParams(format!(
                "eps {eps} requires more than 2^32 buckets per size"
            )));
        }
        Self::with_k(k as u64, n)
    }

    /// Histogram with an explicit per-size budget `k`.
    pub(crate) fn with_k(k: u64, n: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if n < 1 {
            return Err(Error::InvalidParams("window length must be at least 1".into()));
        }
        Ok(EhState {
            k,
            n,
            now: 0,
            buckets: Vec::new(),
        })
    }

    /// Per-size bucket budget.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// Window length.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of bits processed so far.
    pub fn now(&self) -> u64 {
        self.now
    }

    /// Buckets, oldest first.
    pub fn buckets(&self) -> &[EhBucket] {
        &self.buckets
    }

    /// Process the next bit; only `0` and `1` are accepted.
    pub fn update(&mut self, value: i64) -> Result<()> {
        if value != 0 && value != 1 {
            return Err(Error::NonBitElement { value });
        }
        self.now += 1;
        if value == 1 {
            self.buckets.push(EhBucket {
                size: 1,
                newest: self.now,
            });
            self.merge_overflows();
        }
        while self
            .buckets
            .first()
            .map_or(false, |b| b.newest + self.n <= self.now)
        {
            self.buckets.remove(0);
        }
        Ok(())
    }

    /// Cascade: whenever a size holds `k + 2` buckets, merge its two
    /// oldest into one bucket of twice the size, keeping the later of the
    /// two timestamps, and re-check the next size up.
    fn merge_overflows(&mut self) {
        let mut size = 1;
        loop {
            let first = self.buckets.iter().position(|b| b.size == size);
            let count = self.buckets.iter().filter(|b| b.size == size).count() as u64;
            if count <= self.k + 1 {
                return;
            }
            let i = first.expect("an overflowing size has a first bucket");
            let merged = EhBucket {
                size: size * 2,
                newest: self.buckets[i + 1].newest,
            };
            self.buckets[i] = merged;
            self.buckets.remove(i + 1);
            size *= 2;
        }
    }

    /// Estimated number of ones in the window: the total bucketed count
    /// minus half the straddling oldest bucket.
    pub fn query(&self) -> u64 {
        match self.buckets.first() {
            None => 0,
            Some(oldest) => {
                let total: u64 = self.buckets.iter().map(|b| b.size).sum();
                total - oldest.size / 2
            }
        }
    }

    /// Bucket count and an estimate of the bits held (two words each).
    pub fn size(&self) -> SketchSize {
        let q = self.buckets.len();
        SketchSize {
            instances: q,
            bits_estimate: q as u64 * 2 * 64,
        }
    }

    /// Verify the structural invariants of the bucket list.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvariantViolation {
                t: self.now,
                message: format!("{message}; state: {self:?}"),
            })
        };
        for (i, b) in self.buckets.iter().enumerate() {
            if !b.size.is_power_of_two() {
                return fail(format!("bucket {i} size {} is not a power of two", b.size));
            }
            if b.newest == 0 || b.newest > self.now {
                return fail(format!("bucket {i} timestamp {} outside [1, now]", b.newest));
            }
            if b.newest + self.n <= self.now {
                return fail(format!("bucket {i} has expired but was kept"));
            }
        }
        for w in self.buckets.windows(2) {
            if w[0].size < w[1].size {
                return fail("bucket sizes increase from old to new".into());
            }
            if w[0].newest >= w[1].newest {
                return fail("bucket timestamps not strictly increasing".into());
            }
        }
        let mut counts = std::collections::HashMap::new();
        for b in &self.buckets {
            *counts.entry(b.size).or_insert(0u64) += 1;
        }
        for (size, count) in counts {
            if count > self.k + 1 {
                return fail(format!("{count} buckets of size {size} exceed budget {}", self.k + 1));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::WindowBuffer;
    use proptest::prelude::*;

    fn sizes(eh: &EhState) -> Vec<u64> {
        eh.buckets().iter().map(|b| b.size).collect()
    }

    #[test]
    fn k_is_the_exact_ceiling_of_inverse_eps() {
        assert_eq!(EhState::new(100, 0.5).unwrap().k(), 2);
        assert_eq!(EhState::new(100, 0.1).unwrap().k(), 10);
        assert_eq!(EhState::new(100, 0.02).unwrap().k(), 50);
        assert_eq!(EhState::new(100, 0.9).unwrap().k(), 2);
        // 0.3 as a double is slightly below 3/10, so 1/eps is slightly
        // above 10/3 and the exact ceiling is still 4.
        assert_eq!(EhState::new(100, 0.3).unwrap().k(), 4);
        assert!(EhState::new(100, 0.0).is_err());
        assert!(EhState::new(100, 1.0).is_err());
        assert!(EhState::new(0, 0.5).is_err());
    }

    #[test]
    fn three_ones_merge_at_unit_budget() {
        let mut eh = EhState::with_k(1, 100).unwrap();
        for _ in 0..3 {
            eh.update(1).unwrap();
        }
        assert_eq!(sizes(&eh), vec![2, 1]);
        let newest: Vec<u64> = eh.buckets().iter().map(|b| b.newest).collect();
        assert_eq!(newest, vec![2, 3], "merged bucket keeps the later timestamp");
    }

    #[test]
    fn merges_cascade_upward() {
        let mut eh = EhState::with_k(1, 100).unwrap();
        for _ in 0..7 {
            eh.update(1).unwrap();
            eh.check_invariants().unwrap();
        }
        assert_eq!(sizes(&eh), vec![4, 2, 1]);
        let newest: Vec<u64> = eh.buckets().iter().map(|b| b.newest).collect();
        assert_eq!(newest, vec![4, 6, 7]);
    }

    #[test]
    fn query_subtracts_half_the_oldest_bucket() {
        let mut eh = EhState::with_k(1, 100).unwrap();
        for _ in 0..7 {
            eh.update(1).unwrap();
        }
        // Buckets (4, 2, 1): total 7, oldest half 2.
        assert_eq!(eh.query(), 5);
    }

    #[test]
    fn zeros_advance_time_and_expire_buckets() {
        let mut eh = EhState::with_k(2, 4).unwrap();
        eh.update(1).unwrap();
        for _ in 0..3 {
            eh.update(0).unwrap();
            assert_eq!(eh.query(), 1);
        }
        eh.update(0).unwrap();
        assert_eq!(eh.query(), 0, "the lone one left the window");
        assert!(eh.buckets().is_empty());
    }

    #[test]
    fn non_bits_are_rejected() {
        let mut eh = EhState::new(10, 0.5).unwrap();
        assert!(matches!(eh.update(2), Err(Error::NonBitElement { value: 2 })));
        assert!(matches!(eh.update(-1), Err(Error::NonBitElement { value: -1 })));
        assert_eq!(eh.now(), 0);
    }

    #[test]
    fn bucket_count_stays_logarithmic() {
        let mut eh = EhState::new(1 << 12, 0.1).unwrap();
        for _ in 0..(1 << 14) {
            eh.update(1).unwrap();
        }
        let cap = (eh.k() + 1) * (64 - (1u64 << 12).leading_zeros() as u64 + 2);
        assert!(
            (eh.buckets().len() as u64) <= cap,
            "{} buckets exceed cap {cap}",
            eh.buckets().len()
        );
    }

    #[test]
    fn relative_error_predicate_hand_cases() {
        assert!(within_relative_error(9, 10, 0.1)); // tie fires
        assert!(!within_relative_error(8, 10, 0.1));
        assert!(within_relative_error(11, 10, 0.1)); // two-sided
        assert!(!within_relative_error(12, 10, 0.1));
        assert!(within_relative_error(0, 0, 0.1));
        assert!(!within_relative_error(1, 0, 0.1));
    }

    proptest! {
        #[test]
        fn random_bit_streams_stay_within_eps(
            n in 1u64..=16,
            eps_id in 0usize..3,
            bits in prop::collection::vec(0i64..=1, 1..=200),
        ) {
            let eps = [0.5, 0.2, 0.1][eps_id];
            let mut eh = EhState::new(n, eps).unwrap();
            let mut w = WindowBuffer::new(n);
            for &b in &bits {
                eh.update(b).unwrap();
                w.push(b);
                eh.check_invariants().unwrap();
                let exact = w.count_ones().unwrap();
                prop_assert!(
                    within_relative_error(eh.query(), exact, eps),
                    "estimate {} vs exact {} at eps {}", eh.query(), exact, eps
                );
            }
        }

        #[test]
        fn dense_streams_match_at_small_windows(
            bits in prop::collection::vec(0i64..=1, 1..=120),
        ) {
            // k = 2 and n = 2: at most two ones fit in the window, so the
            // estimate must be exact (any straddling bucket has size 1).
            let mut eh = EhState::new(2, 0.5).unwrap();
            let mut w = WindowBuffer::new(2);
            for &b in &bits {
                eh.update(b).unwrap();
                w.push(b);
                prop_assert_eq!(eh.query(), w.count_ones().unwrap());
            }
        }
    }
}
