//! Exact sliding-window ground truth.
//!
//! [`WindowBuffer`] stores the active window verbatim and recomputes every
//! statistic with a linear scan on demand. It exists to be obviously
//! correct, not fast: sketches are validated against it step by step. The
//! `brute_*` functions go one step further and enumerate subarrays
//! directly (quadratic), so even the linear scans have an independent
//! check on short inputs (intended for lengths up to about 64).

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Ring buffer holding exactly the last `min(t, n)` elements.
#[derive(Clone, Debug)]
pub struct WindowBuffer {
    buf: VecDeque<i64>,
    n: u64,
    now: u64,
}

impl WindowBuffer {
    /// Empty buffer for window size `n` (at least 1).
    pub fn new(n: u64) -> Self {
        assert!(n >= 1, "window size must be at least 1");
        WindowBuffer {
            buf: VecDeque::new(),
            n,
            now: 0,
        }
    }

    /// Append the next element, evicting the oldest once `n` are held.
    pub fn push(&mut self, value: i64) {
        self.now += 1;
        if self.buf.len() as u64 == self.n {
            self.buf.pop_front();
        }
        self.buf.push_back(value);
    }

    /// Number of elements processed so far.
    pub fn now(&self) -> u64 {
        self.now
    }

    /// Window size this buffer was built for.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of elements currently in the window.
    pub fn len(&self) -> usize {
        self.buf.len()
    }

    /// True before the first element arrives.
    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Window contents, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.buf.iter().copied()
    }

    /// Exact maximum subarray sum of the window, empty subarray allowed.
    pub fn max_subarray(&self) -> i64 {
        let (a, b) = self.buf.as_slices();
        let mut suf = 0i64;
        let mut best = 0i64;
        for &x in a.iter().chain(b) {
            suf = (suf + x).max(0);
            best = best.max(suf);
        }
        best
    }

    /// Exact maximum subarray sum over nonempty subarrays; `None` while
    /// the window is empty. Can be negative.
    pub fn max_subarray_nonempty(&self) -> Option<i64> {
        let (a, b) = self.buf.as_slices();
        let mut iter = a.iter().chain(b).copied();
        let first = iter.next()?;
        let mut run = first;
        let mut best = first;
        for x in iter {
            run = x.max(run + x);
            best = best.max(run);
        }
        Some(best)
    }

    /// Exact maximum suffix sum of the window, clamped at zero.
    pub fn suffix_max(&self) -> i64 {
        let (a, b) = self.buf.as_slices();
        let mut suf = 0i64;
        for &x in a.iter().chain(b) {
            suf = (suf + x).max(0);
        }
        suf
    }

    /// Exact maximum prefix sum of the window, clamped at zero.
    pub fn prefix_max(&self) -> i64 {
        let (a, b) = self.buf.as_slices();
        let mut sum = 0i64;
        let mut best = 0i64;
        for &x in a.iter().chain(b) {
            sum += x;
            best = best.max(sum);
        }
        best
    }

    /// Number of ones in the window; errors on any element not 0 or 1.
    pub fn count_ones(&self) -> Result<u64> {
        let mut count = 0u64;
        for x in self.iter() {
            match x {
                0 => {}
                1 => count += 1,
                other => return Err(Error::NonBitElement { value: other }),
            }
        }
        Ok(count)
    }
}

/// Brute-force maximum subarray sum (empty allowed): enumerate all starts
/// and ends.
pub fn brute_max_subarray(values: &[i64]) -> i64 {
    let mut best = 0i64;
    for i in 0..values.len() {
        let mut sum = 0i64;
        for &x in &values[i..] {
            sum += x;
            best = best.max(sum);
        }
    }
    best
}

/// Brute-force maximum subarray sum over nonempty subarrays.
pub fn brute_max_subarray_nonempty(values: &[i64]) -> Option<i64> {
    let mut best: Option<i64> = None;
    for i in 0..values.len() {
        let mut sum = 0i64;
        for &x in &values[i..] {
            sum += x;
            best = Some(best.map_or(sum, |b: i64| b.max(sum)));
        }
    }
    best
}

/// Brute-force maximum suffix sum, clamped at zero.
pub fn brute_suffix_max(values: &[i64]) -> i64 {
    let mut best = 0i64;
    for i in 0..values.len() {
        let sum: i64 = values[i..].iter().sum();
        best = best.max(sum);
    }
    best
}

/// Brute-force maximum prefix sum, clamped at zero.
pub fn brute_prefix_max(values: &[i64]) -> i64 {
    let mut best = 0i64;
    for i in 0..values.len() {
        let sum: i64 = values[..=i].iter().sum();
        best = best.max(sum);
    }
    best
}

/// Total, clamped prefix maximum, clamped suffix maximum and clamped
/// maximum subarray sum of a segment; combines associatively, which is
/// what lets [`MssWindow`] slide in amortized constant time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SegmentAgg {
    sum: i64,
    pre: i64,
    suf: i64,
    best: i64,
}

impl SegmentAgg {
    const EMPTY: SegmentAgg = SegmentAgg {
        sum: 0,
        pre: 0,
        suf: 0,
        best: 0,
    };

    fn leaf(value: i64) -> SegmentAgg {
        let clamped = value.max(0);
        SegmentAgg {
            sum: value,
            pre: clamped,
            suf: clamped,
            best: clamped,
        }
    }

    /// Aggregate of `self` followed by `right`.
    fn combine(self, right: SegmentAgg) -> SegmentAgg {
        SegmentAgg {
            sum: self.sum + right.sum,
            pre: self.pre.max(self.sum + right.pre),
            suf: right.suf.max(right.sum + self.suf),
            best: self.best.max(right.best).max(self.suf + right.pre),
        }
    }
}

/// Exact sliding-window maximum subarray sum in amortized constant time
/// per update, via the classic two-stack queue with running aggregates.
///
/// Gives the same answers as [`WindowBuffer::max_subarray`] (the tests
/// cross-check them) but supports long windows at full streaming speed,
/// which the heavyweight validation grids rely on.
#[derive(Clone, Debug)]
pub struct MssWindow {
    n: u64,
    len: u64,
    /// Older segment; each entry aggregates that element together with
    /// every younger element of the segment, so the top (last) entry
    /// covers the whole segment and popping it just exposes the next.
    front: Vec<SegmentAgg>,
    /// Newer segment in arrival order, plus its running aggregate.
    back: Vec<i64>,
    back_agg: SegmentAgg,
}

impl MssWindow {
    /// Empty window of size `n` (at least 1).
    pub fn new(n: u64) -> Self {
        assert!(n >= 1, "window size must be at least 1");
        MssWindow {
            n,
            len: 0,
            front: Vec::new(),
            back: Vec::new(),
            back_agg: SegmentAgg::EMPTY,
        }
    }

    /// Append the next element, evicting the oldest once `n` are held.
    pub fn push(&mut self, value: i64) {
        if self.len == self.n {
            self.pop_oldest();
        } else {
            self.len += 1;
        }
        self.back.push(value);
        self.back_agg = self.back_agg.combine(SegmentAgg::leaf(value));
    }

    fn pop_oldest(&mut self) {
        if self.front.is_empty() {
            // Flip the back segment over: accumulate from newest to
            // oldest so each stacked entry covers a suffix-in-time of
            // the segment, oldest on top.
            let mut running = SegmentAgg::EMPTY;
            for &value in self.back.iter().rev() {
                running = SegmentAgg::leaf(value).combine(running);
                self.front.push(running);
            }
            self.back.clear();
            self.back_agg = SegmentAgg::EMPTY;
        }
        self.front.pop();
    }

    /// Number of elements currently held.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Whether no elements are held yet.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Maximum subarray sum of the window, clamped at zero.
    pub fn max_subarray(&self) -> i64 {
        let front = self.front.last().copied().unwrap_or(SegmentAgg::EMPTY);
        front.combine(self.back_agg).best
    }
}
