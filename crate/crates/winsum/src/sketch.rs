//! Smooth-histogram sketch for the sliding-window maximum subarray sum.
//!
//! The sketch keeps Kadane summaries for a short list of candidate start
//! positions `s_1 < s_2 < ... < s_q`; instance `I_i` covers `[s_i, now]`
//! and the newest instance always starts at `now`. After each update a
//! prune pass removes an interior instance whenever its two neighbors are
//! already so close in value that the middle one is redundant, so
//! consecutive survivors stay multiplicatively separated and `q` grows
//! like `eps^-1 * log(n * value_bound)` instead of `n`. Expiry keeps
//! exactly one instance that starts at or before the window boundary; the
//! first instance that starts inside the window answers queries.
//!
//! Two removal policies are provided, following the smooth-histogram
//! framework of Braverman and Ostrovsky (2007). The standard policy
//! compares only the maximum subarray values of the neighbors, which for
//! this statistic supports a one-sided factor of `1/(2-beta)`. The
//! refined policy also requires the maximum *suffix* sums to stay close.
//! A suffix of the older neighbor either lies inside the younger one or
//! crosses its start; the suffix condition keeps the crossing case
//! approximable, which tightens the one-sided factor to `eps` itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{le_fraction, CloseFactor};
use crate::summary::{IntervalSummary, Params, StreamElement};

/// Instance-removal policy and its accuracy guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneRule {
    /// Remove `I_i` when `f(I_{i+1}) >= (1-beta) * f(I_{i-1})`.
    Standard {
        /// Closeness factor in (0, 1).
        beta: f64,
    },
    /// Remove `I_i` when both `f` and the suffix maximum of `I_{i+1}`
    /// are within `(1-eps)` of `I_{i-1}`'s.
    Refined {
        /// Closeness factor in (0, 1).
        eps: f64,
    },
}

impl PruneRule {
    /// The raw closeness factor (`beta` or `eps`).
    pub fn factor(&self) -> f64 {
        match *self {
            PruneRule::Standard { beta } => beta,
            PruneRule::Refined { eps } => eps,
        }
    }

    /// Advertised one-sided error: queries return at least
    /// `(1 - guarantee()) * f(W)`. `eps` for the refined rule,
    /// `1/(2-beta)` for the standard rule.
    pub fn guarantee(&self) -> f64 {
        match *self {
            PruneRule::Standard { beta } => 1.0 / (2.0 - beta),
            PruneRule::Refined { eps } => eps,
        }
    }

    /// Whether `estimate` satisfies the advertised one-sided guarantee
    /// against `exact`, i.e. `(1 - guarantee()) * exact <= estimate <=
    /// exact`, decided in exact integer arithmetic.
    pub fn satisfies_guarantee(&self, estimate: i64, exact: i64) -> bool {
        if estimate > exact || estimate < 0 || exact < 0 {
            return false;
        }
        let diff = exact - estimate;
        match *self {
            PruneRule::Refined { eps } => le_fraction(diff, eps, exact),
            PruneRule::Standard { beta } => {
                let (m, k) = crate::numeric::dyadic_parts(beta);
                if k <= 60 {
                    // alpha = 1/(2-beta) = 2^k / (2^{k+1} - m), exactly.
                    (diff as u128) * ((1u128 << (k + 1)) - m as u128) <= (exact as u128) << k
                } else {
                    // Round alpha down one ulp: strictly harder to satisfy.
                    let alpha = 1.0 / (2.0 - beta);
                    le_fraction(diff, f64::from_bits(alpha.to_bits() - 1), exact)
                }
            }
        }
    }

    pub(crate) fn close_factor(&self) -> CloseFactor {
        CloseFactor::one_minus(self.factor())
    }

    fn validate(&self) -> Result<()> {
        let factor = self.factor();
        if !(factor.is_finite() && 0.0 < factor && factor < 1.0) {
            return Err(Error::InvalidParams(format!(
                "prune factor must lie strictly between 0 and 1, got {factor}"
            )));
        }
        Ok(())
    }
}

/// Live size of a sketch: instance count and an estimate of the bits held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchSize {
    /// Number of maintained instances (`q`).
    pub instances: usize,
    /// `q` summaries at three 64-bit words each.
    pub bits_estimate: u64,
}

/// Smooth histogram over Kadane interval summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchState {
    params: Params,
    rule: PruneRule,
    now: u64,
    instances: Vec<IntervalSummary>,
}

impl SketchState {
    /// Empty sketch; validates the rule's factor.
    pub fn new(params: Params, rule: PruneRule) -> Result<Self> {
        rule.validate()?;
        Ok(SketchState {
            params,
            rule,
            now: 0,
            instances: Vec::new(),
        })
    }

    /// Stream parameters.
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Removal policy.
    pub fn rule(&self) -> PruneRule {
        self.rule
    }

    /// Number of elements processed so far.
    pub fn now(&self) -> u64 {
        self.now
    }

    /// Maintained instances, oldest first.
    pub fn instances(&self) -> &[IntervalSummary] {
        &self.instances
    }

    /// Process the next stream element. The four steps run in order:
    /// extend every instance, open a singleton at the new position,
    /// prune, expire.
    pub fn update(&mut self, value: i64) -> Result<()> {
        self.params.check_value(value, self.now + 1)?;
        self.now += 1;
        for inst in &mut self.instances {
            inst.append(value);
        }
        self.instances.push(IntervalSummary::singleton(value, self.now));
        self.prune();
        self.expire();
        Ok(())
    }

    /// As [`update`](Self::update), but also checks that the element's
    /// position is exactly `now + 1`.
    pub fn update_element(&mut self, element: StreamElement) -> Result<()> {
        if element.position != self.now + 1 {
            return Err(Error::PositionSkew {
                expected: self.now + 1,
                got: element.position,
            });
        }
        self.update(element.value)
    }

    /// One left-to-right pass over interior instances. After a removal
    /// the same slot is re-tested against its new right neighbor before
    /// the scan advances, so the post-state satisfies the separation
    /// invariant everywhere in a single pass.
    fn prune(&mut self) {
        let close = self.rule.close_factor();
        let refined = matches!(self.rule, PruneRule::Refined { .. });
        let mut i = 1;
        while i + 1 < self.instances.len() {
            let left = self.instances[i - 1];
            let right = self.instances[i + 1];
            let remove = close.close(right.max_subarray(), left.max_subarray())
                && (!refined || close.close(right.suffix_max(), left.suffix_max()));
            if remove {
                self.instances.remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// Drop leading instances while the *second* one has also expired, so
    /// exactly one expired instance is retained once any has expired.
    fn expire(&mut self) {
        while self.instances.len() >= 2 && self.is_expired(self.instances[1].start()) {
            self.instances.remove(0);
        }
    }

    fn is_expired(&self, start: u64) -> bool {
        start + self.params.n() <= self.now
    }

    /// Current estimate of the window's maximum subarray sum.
    ///
    /// While the oldest instance is unexpired it covers exactly the whole
    /// window and the answer is exact; afterwards the first instance that
    /// starts inside the window answers, within the rule's one-sided
    /// factor. Zero before the first element.
    pub fn query(&self) -> i64 {
        match self.instances.first() {
            None => 0,
            Some(first) if !self.is_expired(first.start()) => first.max_subarray(),
            _ => {
                debug_assert!(self.instances.len() >= 2, "the newest instance never expires");
                self.instances[1].max_subarray()
            }
        }
    }

    /// Instance count and bit estimate.
    pub fn size(&self) -> SketchSize {
        let q = self.instances.len();
        SketchSize {
            instances: q,
            bits_estimate: q as u64 * 3 * 64,
        }
    }

    /// Verify every structural invariant of the state; on failure returns
    /// a diagnostic naming the first violated property.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvariantViolation {
                t: self.now,
                message: format!("{message}; state: {self:?}"),
            })
        };
        if self.instances.is_empty() {
            if self.now != 0 {
                return fail("no instances although elements were processed".into());
            }
            return Ok(());
        }
        let q = self.instances.len();
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.suffix_max() < 0 || inst.suffix_max() > inst.max_subarray() {
                return fail(format!("instance {i} violates 0 <= suf <= f"));
            }
            if inst.start() == 0 || inst.start() > self.now {
                return fail(format!("instance {i} start outside [1, now]"));
            }
            let len = (self.now - inst.start() + 1) as i128;
            if (inst.max_subarray() as i128) > len * self.params.value_bound() as i128 {
                return fail(format!("instance {i} value exceeds length * bound"));
            }
        }
        for i in 1..q {
            if self.instances[i - 1].start() >= self.instances[i].start() {
                return fail(format!("starts not strictly increasing at index {i}"));
            }
            if self.instances[i - 1].max_subarray() < self.instances[i].max_subarray() {
                return fail(format!("f not nonincreasing at index {i}"));
            }
            if self.instances[i - 1].suffix_max() < self.instances[i].suffix_max() {
                return fail(format!("suffix max not nonincreasing at index {i}"));
            }
        }
        if self.instances[q - 1].start() != self.now {
            return fail("newest instance does not start at now".into());
        }
        let first = &self.instances[0];
        if self.is_expired(first.start()) {
            if q < 2 || self.is_expired(self.instances[1].start()) {
                return fail("more than one expired leading instance".into());
            }
        } else if first.start() != 1 {
            return fail("unexpired oldest instance does not start at position 1".into());
        }
        let close = self.rule.close_factor();
        let refined = matches!(self.rule, PruneRule::Refined { .. });
        for i in 1..q.saturating_sub(1) {
            let left = self.instances[i - 1];
            let right = self.instances[i + 1];
            let removable = close.close(right.max_subarray(), left.max_subarray())
                && (!refined || close.close(right.suffix_max(), left.suffix_max()));
            if removable {
                return fail(format!("interior instance {i} should have been pruned"));
            }
        }
        Ok(())
    }

    /// Reassemble a sketch from raw parts (snapshot decoding); validates
    /// the rule and the structural invariants.
    pub(crate) fn from_parts(
        params: Params,
        rule: PruneRule,
        now: u64,
        instances: Vec<IntervalSummary>,
    ) -> Result<Self> {
        rule.validate()?;
        let state = SketchState {
            params,
            rule,
            now,
            instances,
        };
        state.check_invariants()?;
        Ok(state)
    }

    #[cfg(test)]
    pub(crate) fn raw_for_test(
        params: Params,
        rule: PruneRule,
        now: u64,
        instances: Vec<IntervalSummary>,
    ) -> Self {
        SketchState {
            params,
            rule,
            now,
            instances,
        }
    }

    #[cfg(test)]
    pub(crate) fn prune_for_test(&mut self) {
        self.prune();
    }

    #[cfg(test)]
    pub(crate) fn expire_for_test(&mut self) {
        self.expire();
    }
}
