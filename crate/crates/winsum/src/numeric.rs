//! Exact comparisons against fractions of an `f64` factor.
//!
//! Every finite `f64` in (0, 1) is a dyadic rational `m / 2^k`, so tests of
//! the form `a >= (1 - x) * b` or `d <= x * b` can be decided in plain
//! integer arithmetic. Pruning and accuracy decisions therefore never flip
//! because of floating-point rounding. When `x` carries more than 64
//! fractional bits (absurdly tiny factors), the threshold is rounded in the
//! conservative direction noted on each function.

/// Decompose `x` in (0, 1) as `m / 2^k` with `m` odd.
pub(crate) fn dyadic_parts(x: f64) -> (u64, u32) {
    debug_assert!(x.is_finite() && x > 0.0 && x < 1.0);
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if biased == 0 {
        (frac, -1074i64) // subnormal
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += i64::from(tz);
    debug_assert!(e < 0, "a value below one has a negative reduced exponent");
    (m, (-e) as u32)
}

/// `floor(x * b)` for `x` in (0, 1) and `b >= 0`, computed exactly.
pub(crate) fn floor_mul(x: f64, b: i64) -> i64 {
    debug_assert!(b >= 0);
    let (m, k) = dyadic_parts(x);
    if k >= 128 {
        // m * b < 2^117, so shifting by >= 128 always floors to zero.
        return 0;
    }
    ((m as u128 * b as u128) >> k) as i64
}

/// Whether `diff <= x * base` holds, for `diff, base >= 0` and `x` in (0, 1).
///
/// Exact for factors with at most 64 fractional bits; beyond that the factor
/// is rounded down, making the test stricter (it may reject a borderline
/// case, never accept a bad one).
pub(crate) fn le_fraction(diff: i64, x: f64, base: i64) -> bool {
    debug_assert!(diff >= 0 && base >= 0);
    let (m, k) = dyadic_parts(x);
    if k <= 64 {
        (diff as u128) << k <= m as u128 * base as u128
    } else {
        let drop = k - 64;
        let m_down = if drop >= 64 { 0 } else { m >> drop };
        (diff as u128) << 64 <= m_down as u128 * base as u128
    }
}

/// The predicate `inner >= (1 - x) * outer`, evaluated exactly.
///
/// The threshold `(1 - x)` is held as `num / 2^shift`. When `x` has more
/// than 64 fractional bits the threshold is rounded up, so the predicate
/// errs toward `false` — for pruning, toward "do not remove", which keeps
/// removals safe at the cost of (negligibly) larger sketches.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CloseFactor {
    num: u128,
    shift: u32,
}

impl CloseFactor {
    /// Threshold `(1 - x)` for `x` in (0, 1).
    pub(crate) fn one_minus(x: f64) -> Self {
        let (m, k) = dyadic_parts(x);
        if k <= 64 {
            CloseFactor {
                num: (1u128 << k) - m as u128,
                shift: k,
            }
        } else {
            let drop = k - 64;
            let m_down = if drop >= 64 { 0 } else { m >> drop };
            CloseFactor {
                num: (1u128 << 64) - m_down as u128,
                shift: 64,
            }
        }
    }

    /// `inner >= (1 - x) * outer` for nonnegative `inner`, `outer`.
    pub(crate) fn close(&self, inner: i64, outer: i64) -> bool {
        debug_assert!(inner >= 0 && outer >= 0);
        (inner as u128) << self.shift >= self.num * outer as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_parts_reconstruct_the_value() {
        for &x in &[0.5, 0.25, 0.1, 0.2, 0.02, 0.9, 0.75, 1.0 / 3.0, 1e-9] {
            let (m, k) = dyadic_parts(x);
            assert_eq!(m % 2, 1, "mantissa must be odd for {x}");
            if k < 1024 {
                assert_eq!(m as f64 / 2f64.powi(k as i32), x);
            }
        }
    }

    #[test]
    fn floor_mul_matches_integer_truth() {
        assert_eq!(floor_mul(0.5, 7), 3);
        assert_eq!(floor_mul(0.5, 8), 4);
        assert_eq!(floor_mul(0.25, 3), 0);
        // 0.1 as f64 is slightly above 1/10, so floor(0.1f64 * 10) is 1.
        assert_eq!(floor_mul(0.1, 10), 1);
        assert_eq!(floor_mul(0.1, 9), 0);
        assert_eq!(floor_mul(1e-300, i64::MAX), 0);
    }

    #[test]
    fn le_fraction_handles_exact_ties() {
        // 0.5 is exactly representable: 2 <= 0.5 * 4 is a tie and holds.
        assert!(le_fraction(2, 0.5, 4));
        assert!(!le_fraction(3, 0.5, 4));
        assert!(le_fraction(0, 0.5, 0));
        assert!(!le_fraction(1, 0.5, 0));
    }

    #[test]
    fn close_factor_matches_rational_thresholds() {
        let c = CloseFactor::one_minus(0.5);
        assert!(c.close(2, 4)); // 2 >= 0.5 * 4, tie fires
        assert!(!c.close(1, 4));
        assert!(c.close(0, 0)); // 0 >= (1 - x) * 0, tie fires

        // 0.1f64 exceeds 1/10, so (1 - 0.1f64) is just below 0.9 and the
        // printed tie 9 >= 0.9 * 10 fires.
        let c = CloseFactor::one_minus(0.1);
        assert!(c.close(9, 10));
        assert!(!c.close(8, 10));
    }

    #[test]
    fn close_factor_survives_extreme_magnitudes() {
        let c = CloseFactor::one_minus(0.5);
        let big = i64::MAX >> 1;
        assert!(c.close(big, big));
        assert!(!c.close(big / 2 - 1, big));
    }
}
