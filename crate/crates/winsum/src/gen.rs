//! Deterministic input streams for experiments.
//!
//! A [`StreamSpec`] names a stream family, a seed, and a length, and
//! always expands to the same integer sequence. Family parameters are
//! written in a small `kind:key=value,...` grammar (see [`StreamKind`]'s
//! `FromStr`), so stream identities fit in one CLI argument and survive
//! round-trips through reports.
//!
//! Pseudo-randomness comes from SplitMix64 (Steele, Lea and Flood's
//! `splitmix64` generator), hand-rolled here so streams are reproducible
//! across platforms and library versions.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::summary::StreamElement;

/// SplitMix64 pseudo-random generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Generator seeded with `seed`.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64 uniform bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in `lo..=hi`.
    pub fn next_in_range(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }
}

/// A family of test streams.
#[derive(Clone, Debug, PartialEq)]
pub enum StreamKind {
    /// Independent uniform integers in `lo..=hi`.
    Uniform { lo: i64, hi: i64 },
    /// `+step`/`-step` random walk reflected into `[-100*step, 100*step]`.
    Walk { step: i64 },
    /// Cycles of `burst_len` positives in `1..=burst_hi` followed by
    /// `gap_len` nonpositives in `gap_lo..=0`.
    Bursty {
        burst_len: u64,
        burst_hi: i64,
        gap_len: u64,
        gap_lo: i64,
    },
    /// Independent uniform integers in `lo..=hi` with `hi <= -1`.
    AllNeg { lo: i64, hi: i64 },
    /// Independent bits, `1` with probability `p_one`.
    Bits { p_one: f64 },
    /// Magnitudes `max(1, floor(peak * ratio^k))`, every third element
    /// negated; sweeps many value scales in one stream.
    Decay { peak: i64, ratio: f64 },
    /// Integers read from a text file, one per line; blank lines skipped.
    File { path: PathBuf },
}

impl StreamKind {
    /// Largest absolute value the family can emit, when known without
    /// reading a file.
    pub fn value_bound(&self) -> Option<i64> {
        match *self {
            StreamKind::Uniform { lo, hi } => Some(lo.abs().max(hi.abs()).max(1)),
            StreamKind::Walk { step } => Some(100 * step),
            StreamKind::Bursty {
                burst_hi, gap_lo, ..
            } => Some(burst_hi.max(gap_lo.abs()).max(1)),
            StreamKind::AllNeg { lo, .. } => Some(lo.abs()),
            StreamKind::Bits { .. } => Some(1),
            StreamKind::Decay { peak, .. } => Some(peak),
            StreamKind::File { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidStreamSpec {
                spec: self.to_string(),
                reason,
            })
        };
        match *self {
            StreamKind::Uniform { lo, hi } => {
                if lo > hi {
                    return bad(format!("empty range {lo}..{hi}"));
                }
            }
            StreamKind::Walk { step } => {
                if step < 1 {
                    return bad(format!("step must be at least 1, got {step}"));
                }
                if step > i64::MAX / 200 {
                    return bad(format!("step {step} makes the walk range overflow"));
                }
            }
            StreamKind::Bursty {
                burst_len,
                burst_hi,
                gap_len: _,
                gap_lo,
            } => {
                if burst_len < 1 {
                    return bad("burst length must be at least 1".into());
                }
                if burst_hi < 1 {
                    return bad(format!("burst high must be at least 1, got {burst_hi}"));
                }
                if gap_lo > 0 {
                    return bad(format!("gap low must be at most 0, got {gap_lo}"));
                }
            }
            StreamKind::AllNeg { lo, hi } => {
                if lo > hi {
                    return bad(format!("empty range {lo}..{hi}"));
                }
                if hi > -1 {
                    return bad(format!("all-negative range must end at or below -1, got {hi}"));
                }
            }
            StreamKind::Bits { p_one } => {
                if !(p_one.is_finite() && (0.0..=1.0).contains(&p_one)) {
                    return bad(format!("probability must lie in [0, 1], got {p_one}"));
                }
            }
            StreamKind::Decay { peak, ratio } => {
                if peak < 1 {
                    return bad(format!("peak must be at least 1, got {peak}"));
                }
                if !(ratio.is_finite() && 0.0 < ratio && ratio < 1.0) {
                    return bad(format!("ratio must lie strictly between 0 and 1, got {ratio}"));
                }
            }
            StreamKind::File { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamKind::Uniform { lo, hi } => write!(out, "uniform:{lo}..{hi}"),
            StreamKind::Walk { step } => write!(out, "walk:step={step}"),
            StreamKind::Bursty {
                burst_len,
                burst_hi,
                gap_len,
                gap_lo,
            } => write!(out, "bursty:len={burst_len},hi={burst_hi},gap={gap_len},lo={gap_lo}"),
            StreamKind::AllNeg { lo, hi } => write!(out, "allneg:{lo}..{hi}"),
            StreamKind::Bits { p_one } => write!(out, "bits:p={p_one}"),
            StreamKind::Decay { peak, ratio } => write!(out, "decay:peak={peak},ratio={ratio}"),
            StreamKind::File { path } => write!(out, "file:{}", path.display()),
        }
    }
}

fn parse_range(spec: &str, body: &str) -> Result<(i64, i64)> {
    let bad = |reason: String| Error::InvalidStreamSpec {
        spec: spec.to_string(),
        reason,
    };
    let (lo, hi) = body
        .split_once("..")
        .ok_or_else(|| bad(format!("expected LO..HI, got {body:?}")))?;
    let lo = lo
        .parse::<i64>()
        .map_err(|e| bad(format!("bad range start {lo:?}: {e}")))?;
    let hi = hi
        .parse::<i64>()
        .map_err(|e| bad(format!("bad range end {hi:?}: {e}")))?;
    Ok((lo, hi))
}

/// Split `key=value,...` into pairs, requiring exactly `keys` in order.
fn parse_fields<'a>(spec: &str, body: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let bad = |reason: String| Error::InvalidStreamSpec {
        spec: spec.to_string(),
        reason,
    };
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != keys.len() {
        return Err(bad(format!(
            "expected fields {}, got {body:?}",
            keys.join(",")
        )));
    }
    let mut values = Vec::with_capacity(keys.len());
    for (part, key) in parts.iter().zip(keys) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected {key}=..., got {part:?}")))?;
        if k != *key {
            return Err(bad(format!("expected field {key}, got {k:?}")));
        }
        values.push(v);
    }
    Ok(values)
}

impl FromStr for StreamKind {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidStreamSpec {
            spec: spec.to_string(),
            reason,
        };
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected kind:params".into()))?;
        let parse_i64 = |v: &str, what: &str| {
            v.parse::<i64>()
                .map_err(|e| bad(format!("bad {what} {v:?}: {e}")))
        };
        let parse_u64 = |v: &str, what: &str| {
            v.parse::<u64>()
                .map_err(|e| bad(format!("bad {what} {v:?}: {e}")))
        };
        let parse_f64 = |v: &str, what: &str| {
            v.parse::<f64>()
                .map_err(|e| bad(format!("bad {what} {v:?}: {e}")))
        };
        let parsed = match kind {
            "uniform" => {
                let (lo, hi) = parse_range(spec, body)?;
                StreamKind::Uniform { lo, hi }
            }
            "walk" => {
                let fields = parse_fields(spec, body, &["step"])?;
                StreamKind::Walk {
                    step: parse_i64(fields[0], "step")?,
                }
            }
            "bursty" => {
                let fields = parse_fields(spec, body, &["len", "hi", "gap", "lo"])?;
                StreamKind::Bursty {
                    burst_len: parse_u64(fields[0], "burst length")?,
                    burst_hi: parse_i64(fields[1], "burst high")?,
                    gap_len: parse_u64(fields[2], "gap length")?,
                    gap_lo: parse_i64(fields[3], "gap low")?,
                }
            }
            "allneg" => {
                let (lo, hi) = parse_range(spec, body)?;
                StreamKind::AllNeg { lo, hi }
            }
            "bits" => {
                let fields = parse_fields(spec, body, &["p"])?;
                StreamKind::Bits {
                    p_one: parse_f64(fields[0], "probability")?,
                }
            }
            "decay" => {
                let fields = parse_fields(spec, body, &["peak", "ratio"])?;
                StreamKind::Decay {
                    peak: parse_i64(fields[0], "peak")?,
                    ratio: parse_f64(fields[1], "ratio")?,
                }
            }
            "file" => StreamKind::File {
                path: PathBuf::from(body),
            },
            other => return Err(bad(format!("unknown stream kind {other:?}"))),
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

/// A fully specified stream: family, seed, length.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamSpec {
    pub kind: StreamKind,
    pub seed: u64,
    pub length: u64,
}

/// A materialized stream and the value bound its elements respect.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedStream {
    pub values: Vec<i64>,
    pub value_bound: i64,
}

impl GeneratedStream {
    /// The values paired with their 1-based positions.
    pub fn elements(&self) -> impl Iterator<Item = StreamElement> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| StreamElement::new(v, i as u64 + 1))
    }
}

impl StreamSpec {
    pub fn new(kind: StreamKind, seed: u64, length: u64) -> Result<Self> {
        kind.validate()?;
        if length < 1 {
            return Err(Error::InvalidStreamSpec {
                spec: kind.to_string(),
                reason: "stream length must be at least 1".into(),
            });
        }
        Ok(StreamSpec { kind, seed, length })
    }

    /// Expand the spec into its integer sequence. Deterministic in the
    /// spec; file streams are truncated to `length` and must have at
    /// least that many values.
    pub fn generate(&self) -> Result<GeneratedStream> {
        let len = self.length as usize;
        let mut rng = SplitMix64::new(self.seed);
        let values: Vec<i64> = match self.kind {
            StreamKind::Uniform { lo, hi } => {
                (0..len).map(|_| rng.next_in_range(lo, hi)).collect()
            }
            StreamKind::Walk { step } => {
                let bound = 100 * step;
                let mut cur = 0i64;
                (0..len)
                    .map(|_| {
                        cur += if rng.next_u64() & 1 == 1 { step } else { -step };
                        if cur > bound {
                            cur = 2 * bound - cur;
                        } else if cur < -bound {
                            cur = -2 * bound - cur;
                        }
                        cur
                    })
                    .collect()
            }
            StreamKind::Bursty {
                burst_len,
                burst_hi,
                gap_len,
                gap_lo,
            } => {
                let period = burst_len + gap_len;
                (0..self.length)
                    .map(|t| {
                        if t % period < burst_len {
                            rng.next_in_range(1, burst_hi)
                        } else {
                            rng.next_in_range(gap_lo, 0)
                        }
                    })
                    .collect()
            }
            StreamKind::AllNeg { lo, hi } => {
                (0..len).map(|_| rng.next_in_range(lo, hi)).collect()
            }
            StreamKind::Bits { p_one } => (0..len)
                .map(|_| i64::from(rng.next_f64() < p_one))
                .collect(),
            StreamKind::Decay { peak, ratio } => {
                let mut magnitude = peak as f64;
                (0..len)
                    .map(|k| {
                        let mag = (magnitude.floor() as i64).max(1);
                        magnitude *= ratio;
                        if k % 3 == 2 {
                            -mag
                        } else {
                            mag
                        }
                    })
                    .collect()
            }
            StreamKind::File { ref path } => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::StreamIo {
                    path: path.clone(),
                    source,
                })?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() {
                        continue;
                    }
                    let v = line.parse::<i64>().map_err(|_| Error::StreamParse {
                        path: path.clone(),
                        line: i + 1,
                        content: line.to_string(),
                    })?;
                    values.push(v);
                    if values.len() == len {
                        break;
                    }
                }
                if values.len() < len {
                    return Err(Error::StreamTooShort {
                        path: path.clone(),
                        lines: values.len(),
                        need: self.length,
                    });
                }
                values
            }
        };
        let value_bound = match self.kind.value_bound() {
            Some(bound) => bound,
            None => values.iter().map(|v| v.abs()).max().unwrap_or(0).max(1),
        };
        debug_assert!(values.iter().all(|v| v.abs() <= value_bound));
        Ok(GeneratedStream {
            values,
            value_bound,
        })
    }
}
