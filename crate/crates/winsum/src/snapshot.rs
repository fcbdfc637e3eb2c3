//! Serialization of sketch states, in a compact binary form and in JSON.
//!
//! Both forms re-validate everything on decode — parameters, prune rule,
//! and the full structural invariants — so a corrupted or hand-edited
//! snapshot is rejected rather than resurrected into an inconsistent
//! estimator.
//!
//! # Binary layout (all integers little-endian)
//!
//! Clamped sketch:
//!
//! ```text
//! u8   version (currently 1)
//! u8   rule tag: 0 = standard, 1 = refined
//! u64  window length n
//! i64  value bound
//! f64  params eps (IEEE bits)
//! f64  rule factor (IEEE bits)
//! u64  now
//! u64  instance count q
//! q x (u64 start, i64 suffix max, i64 max subarray)
//! ```
//!
//! Nonempty estimator: the sketch layout above, followed by
//!
//! ```text
//! u8   1 if a nonnegative element has been seen, else 0
//! u64  its position (0 when absent)
//! u64  tracker bucket count
//! per bucket: i64 threshold
//! per bucket: u8 mark flag, u64 mark position (0 when absent)
//! ```
//!
//! The JSON form is the straightforward serde rendering of the state
//! structs; decoding rebuilds the state through the same validating
//! constructors as the binary path.

use crate::error::{Error, Result};
use crate::nonempty::NonemptyState;
use crate::sketch::{PruneRule, SketchState};
use crate::summary::{IntervalSummary, Params};

const VERSION: u8 = 1;
const TAG_STANDARD: u8 = 0;
const TAG_REFINED: u8 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let piece = &self.buf[self.pos..end];
                self.pos = end;
                Ok(piece)
            }
            None => Err(Error::SnapshotDecode(format!(
                "truncated while reading {what} at byte {}",
                self.pos
            ))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn i64(&mut self, what: &str) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_bits(self.u64(what)?))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::SnapshotDecode(format!(
                "{} trailing bytes after the snapshot",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn write_sketch(out: &mut Vec<u8>, state: &SketchState) {
    out.push(VERSION);
    let (tag, factor) = match state.rule() {
        PruneRule::Standard { beta } => (TAG_STANDARD, beta),
        PruneRule::Refined { eps } => (TAG_REFINED, eps),
    };
    out.push(tag);
    out.extend_from_slice(&state.params().n().to_le_bytes());
    out.extend_from_slice(&state.params().value_bound().to_le_bytes());
    out.extend_from_slice(&state.params().eps().to_bits().to_le_bytes());
    out.extend_from_slice(&factor.to_bits().to_le_bytes());
    out.extend_from_slice(&state.now().to_le_bytes());
    out.extend_from_slice(&(state.instances().len() as u64).to_le_bytes());
    for inst in state.instances() {
        out.extend_from_slice(&inst.start().to_le_bytes());
        out.extend_from_slice(&inst.suffix_max().to_le_bytes());
        out.extend_from_slice(&inst.max_subarray().to_le_bytes());
    }
}

fn read_sketch(reader: &mut Reader<'_>) -> Result<SketchState> {
    let version = reader.u8("version")?;
    if version != VERSION {
        return Err(Error::SnapshotDecode(format!(
            "unsupported snapshot version {version}, expected {VERSION}"
        )));
    }
    let tag = reader.u8("rule tag")?;
    let n = reader.u64("window length")?;
    let value_bound = reader.i64("value bound")?;
    let eps = reader.f64("eps")?;
    let factor = reader.f64("rule factor")?;
    let rule = match tag {
        TAG_STANDARD => PruneRule::Standard { beta: factor },
        TAG_REFINED => PruneRule::Refined { eps: factor },
        other => {
            return Err(Error::SnapshotDecode(format!("unknown rule tag {other}")))
        }
    };
    let params = Params::new(n, eps, value_bound)?;
    let now = reader.u64("now")?;
    let q = reader.u64("instance count")?;
    if q > now {
        return Err(Error::SnapshotDecode(format!(
            "{q} instances cannot come from {now} elements"
        )));
    }
    let mut instances = Vec::with_capacity(q as usize);
    for i in 0..q {
        let start = reader.u64(&format!("instance {i} start"))?;
        let suf = reader.i64(&format!("instance {i} suffix max"))?;
        let f = reader.i64(&format!("instance {i} max subarray"))?;
        instances.push(IntervalSummary::from_parts(start, suf, f));
    }
    SketchState::from_parts(params, rule, now, instances)
}

fn write_option_pos(out: &mut Vec<u8>, value: Option<u64>) {
    out.push(u8::from(value.is_some()));
    out.extend_from_slice(&value.unwrap_or(0).to_le_bytes());
}

fn read_option_pos(reader: &mut Reader<'_>, what: &str) -> Result<Option<u64>> {
    let flag = reader.u8(what)?;
    let pos = reader.u64(what)?;
    match flag {
        0 => Ok(None),
        1 => Ok(Some(pos)),
        other => Err(Error::SnapshotDecode(format!(
            "flag for {what} must be 0 or 1, got {other}"
        ))),
    }
}

/// Encode a sketch into the documented binary layout.
pub fn sketch_to_bytes(state: &SketchState) -> Vec<u8> {
    let mut out = Vec::new();
    write_sketch(&mut out, state);
    out
}

/// Decode and validate a sketch from the binary layout.
pub fn sketch_from_bytes(bytes: &[u8]) -> Result<SketchState> {
    let mut reader = Reader::new(bytes);
    let state = read_sketch(&mut reader)?;
    reader.finish()?;
    Ok(state)
}

/// Encode a sketch as JSON.
pub fn sketch_to_json(state: &SketchState) -> Result<String> {
    serde_json::to_string(state).map_err(|e| Error::SnapshotDecode(e.to_string()))
}

/// Decode and validate a sketch from JSON.
pub fn sketch_from_json(text: &str) -> Result<SketchState> {
    let raw: SketchState =
        serde_json::from_str(text).map_err(|e| Error::SnapshotDecode(e.to_string()))?;
    let params = Params::new(
        raw.params().n(),
        raw.params().eps(),
        raw.params().value_bound(),
    )?;
    SketchState::from_parts(params, raw.rule(), raw.now(), raw.instances().to_vec())
}

/// Encode a nonempty estimator into the documented binary layout.
pub fn nonempty_to_bytes(state: &NonemptyState) -> Vec<u8> {
    let mut out = Vec::new();
    write_sketch(&mut out, state.sketch());
    write_option_pos(&mut out, state.last_nonneg());
    let tracker = state.tracker();
    out.extend_from_slice(&(tracker.bucket_count() as u64).to_le_bytes());
    for &b in tracker.thresholds() {
        out.extend_from_slice(&b.to_le_bytes());
    }
    for &mark in tracker.marks() {
        write_option_pos(&mut out, mark);
    }
    out
}

/// Decode and validate a nonempty estimator from the binary layout.
pub fn nonempty_from_bytes(bytes: &[u8]) -> Result<NonemptyState> {
    let mut reader = Reader::new(bytes);
    let sketch = read_sketch(&mut reader)?;
    let last_nonneg = read_option_pos(&mut reader, "last nonnegative position")?;
    let buckets = reader.u64("bucket count")?;
    if buckets > 1 << 32 {
        return Err(Error::SnapshotDecode(format!(
            "implausible bucket count {buckets}"
        )));
    }
    let mut thresholds = Vec::with_capacity(buckets as usize);
    for i in 0..buckets {
        thresholds.push(reader.i64(&format!("threshold {i}"))?);
    }
    let mut marks = Vec::with_capacity(buckets as usize);
    for i in 0..buckets {
        marks.push(read_option_pos(&mut reader, &format!("bucket {i} mark"))?);
    }
    reader.finish()?;
    NonemptyState::from_parts(sketch, thresholds, marks, last_nonneg)
}

/// Encode a nonempty estimator as JSON.
pub fn nonempty_to_json(state: &NonemptyState) -> Result<String> {
    serde_json::to_string(state).map_err(|e| Error::SnapshotDecode(e.to_string()))
}

/// Decode and validate a nonempty estimator from JSON.
pub fn nonempty_from_json(text: &str) -> Result<NonemptyState> {
    let raw: NonemptyState =
        serde_json::from_str(text).map_err(|e| Error::SnapshotDecode(e.to_string()))?;
    let sketch = raw.sketch();
    let params = Params::new(
        sketch.params().n(),
        sketch.params().eps(),
        sketch.params().value_bound(),
    )?;
    let sketch = SketchState::from_parts(
        params,
        sketch.rule(),
        sketch.now(),
        sketch.instances().to_vec(),
    )?;
    NonemptyState::from_parts(
        sketch,
        raw.tracker().thresholds().to_vec(),
        raw.tracker().marks().to_vec(),
        raw.last_nonneg(),
    )
}
