//! Side-by-side experiment runner: stream an input through an estimator
//! and an exact reference, record per-step estimates and errors, and
//! time raw update throughput.
//!
//! [`run_compare`] is fully deterministic for a given configuration (the
//! wall-clock field in the summary aside), so its CSV output is
//! byte-for-byte reproducible. With checking enabled it stops at the
//! first violated structural invariant or error envelope instead of
//! silently logging a bad estimate.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eh::{within_relative_error, EhState};
use crate::error::{Error, Result};
use crate::gen::{StreamKind, StreamSpec};
use crate::nonempty::{within_extended_error, NonemptyState};
use crate::oracle::WindowBuffer;
use crate::sketch::{PruneRule, SketchState};
use crate::summary::{Params, StreamElement};

/// Estimator selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    /// Smooth histogram with the refined (value and suffix) prune rule.
    Refined,
    /// Smooth histogram with the standard value-only prune rule.
    Standard,
    /// Exponential-histogram bit counter (bit streams only).
    Eh,
    /// Composite estimator for the nonempty maximum subarray sum.
    Nonempty,
}

impl fmt::Display for Algo {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algo::Refined => "refined",
            Algo::Standard => "standard",
            Algo::Eh => "eh",
            Algo::Nonempty => "nonempty",
        };
        out.write_str(name)
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "refined" => Ok(Algo::Refined),
            "standard" => Ok(Algo::Standard),
            "eh" => Ok(Algo::Eh),
            "nonempty" => Ok(Algo::Nonempty),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm {other:?}; expected refined, standard, eh or nonempty"
            ))),
        }
    }
}

/// A comparison run: which estimator, window, accuracy, and input.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub algo: Algo,
    pub n: u64,
    pub eps: f64,
    /// Prune factor for [`Algo::Standard`]; defaults to `eps`.
    pub beta: Option<f64>,
    pub spec: StreamSpec,
    /// Verify structural invariants and the error envelope every step.
    pub check: bool,
}

/// One step of a comparison run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Stream position (1-based).
    pub t: u64,
    /// Estimator's answer.
    pub estimate: i64,
    /// Exact statistic from the reference.
    pub exact: i64,
    /// Signed relative error `(exact - estimate) / exact`; `0` when both
    /// are zero, infinite when only the exact value is zero.
    pub rel_err: f64,
    /// Estimator state size (instances or buckets).
    pub q: usize,
}

/// Aggregates over a comparison run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    /// Largest absolute relative error.
    pub max_rel_err: f64,
    pub max_q: usize,
    pub mean_q: f64,
    pub wall_time_s: f64,
}

/// Everything a comparison run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: Algo,
    pub n: u64,
    pub eps: f64,
    pub beta: Option<f64>,
    pub stream: String,
    pub seed: u64,
    pub length: u64,
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
}

enum Runner {
    Sketch(SketchState),
    Nonempty(NonemptyState),
    Eh(EhState),
}

impl Runner {
    fn new(config: &RunConfig, value_bound: i64) -> Result<Self> {
        match config.algo {
            Algo::Refined => {
                let params = Params::new(config.n, config.eps, value_bound)?;
                let rule = PruneRule::Refined { eps: config.eps };
                Ok(Runner::Sketch(SketchState::new(params, rule)?))
            }
            Algo::Standard => {
                let params = Params::new(config.n, config.eps, value_bound)?;
                let rule = PruneRule::Standard {
                    beta: config.beta.unwrap_or(config.eps),
                };
                Ok(Runner::Sketch(SketchState::new(params, rule)?))
            }
            Algo::Nonempty => {
                let params = Params::new(config.n, config.eps, value_bound)?;
                Ok(Runner::Nonempty(NonemptyState::new(params)?))
            }
            Algo::Eh => Ok(Runner::Eh(EhState::new(config.n, config.eps)?)),
        }
    }

    fn update(&mut self, element: StreamElement) -> Result<()> {
        match self {
            Runner::Sketch(s) => s.update_element(element),
            Runner::Nonempty(s) => s.update_element(element),
            Runner::Eh(s) => s.update(element.value),
        }
    }

    fn query(&self) -> i64 {
        match self {
            Runner::Sketch(s) => s.query(),
            Runner::Nonempty(s) => s.query().expect("queried after at least one update"),
            Runner::Eh(s) => s.query() as i64,
        }
    }

    fn exact(&self, oracle: &WindowBuffer) -> Result<i64> {
        match self {
            Runner::Sketch(_) => Ok(oracle.max_subarray()),
            Runner::Nonempty(_) => Ok(oracle
                .max_subarray_nonempty()
                .expect("window is nonempty after an update")),
            Runner::Eh(_) => Ok(oracle.count_ones()? as i64),
        }
    }

    fn q(&self) -> usize {
        match self {
            Runner::Sketch(s) => s.size().instances,
            Runner::Nonempty(s) => s.size().instances,
            Runner::Eh(s) => s.size().instances,
        }
    }

    /// Structural invariants plus the estimator's error envelope, plus
    /// exactness during warm-up for the clamped sketches.
    fn verify(&self, t: u64, n: u64, eps: f64, estimate: i64, exact: i64) -> Result<()> {
        let violation = |message: String| Err(Error::InvariantViolation { t, message });
        match self {
            Runner::Sketch(s) => {
                s.check_invariants()?;
                if !s.rule().satisfies_guarantee(estimate, exact) {
                    return violation(format!(
                        "estimate {estimate} outside the {} envelope of exact {exact}",
                        s.rule().guarantee()
                    ));
                }
                if t <= n && estimate != exact {
                    return violation(format!(
                        "warm-up estimate {estimate} differs from exact {exact}"
                    ));
                }
            }
            Runner::Nonempty(s) => {
                s.check_invariants()?;
                if !within_extended_error(estimate, exact, eps) {
                    return violation(format!(
                        "estimate {estimate} outside the extended {eps} envelope of exact {exact}"
                    ));
                }
            }
            Runner::Eh(s) => {
                s.check_invariants()?;
                if !within_relative_error(estimate as u64, exact as u64, eps) {
                    return violation(format!(
                        "count estimate {estimate} outside relative error {eps} of exact {exact}"
                    ));
                }
            }
        }
        Ok(())
    }
}

fn relative_error(estimate: i64, exact: i64) -> f64 {
    if exact != 0 {
        (exact - estimate) as f64 / exact as f64
    } else if estimate == 0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.beta.is_some() && self.algo != Algo::Standard {
            return Err(Error::InvalidConfig(format!(
                "beta only applies to the standard rule, not {}",
                self.algo
            )));
        }
        Ok(())
    }
}

/// Drive the configured estimator and the exact reference over the whole
/// stream, recording every step.
pub fn run_compare(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let stream = config.spec.generate()?;
    let started = Instant::now();
    let mut runner = Runner::new(config, stream.value_bound)?;
    let mut oracle = WindowBuffer::new(config.n);
    let mut records = Vec::with_capacity(stream.values.len());
    for element in stream.elements() {
        runner.update(element)?;
        oracle.push(element.value);
        let estimate = runner.query();
        let exact = runner.exact(&oracle)?;
        if config.check {
            runner.verify(element.position, config.n, config.eps, estimate, exact)?;
        }
        records.push(StepRecord {
            t: element.position,
            estimate,
            exact,
            rel_err: relative_error(estimate, exact),
            q: runner.q(),
        });
    }
    let wall_time_s = started.elapsed().as_secs_f64();
    let steps = records.len() as u64;
    let summary = RunSummary {
        steps,
        max_rel_err: records
            .iter()
            .map(|r| r.rel_err.abs())
            .fold(0.0, f64::max),
        max_q: records.iter().map(|r| r.q).max().unwrap_or(0),
        mean_q: records.iter().map(|r| r.q as f64).sum::<f64>() / steps.max(1) as f64,
        wall_time_s,
    };
    Ok(RunReport {
        algo: config.algo,
        n: config.n,
        eps: config.eps,
        beta: config.beta,
        stream: config.spec.kind.to_string(),
        seed: config.spec.seed,
        length: config.spec.length,
        records,
        summary,
    })
}

/// Write the per-step records as CSV with a `t,estimate,exact,rel_err,q`
/// header. Deterministic for a given report.
pub fn write_csv(report: &RunReport, out: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
    writeln!(out, "t,estimate,exact,rel_err,q")?;
    for r in &report.records {
        writeln!(out, "{},{},{},{},{}", r.t, r.estimate, r.exact, r.rel_err, r.q)?;
    }
    Ok(())
}

/// Write the full report (records and summary) as pretty JSON.
pub fn write_json(report: &RunReport, out: &mut (impl Write + ?Sized)) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)
}

/// What a benchmark times.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchTarget {
    /// One of the streaming estimators.
    Sketch(Algo),
    /// The exact reference: buffer the window, rescan per update.
    Oracle,
}

/// A benchmark configuration: one target, several window lengths.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub target: BenchTarget,
    pub kind: StreamKind,
    pub seed: u64,
    pub eps: f64,
    pub beta: Option<f64>,
    /// Window lengths to measure.
    pub ns: Vec<u64>,
    /// Stream length per point, as a multiple of the window length.
    pub len_per_n: u64,
    /// Lower bound on updates per point, so small windows still get a
    /// meaningful sample.
    pub min_updates: u64,
}

/// Throughput at one window length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub n: u64,
    pub updates: u64,
    pub ns_per_update: f64,
    pub updates_per_s: f64,
    /// Largest state size observed (window length for the oracle).
    pub max_q: usize,
}

/// Time update-plus-query throughput for each requested window length.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchPoint>> {
    if config.ns.is_empty() {
        return Err(Error::InvalidConfig(
            "benchmark needs at least one window length".into(),
        ));
    }
    let mut points = Vec::with_capacity(config.ns.len());
    for &n in &config.ns {
        let length = (config.len_per_n.max(1) * n).max(config.min_updates);
        let spec = StreamSpec::new(config.kind.clone(), config.seed, length)?;
        let stream = spec.generate()?;
        let mut max_q = 0usize;
        let elapsed = match config.target {
            BenchTarget::Sketch(algo) => {
                let run = RunConfig {
                    algo,
                    n,
                    eps: config.eps,
                    beta: config.beta,
                    spec,
                    check: false,
                };
                run.validate()?;
                let mut runner = Runner::new(&run, stream.value_bound)?;
                let started = Instant::now();
                for element in stream.elements() {
                    runner.update(element)?;
                    std::hint::black_box(runner.query());
                    max_q = max_q.max(runner.q());
                }
                started.elapsed()
            }
            BenchTarget::Oracle => {
                let mut oracle = WindowBuffer::new(n);
                let started = Instant::now();
                for &v in &stream.values {
                    oracle.push(v);
                    std::hint::black_box(oracle.max_subarray());
                }
                let elapsed = started.elapsed();
                max_q = oracle.len();
                elapsed
            }
        };
        let updates = stream.values.len() as u64;
        let secs = elapsed.as_secs_f64();
        points.push(BenchPoint {
            n,
            updates,
            ns_per_update: secs * 1e9 / updates as f64,
            updates_per_s: updates as f64 / secs,
            max_q,
        });
    }
    Ok(points)
}

/// Write benchmark points as CSV.
pub fn write_bench_csv(points: &[BenchPoint], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "n,updates,ns_per_update,updates_per_s,max_q")?;
    for p in points {
        writeln!(
            out,
            "{},{},{:.1},{:.0},{}",
            p.n, p.updates, p.ns_per_update, p.updates_per_s, p.max_q
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(algo: Algo, n: u64, eps: f64, stream: &str, seed: u64, len: u64) -> RunConfig {
        RunConfig {
            algo,
            n,
            eps,
            beta: None,
            spec: StreamSpec::new(stream.parse().unwrap(), seed, len).unwrap(),
            check: true,
        }
    }

    #[test]
    fn checked_runs_pass_for_every_algorithm() {
        for (algo, stream) in [
            (Algo::Refined, "uniform:-20..20"),
            (Algo::Standard, "uniform:-20..20"),
            (Algo::Nonempty, "uniform:-20..20"),
            (Algo::Nonempty, "allneg:-30..-1"),
            (Algo::Eh, "bits:p=0.4"),
        ] {
            let report = run_compare(&config(algo, 16, 0.2, stream, 5, 400)).unwrap();
            assert_eq!(report.summary.steps, 400);
            assert_eq!(report.records.len(), 400);
            let max_q = report.records.iter().map(|r| r.q).max().unwrap();
            assert_eq!(report.summary.max_q, max_q);
            assert!(report.summary.mean_q > 0.0);
            assert!(report.summary.max_rel_err.is_finite(), "{algo}: {report:?}");
        }
    }

    #[test]
    fn warmup_records_are_exact_for_sketches() {
        let report = run_compare(&config(Algo::Refined, 32, 0.1, "walk:step=2", 3, 64)).unwrap();
        for r in &report.records[..32] {
            assert_eq!(r.estimate, r.exact, "t={}", r.t);
            assert_eq!(r.rel_err, 0.0);
        }
    }

    #[test]
    fn csv_output_is_frozen_for_a_tiny_run() {
        let report = run_compare(&config(Algo::Refined, 2, 0.5, "uniform:2..2", 0, 3)).unwrap();
        let mut bytes = Vec::new();
        write_csv(&report, &mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            "t,estimate,exact,rel_err,q\n1,2,2,0,1\n2,4,4,0,2\n3,4,4,0,3\n"
        );
    }

    #[test]
    fn csv_output_is_deterministic_across_runs() {
        let cfg = config(Algo::Nonempty, 8, 0.1, "uniform:-9..9", 11, 300);
        let mut a = Vec::new();
        write_csv(&run_compare(&cfg).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_compare(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_reports_round_trip() {
        let report = run_compare(&config(Algo::Eh, 8, 0.5, "bits:p=0.5", 2, 50)).unwrap();
        let mut bytes = Vec::new();
        write_json(&report, &mut bytes).unwrap();
        let back: RunReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn beta_is_rejected_outside_the_standard_rule() {
        let mut cfg = config(Algo::Refined, 8, 0.1, "uniform:-9..9", 1, 10);
        cfg.beta = Some(0.5);
        assert!(matches!(run_compare(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn eh_rejects_non_bit_streams() {
        let cfg = config(Algo::Eh, 8, 0.5, "uniform:-9..9", 1, 50);
        assert!(matches!(run_compare(&cfg), Err(Error::NonBitElement { .. })));
    }

    #[test]
    fn algo_names_round_trip() {
        for algo in [Algo::Refined, Algo::Standard, Algo::Eh, Algo::Nonempty] {
            assert_eq!(algo.to_string().parse::<Algo>().unwrap(), algo);
        }
        assert!("kadane".parse::<Algo>().is_err());
    }

    #[test]
    fn bench_measures_every_requested_window() {
        let bench = BenchConfig {
            target: BenchTarget::Sketch(Algo::Refined),
            kind: "uniform:-50..50".parse().unwrap(),
            seed: 4,
            eps: 0.2,
            beta: None,
            ns: vec![16, 64],
            len_per_n: 4,
            min_updates: 1000,
        };
        let points = run_bench(&bench).unwrap();
        assert_eq!(points.len(), 2);
        for p in &points {
            assert!(p.updates >= 1000);
            assert!(p.ns_per_update > 0.0);
            assert!(p.max_q > 0);
        }
        let mut csv = Vec::new();
        write_bench_csv(&points, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("n,updates,"));
    }

    #[test]
    fn oracle_bench_runs() {
        let bench = BenchConfig {
            target: BenchTarget::Oracle,
            kind: "uniform:-50..50".parse().unwrap(),
            seed: 4,
            eps: 0.2,
            beta: None,
            ns: vec![32],
            len_per_n: 4,
            min_updates: 500,
        };
        let points = run_bench(&bench).unwrap();
        assert_eq!(points[0].max_q, 32);
    }
}
