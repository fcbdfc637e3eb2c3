//! `winsum` — run sliding-window maximum-subarray-sum estimators against
//! exact references, or benchmark their update throughput.
//!
//! Exit codes: `0` success, `1` runtime failure (including invariant or
//! error-envelope violations under `--check`), `2` invalid invocation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use winsum::{
    run_bench, run_compare, write_bench_csv, write_csv, write_json, Algo, BenchConfig,
    BenchPoint, BenchTarget, Error, RunConfig, RunReport, StreamKind, StreamSpec,
};

#[derive(Parser)]
#[command(
    name = "winsum",
    version,
    about = "Sliding-window maximum subarray sum: estimators, exact references, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream an input through an estimator and the exact reference,
    /// recording estimate, exact value, relative error and state size at
    /// every step.
    Run(RunArgs),
    /// Measure update throughput across window lengths.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    /// Per-step records as CSV.
    Csv,
    /// Records plus summary as JSON.
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Estimator: refined, standard, eh or nonempty.
    #[arg(long)]
    algo: Algo,
    /// Sliding-window length.
    #[arg(long, short = 'n')]
    window: u64,
    /// Accuracy parameter, strictly between 0 and 1.
    #[arg(long)]
    eps: f64,
    /// Prune factor for the standard rule (defaults to eps).
    #[arg(long)]
    beta: Option<f64>,
    /// Input stream, e.g. "uniform:-100..100", "walk:step=3",
    /// "bursty:len=50,hi=10,gap=200,lo=-3", "allneg:-9..-1",
    /// "bits:p=0.3", "decay:peak=100000,ratio=0.999", "file:values.txt".
    #[arg(long)]
    stream: StreamKind,
    /// Seed for the stream generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of stream elements.
    #[arg(long)]
    len: u64,
    /// Output format for the per-step records.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write records to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify structural invariants and the error envelope every step;
    /// the first violation aborts the run with exit code 1.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// What to time: refined, standard, eh, nonempty, or oracle (the
    /// exact buffer-and-rescan reference).
    #[arg(long)]
    algo: String,
    /// Window lengths to measure, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    windows: Vec<u64>,
    /// Accuracy parameter for the estimators.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Prune factor for the standard rule (defaults to eps).
    #[arg(long)]
    beta: Option<f64>,
    /// Input stream family.
    #[arg(long)]
    stream: StreamKind,
    /// Seed for the stream generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream length per point, as a multiple of the window length.
    #[arg(long, default_value_t = 8)]
    len_per_n: u64,
    /// Minimum updates per point.
    #[arg(long, default_value_t = 10_000)]
    min_updates: u64,
    /// Also write the points as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code an error deserves: 2 for a bad invocation, 1 for a runtime
/// failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_) | Error::InvalidStreamSpec { .. } | Error::InvalidConfig(_) => 2,
        _ => 1,
    }
}

type CliResult = Result<(), (u8, String)>;

fn lift(err: Error) -> (u8, String) {
    (exit_code_for(&err), err.to_string())
}

fn write_report(args: &RunArgs, report: &RunReport) -> CliResult {
    let render = |out: &mut dyn Write| match args.format {
        Format::Csv => write_csv(report, out),
        Format::Json => write_json(report, out),
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| (1, format!("cannot create {}: {e}", path.display())))?;
            let mut out = BufWriter::new(file);
            render(&mut out)
                .and_then(|()| out.flush())
                .map_err(|e| (1, format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            render(&mut out)
                .and_then(|()| out.flush())
                .map_err(|e| (1, format!("cannot write records: {e}")))
        }
    }
}

fn cmd_run(args: RunArgs) -> CliResult {
    let spec = StreamSpec::new(args.stream.clone(), args.seed, args.len).map_err(lift)?;
    let config = RunConfig {
        algo: args.algo,
        n: args.window,
        eps: args.eps,
        beta: args.beta,
        spec,
        check: args.check,
    };
    let report = run_compare(&config).map_err(lift)?;
    write_report(&args, &report)?;
    let s = &report.summary;
    eprintln!(
        "steps={} max_rel_err={} max_q={} mean_q={:.2} wall_time_s={:.4}",
        s.steps, s.max_rel_err, s.max_q, s.mean_q, s.wall_time_s
    );
    Ok(())
}

fn print_bench_table(points: &[BenchPoint]) {
    println!(
        "{:>12} {:>12} {:>14} {:>14} {:>8}",
        "n", "updates", "ns/update", "updates/s", "max_q"
    );
    for p in points {
        println!(
            "{:>12} {:>12} {:>14.1} {:>14.0} {:>8}",
            p.n, p.updates, p.ns_per_update, p.updates_per_s, p.max_q
        );
    }
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let target = match args.algo.as_str() {
        "oracle" => BenchTarget::Oracle,
        name => BenchTarget::Sketch(name.parse::<Algo>().map_err(lift)?),
    };
    let config = BenchConfig {
        target,
        kind: args.stream.clone(),
        seed: args.seed,
        eps: args.eps,
        beta: args.beta,
        ns: args.windows.clone(),
        len_per_n: args.len_per_n,
        min_updates: args.min_updates,
    };
    let points = run_bench(&config).map_err(lift)?;
    print_bench_table(&points);
    if let Some(path) = &args.out {
        let file = File::create(path)
            .map_err(|e| (1, format!("cannot create {}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        write_bench_csv(&points, &mut out)
            .and_then(|()| out.flush())
            .map_err(|e| (1, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            if code == 2 {
                eprintln!("run `winsum --help` for usage");
            }
            ExitCode::from(code)
        }
    }
}
