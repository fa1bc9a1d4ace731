use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgGroup, Parser};

use optab::bench::{speedup, speedup_csv, stats_table, Bench, BenchError, RunSpec};
use optab::engine::{EngineConfig, EngineError, Scheduling};
use optab::table::{LockScheme, TableConfig};

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;
const EXIT_TABLED_PRUNE: u8 = 5;
const EXIT_MISMATCH: u8 = 6;

/// Tabled logic programs, sequential or or-parallel.
#[derive(Parser, Debug)]
#[command(name = "optab", version)]
#[command(group(ArgGroup::new("source").required(true).args(["program", "gen"])))]
struct Args {
    /// Program file.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Built-in generator: lgrid, lgrid2, rgrid2, samegen, queens, path_fig1.
    #[arg(long, requires = "size")]
    gen: Option<Bench>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Query; defaults to the generator's own query.
    #[arg(long)]
    query: Option<String>,
    /// Parallel workers. Without it the sequential engine runs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Comma-separated worker counts; prints a speedup table instead of
    /// answers.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    speedup: Option<Vec<u64>>,
    #[arg(long, default_value = "batched")]
    scheduling: Scheduling,
    #[arg(long, default_value = "tlwl")]
    lock_scheme: LockScheme,
    /// Runs per configuration; the fastest one is reported.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Seconds before the run is abandoned.
    #[arg(long)]
    timeout: Option<f64>,
    /// Write key=value statistics to this file; a text table goes to stderr.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Print answers in the order they were found.
    #[arg(long)]
    unsorted: bool,
    /// Disable first-argument clause selection.
    #[arg(long)]
    no_index: bool,
    /// Seed for injected scheduling jitter.
    #[arg(long)]
    jitter: Option<u64>,
}

fn engine_exit(e: &EngineError) -> u8 {
    match e {
        EngineError::Timeout => EXIT_TIMEOUT,
        EngineError::TabledPrune => EXIT_TABLED_PRUNE,
        _ => EXIT_ERROR,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("optab: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (text, default_query) = match (&args.program, args.gen) {
        (Some(path), _) => match std::fs::read_to_string(path) {
            Ok(t) => (t, None),
            Err(e) => return fail(EXIT_ERROR, format!("{}: {e}", path.display())),
        },
        (None, Some(g)) => {
            let g = g.generate(args.size.unwrap_or(0), args.seed);
            (g.program, Some(g.query))
        }
        (None, None) => unreachable!("clap enforces a source"),
    };
    let Some(query) = args.query.clone().or(default_query) else {
        return fail(EXIT_USAGE, "--query is required with --program");
    };
    let engine = EngineConfig {
        scheduling: args.scheduling,
        indexing: !args.no_index,
        table: TableConfig { scheme: args.lock_scheme, ..TableConfig::default() },
        ..EngineConfig::default()
    };
    let mut spec = match RunSpec::parse(&text, &query, engine) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_PARSE, format!("parse error: {e}")),
    };
    spec.timeout = args.timeout.map(Duration::from_secs_f64);
    spec.jitter = args.jitter;

    let mut out = std::io::stdout().lock();
    if let Some(ws) = &args.speedup {
        let ws: Vec<usize> = ws.iter().map(|&w| w as usize).collect();
        return match speedup(&spec, &ws, args.reps) {
            Ok(rows) => {
                let _ = out.write_all(speedup_csv(&rows).as_bytes());
                ExitCode::SUCCESS
            }
            Err(BenchError::Engine(e)) => fail(engine_exit(&e), e),
            Err(e @ BenchError::Mismatch { .. }) => fail(EXIT_MISMATCH, e),
            Err(e) => fail(EXIT_ERROR, e),
        };
    }

    let workers = args.workers.unwrap_or(0) as usize;
    let outcome = match spec.best_of(workers, args.reps) {
        Ok(o) => o,
        Err(e) => return fail(engine_exit(&e), e),
    };
    let answers = if args.unsorted { outcome.result.lines() } else { outcome.sorted_answers() };
    for a in answers {
        if writeln!(out, "{a}").is_err() {
            break;
        }
    }
    if let Some(path) = &args.stats {
        if let Err(e) = std::fs::write(path, outcome.report()) {
            return fail(EXIT_ERROR, format!("{}: {e}", path.display()));
        }
        eprint!("{}", stats_table(&outcome));
    }
    ExitCode::SUCCESS
}
