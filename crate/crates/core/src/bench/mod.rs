//! Benchmark generators, timing harness and statistics reports.

pub mod gen;

use std::fmt::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::{solve, EngineConfig, EngineError, RunResult};
use crate::par::{run_parallel, ParConfig};
use crate::terms::{parse_program, parse_query, ParseError, Program, Query};

pub use gen::{Bench, Generated};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("answers at {workers} workers differ from those at {base} workers")]
    Mismatch { base: usize, workers: usize },
}

/// Everything needed to repeat a run.
#[derive(Clone)]
pub struct RunSpec {
    pub program: Arc<Program>,
    pub query: Query,
    pub engine: EngineConfig,
    pub timeout: Option<Duration>,
    pub jitter: Option<u64>,
}

impl RunSpec {
    pub fn parse(program: &str, query: &str, engine: EngineConfig) -> Result<RunSpec, ParseError> {
        let mut p = parse_program(program)?;
        let q = parse_query(&mut p.symbols, query)?;
        Ok(RunSpec { program: Arc::new(p), query: q, engine, timeout: None, jitter: None })
    }

    pub fn from_generated(g: &Generated, engine: EngineConfig) -> Result<RunSpec, ParseError> {
        RunSpec::parse(&g.program, &g.query, engine)
    }

    /// `workers == 0` runs the sequential engine; anything else the
    /// parallel one.
    pub fn run(&self, workers: usize) -> Result<Outcome, EngineError> {
        let mut cfg = self.engine.clone();
        let start = Instant::now();
        cfg.deadline = self.timeout.map(|t| start + t);
        let result = if workers == 0 {
            solve(self.program.clone(), &self.query, cfg)?
        } else {
            run_parallel(self.program.clone(), &self.query, cfg, &ParConfig { workers, jitter: self.jitter })?
        };
        let elapsed = start.elapsed();
        Ok(Outcome { elapsed, workers, result })
    }

    /// Fastest of `reps` runs.
    pub fn best_of(&self, workers: usize, reps: usize) -> Result<Outcome, EngineError> {
        let mut best: Option<Outcome> = None;
        for _ in 0..reps.max(1) {
            let o = self.run(workers)?;
            if best.as_ref().map_or(true, |b| o.elapsed < b.elapsed) {
                best = Some(o);
            }
        }
        Ok(best.unwrap())
    }
}

pub struct Outcome {
    pub elapsed: Duration,
    pub workers: usize,
    pub result: RunResult,
}

impl Outcome {
    pub fn sorted_answers(&self) -> Vec<String> {
        let mut v = self.result.lines();
        v.sort();
        v
    }

    pub fn report(&self) -> String {
        stats_report(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub workers: usize,
    pub best_ms: f64,
    pub speedup: f64,
}

/// Times the spec at each worker count, relative to the first count. Fails
/// if any count yields a different answer set.
pub fn speedup(spec: &RunSpec, workers: &[usize], reps: usize) -> Result<Vec<SpeedupRow>, BenchError> {
    let mut rows = Vec::new();
    let mut base: Option<(usize, Vec<String>, f64)> = None;
    for &w in workers {
        let o = spec.best_of(w, reps)?;
        let ms = o.elapsed.as_secs_f64() * 1e3;
        let answers = o.sorted_answers();
        let base_ms = match &base {
            None => {
                base = Some((w, answers, ms));
                ms
            }
            Some((bw, ba, bms)) => {
                if *ba != answers {
                    return Err(BenchError::Mismatch { base: *bw, workers: w });
                }
                *bms
            }
        };
        rows.push(SpeedupRow { workers: w, best_ms: ms, speedup: base_ms / ms.max(1e-9) });
    }
    Ok(rows)
}

pub fn speedup_csv(rows: &[SpeedupRow]) -> String {
    let mut s = String::from("workers,best_ms,speedup\n");
    for r in rows {
        writeln!(s, "{},{:.3},{:.3}", r.workers, r.best_ms, r.speedup).unwrap();
    }
    s
}

/// `key=value` lines: run totals, table totals, then per-predicate figures.
pub fn stats_report(o: &Outcome) -> String {
    let r = &o.result;
    let cfg = &r.shared.config;
    let t = r.shared.tables.collect_stats();
    let e = &r.stats;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        writeln!(s, "{k}={v}").unwrap();
    };
    kv("workers", o.workers.to_string());
    kv("scheduling", cfg.scheduling.to_string());
    kv("lock_scheme", cfg.table.scheme.to_string());
    kv("elapsed_ms", format!("{:.3}", o.elapsed.as_secs_f64() * 1e3));
    kv("answers", r.solutions.len().to_string());
    kv("variant_calls", e.variant_calls.to_string());
    kv("complete_calls", e.complete_calls.to_string());
    kv("completions", e.completions.to_string());
    kv("consumer_resumptions", e.consumer_resumptions.to_string());
    kv("scc_suspends", e.scc_suspends.to_string());
    kv("scc_resumes", e.scc_resumes.to_string());
    kv("shares", e.shares.to_string());
    kv("share_refusals", e.share_refusals.to_string());
    kv("leader_clamp_violations", e.leader_clamp_violations.to_string());
    let prefixes =
        std::iter::once(("table".to_string(), t.total)).chain(t.preds.iter().map(|p| (format!("table.{}", r.shared.program.pred_name(p.pred)), *p)));
    for (pre, p) in prefixes {
        kv(&format!("{pre}.first"), p.first.to_string());
        kv(&format!("{pre}.subgoal_nodes"), p.subgoal_nodes.to_string());
        kv(&format!("{pre}.answer_nodes"), p.answer_nodes.to_string());
        kv(&format!("{pre}.unique"), p.unique.to_string());
        kv(&format!("{pre}.repeated"), p.repeated.to_string());
        kv(&format!("{pre}.depth"), format!("{:.3}", p.depth()));
        kv(&format!("{pre}.saving"), format!("{:.4}", p.saving()));
        kv(&format!("{pre}.contention_subgoal_frame"), p.contention_subgoal_frame.to_string());
        kv(&format!("{pre}.contention_dependency_frame"), p.contention_dependency_frame.to_string());
        kv(&format!("{pre}.contention_trie_node"), p.contention_trie_node.to_string());
        kv(&format!("{pre}.contention_trie_repeated"), p.contention_trie_repeated.to_string());
    }
    s
}

/// The table figures as an aligned text table, one row per tabled
/// predicate and a total row.
pub fn stats_table(o: &Outcome) -> String {
    let r = &o.result;
    let t = r.shared.tables.collect_stats();
    let mut s = String::new();
    writeln!(
        s,
        "{:<16} {:>6} {:>8} {:>10} {:>7} {:>6} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "predicate", "first", "subgoal", "answer", "saving", "depth", "unique", "repeated", "c.frame", "c.dep", "c.trie"
    )
    .unwrap();
    let rows = t.preds.iter().map(|p| (r.shared.program.pred_name(p.pred), *p)).chain(std::iter::once(("total".to_string(), t.total)));
    for (name, p) in rows {
        writeln!(
            s,
            "{name:<16} {:>6} {:>8} {:>10} {:>7.4} {:>6.3} {:>10} {:>10} {:>8} {:>8} {:>8}",
            p.first,
            p.subgoal_nodes,
            p.answer_nodes,
            p.saving(),
            p.depth(),
            p.unique,
            p.repeated,
            p.contention_subgoal_frame,
            p.contention_dependency_frame,
            p.contention_trie_node
        )
        .unwrap();
    }
    s
}
