//! Sequential tabled evaluation over explicit choice-point and goal stacks.

pub mod builtins;
mod choice;
mod completion;
pub mod goals;
mod machine;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

pub use choice::{Alt, ChoicePoint, CpKind, DepFrame, GenCall};
pub use completion::leader_scan;
pub use goals::{Goal, GoalNode, Goals};
pub use machine::{Exit, GenEntry, Machine};

use crate::table::{TableConfig, TableError, Tables};
use crate::terms::{Program, Query, SymbolTable, Term, TermError};
use crate::tree::BranchNode;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Hash)]
pub enum Scheduling {
    #[default]
    Batched,
    Local,
}

impl fmt::Display for Scheduling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheduling::Batched => "batched",
            Scheduling::Local => "local",
        })
    }
}

impl FromStr for Scheduling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "batched" => Ok(Scheduling::Batched),
            "local" => Ok(Scheduling::Local),
            _ => Err(format!("unknown scheduling strategy {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub scheduling: Scheduling,
    pub occurs_check: bool,
    /// Select clauses by the first argument of the call.
    pub indexing: bool,
    pub table: TableConfig,
    /// Record every (node, alternative) pair executed.
    pub log_alternatives: bool,
    pub deadline: Option<Instant>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            scheduling: Scheduling::Batched,
            occurs_check: false,
            indexing: true,
            table: TableConfig::default(),
            log_alternatives: false,
            deadline: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("cut would prune a tabled node")]
    TabledPrune,
    #[error("arithmetic error: {0}")]
    Arith(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("time limit exceeded")]
    Timeout,
    #[error("run aborted")]
    Aborted,
    #[error("internal error: {0}")]
    Internal(String),
}

/// State shared by every worker of a run.
pub struct Shared {
    pub program: Arc<Program>,
    pub tables: Tables,
    pub config: EngineConfig,
    pub root: Arc<BranchNode>,
    pub abort: AtomicBool,
}

impl Shared {
    pub fn new(program: Arc<Program>, config: EngineConfig) -> Arc<Shared> {
        let tables = Tables::new(&program, config.table);
        Arc::new(Shared { program, tables, config, root: BranchNode::root(), abort: AtomicBool::new(false) })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Calls that found an incomplete table and became consumers.
    pub variant_calls: u64,
    /// Calls served from a completed table.
    pub complete_calls: u64,
    /// Subgoals this worker marked complete.
    pub completions: u64,
    /// Consumers resumed from a completion point.
    pub consumer_resumptions: u64,
    pub scc_suspends: u64,
    pub scc_resumes: u64,
    pub shares: u64,
    pub share_refusals: u64,
    /// Times a worker left a node older than its current leader; must stay 0.
    pub leader_clamp_violations: u64,
    pub alternatives: u64,
}

impl EngineStats {
    pub fn add(&mut self, o: &EngineStats) {
        self.variant_calls += o.variant_calls;
        self.complete_calls += o.complete_calls;
        self.completions += o.completions;
        self.consumer_resumptions += o.consumer_resumptions;
        self.scc_suspends += o.scc_suspends;
        self.scc_resumes += o.scc_resumes;
        self.shares += o.shares;
        self.share_refusals += o.share_refusals;
        self.leader_clamp_violations += o.leader_clamp_violations;
        self.alternatives += o.alternatives;
    }
}

/// One solution: a term per named query variable, in query order.
pub type Solution = Vec<Term>;

pub struct RunResult {
    pub solutions: Vec<Solution>,
    pub var_names: Vec<String>,
    pub shared: Arc<Shared>,
    pub stats: EngineStats,
    /// (node id, alternative index) pairs, when logging was on.
    pub log: Vec<(u64, u32)>,
}

impl RunResult {
    pub fn format_solution(&self, syms: &SymbolTable, s: &Solution) -> String {
        format_solution(syms, &self.var_names, s)
    }

    /// Solutions rendered one per line, in emission order.
    pub fn lines(&self) -> Vec<String> {
        self.solutions.iter().map(|s| self.format_solution(&self.shared.program.symbols, s)).collect()
    }
}

pub fn format_solution(syms: &SymbolTable, names: &[String], s: &Solution) -> String {
    if names.is_empty() {
        return "true".into();
    }
    let mut out = String::new();
    for (i, (n, t)) in names.iter().zip(s).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(n);
        out.push('=');
        out.push_str(&t.display(syms).to_string());
    }
    out
}

/// Runs `query` to exhaustion on a single worker.
pub fn solve(program: Arc<Program>, query: &Query, config: EngineConfig) -> Result<RunResult, EngineError> {
    let shared = Shared::new(program, config);
    let mut m = Machine::new(shared.clone(), 0);
    let names = m.start(query);
    match m.run()? {
        Exit::Done => {}
        other => return Err(EngineError::Internal(format!("unexpected exit {other:?} in sequential run"))),
    }
    Ok(RunResult { solutions: std::mem::take(&mut m.solutions), var_names: names, shared, stats: m.stats, log: m.take_log() })
}
