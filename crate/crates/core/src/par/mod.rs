//! Or-parallel execution: a pool of sequential engines that share branches of
//! the search tree by copying and cooperate on completion of shared subgoals.

mod share;
mod worker;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, MutexGuard};

use crate::engine::{
    Alt, ChoicePoint, CpKind, DepFrame, EngineConfig, EngineError, EngineStats, GenEntry, RunResult, Shared,
};
use crate::terms::{Program, Query, Store};
use crate::tree::BranchNode;
use share::Slot;
use worker::Worker;

/// Synchronization record of a shared node.
pub struct OrFrame {
    pub node: Arc<BranchNode>,
    pub parent: Option<Arc<OrFrame>>,
    inner: Mutex<OrInner>,
}

pub struct OrInner {
    /// Alternatives not yet taken by any worker.
    pub alt: Alt,
    /// Workers positioned at or below the node, plus holders of frozen work
    /// under it.
    pub members: u32,
    pub suspended: Vec<SuspendedScc>,
    /// Set once a worker turned the exhausted generator into a consumer of
    /// its own table (local scheduling).
    pub converted: bool,
}

impl OrFrame {
    pub fn new(node: Arc<BranchNode>, parent: Option<Arc<OrFrame>>, alt: Alt, members: u32) -> Arc<OrFrame> {
        Arc::new(OrFrame {
            node,
            parent,
            inner: Mutex::new(OrInner { alt, members, suspended: Vec::new(), converted: false }),
        })
    }

    pub fn lock(&self) -> MutexGuard<'_, OrInner> {
        self.inner.lock()
    }

    pub fn members(&self) -> u32 {
        self.inner.lock().members
    }
}

impl std::fmt::Debug for OrFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OrFrame(node {})", self.node.id)
    }
}

/// An incomplete SCC set aside at its leader so the worker could move on.
pub struct SuspendedScc {
    pub leader: Arc<BranchNode>,
    /// Choice points from the root up to and including the leader.
    pub cps: Vec<ChoicePoint>,
    pub store: Store,
    pub gens: Vec<GenEntry>,
    pub deps: Vec<Arc<DepFrame>>,
    pub held: Vec<Arc<OrFrame>>,
    pub age: u64,
}

impl SuspendedScc {
    pub fn has_unconsumed(&self) -> bool {
        self.deps.iter().any(|d| d.has_unconsumed())
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParConfig {
    pub workers: usize,
    /// Seed for randomized yields and donor order; `None` runs without
    /// injected jitter.
    pub jitter: Option<u64>,
}

/// State shared by the worker pool.
pub(crate) struct Pool {
    pub shared: Arc<Shared>,
    pub slots: Vec<Slot>,
    pub root: Arc<OrFrame>,
    pub done: AtomicBool,
    pub error: Mutex<Option<EngineError>>,
    pub jitter: Option<u64>,
}

impl Pool {
    fn fail(&self, e: EngineError) {
        let mut slot = self.error.lock();
        if slot.is_none() || *slot == Some(EngineError::Aborted) {
            *slot = Some(e);
        }
        self.shared.abort.store(true, Ordering::Relaxed);
    }
}

/// Runs `query` on `cfg.workers` workers. Solutions come back in completion
/// order per worker; callers that compare runs should sort them.
pub fn run_parallel(program: Arc<Program>, query: &Query, config: EngineConfig, cfg: &ParConfig) -> Result<RunResult, EngineError> {
    let n = cfg.workers.max(1);
    let shared = Shared::new(program, config);
    let root = OrFrame::new(shared.root.clone(), None, Alt::Exhausted, 1);
    let pool = Arc::new(Pool {
        shared: shared.clone(),
        slots: (0..n).map(|i| Slot::new(i == 0)).collect(),
        root,
        done: AtomicBool::new(false),
        error: Mutex::new(None),
        jitter: cfg.jitter,
    });
    let mut var_names = Vec::new();
    let mut workers: Vec<Worker> = (0..n).map(|i| Worker::new(pool.clone(), i)).collect();
    for (i, w) in workers.iter_mut().enumerate() {
        let names = w.m.start(query);
        w.m.cps[0].public = Some(pool.root.clone());
        if i == 0 {
            var_names = names;
        } else {
            w.m.goals = None;
            w.idle = true;
        }
    }
    let results: Vec<Worker> = std::thread::scope(|s| {
        let handles: Vec<_> = workers
            .into_iter()
            .map(|mut w| {
                let pool = pool.clone();
                s.spawn(move || {
                    if let Err(e) = w.run() {
                        pool.fail(e);
                    }
                    w
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    if let Some(e) = pool.error.lock().take() {
        return Err(e);
    }
    let mut stats = EngineStats::default();
    let mut solutions = Vec::new();
    let mut log = Vec::new();
    for mut w in results {
        stats.add(&w.m.stats);
        solutions.append(&mut w.m.solutions);
        log.append(&mut w.m.take_log());
    }
    if let Some(f) = shared.tables.frames().find(|f| !f.is_complete()) {
        return Err(EngineError::Internal(format!("subgoal frame {} left incomplete", f.id)));
    }
    Ok(RunResult { solutions, var_names, shared, stats, log })
}

fn generator_frame(cp: &ChoicePoint) -> Option<Arc<crate::table::SubgoalFrame>> {
    match &cp.kind {
        CpKind::Generator(g) => Some(g.frame.clone()),
        _ => None,
    }
}
