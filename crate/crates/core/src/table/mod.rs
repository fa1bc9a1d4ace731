//! Table space: per-predicate subgoal tries leading to subgoal frames, each
//! holding an answer trie with an insertion-order leaf chain.

mod frame;
mod locks;
mod trie;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

pub use frame::{AnswerResult, GenRef, SubgoalFrame, START};
pub use locks::{lock_counted, GlobalLocks, LockScheme, GLOBAL_LOCKS};
pub use trie::{Inserted, Trie, TrieCtx, NIL};

use crate::terms::{PredKey, Program, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("answer inserted into completed subgoal {0}")]
    InsertIntoComplete(u32),
    #[error("subgoal {0} completed twice")]
    AlreadyComplete(u32),
    #[error("subgoal {0} is not complete")]
    NotComplete(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct TableConfig {
    pub scheme: LockScheme,
    pub hash_threshold: u32,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig { scheme: LockScheme::default(), hash_threshold: 8 }
    }
}

pub struct TableEntry {
    pub pred: PredKey,
    pub subgoals: Trie,
    first_calls: AtomicU64,
}

pub struct Tables {
    pub config: TableConfig,
    entries: HashMap<PredKey, TableEntry>,
    order: Vec<PredKey>,
    frames: boxcar::Vec<Arc<SubgoalFrame>>,
    next_id: AtomicU32,
    locks: GlobalLocks,
}

impl Tables {
    pub fn new(program: &Program, config: TableConfig) -> Self {
        let order = program.tabled().to_vec();
        let entries = order
            .iter()
            .map(|&p| (p, TableEntry { pred: p, subgoals: Trie::new(), first_calls: AtomicU64::new(0) }))
            .collect();
        Tables { config, entries, order, frames: boxcar::Vec::new(), next_id: AtomicU32::new(0), locks: GlobalLocks::default() }
    }

    pub fn ctx(&self) -> TrieCtx<'_> {
        TrieCtx { scheme: self.config.scheme, threshold: self.config.hash_threshold, locks: &self.locks }
    }

    pub fn entry(&self, pred: PredKey) -> Option<&TableEntry> {
        self.entries.get(&pred)
    }

    /// Finds the frame for `args` (argument tokens of a call to `pred`),
    /// creating it with `generator` when absent. Returns the frame and
    /// whether this call created it.
    pub fn lookup_insert_subgoal(
        &self,
        pred: PredKey,
        args: &[Token],
        nvars: u32,
        generator: impl FnOnce() -> GenRef,
    ) -> Option<(Arc<SubgoalFrame>, bool)> {
        let e = self.entries.get(&pred)?;
        let ctx = self.ctx();
        let r = e.subgoals.insert(args, &ctx, || {
            let id = self.next_id.fetch_add(1, Ordering::Relaxed);
            let f = SubgoalFrame::new(id, pred, args.to_vec(), nvars, generator());
            self.frames.push(Arc::new(f)) as u32
        });
        let idx = e.subgoals.node(r.leaf).value.load(Ordering::Acquire);
        if r.created {
            e.first_calls.fetch_add(1, Ordering::Relaxed);
        }
        Some((self.frames[idx as usize].clone(), r.created))
    }

    pub fn insert_answer(&self, frame: &SubgoalFrame, tokens: &[Token]) -> Result<AnswerResult, TableError> {
        frame.insert_answer(tokens, &self.ctx())
    }

    pub fn frames(&self) -> impl Iterator<Item = &Arc<SubgoalFrame>> {
        self.frames.iter().map(|(_, f)| f)
    }

    pub fn frame_count(&self) -> usize {
        self.frames.count()
    }

    /// Frame of a call given as argument tokens, if it was ever called.
    pub fn find_frame(&self, pred: PredKey, args: &[Token]) -> Option<Arc<SubgoalFrame>> {
        let e = self.entries.get(&pred)?;
        let th = self.config.hash_threshold;
        let mut cur = 0;
        for &t in args {
            cur = e.subgoals.find_child(cur, t, th)?;
        }
        let idx = e.subgoals.node(cur).value.load(Ordering::Acquire);
        (idx != NIL).then(|| self.frames[idx as usize].clone())
    }

    pub fn collect_stats(&self) -> TableStats {
        let mut preds: Vec<PredStats> = self
            .order
            .iter()
            .map(|&p| {
                let e = &self.entries[&p];
                PredStats {
                    pred: p,
                    first: e.first_calls.load(Ordering::Relaxed),
                    subgoal_nodes: e.subgoals.len() as u64,
                    contention_trie_node: e.subgoals.contention.load(Ordering::Relaxed),
                    contention_trie_repeated: e.subgoals.contention_repeated.load(Ordering::Relaxed),
                    ..PredStats::default()
                }
            })
            .collect();
        let pos: HashMap<PredKey, usize> = self.order.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        for f in self.frames() {
            let s = &mut preds[pos[&f.pred]];
            let t = f.answer_trie();
            s.frames += 1;
            s.answer_nodes += t.len() as u64;
            s.unique += f.answer_count();
            s.repeated += f.repeated.load(Ordering::Relaxed);
            s.total_depth += f.answers().map(|l| t.depth(l) as u64).sum::<u64>();
            s.contention_subgoal_frame += f.contention_frame.load(Ordering::Relaxed);
            s.contention_dependency_frame += f.contention_dependency.load(Ordering::Relaxed);
            s.contention_trie_node += t.contention.load(Ordering::Relaxed);
            s.contention_trie_repeated += t.contention_repeated.load(Ordering::Relaxed);
        }
        let mut total = PredStats::default();
        for s in &preds {
            total.add(s);
        }
        TableStats { preds, total }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PredStats {
    pub pred: PredKey,
    /// Distinct subgoals called.
    pub first: u64,
    /// Subgoal trie nodes, root included.
    pub subgoal_nodes: u64,
    /// Answer trie nodes over all subgoals, roots included.
    pub answer_nodes: u64,
    pub frames: u64,
    pub unique: u64,
    pub repeated: u64,
    /// Sum over answers of the number of trie nodes below the root on its path.
    pub total_depth: u64,
    pub contention_subgoal_frame: u64,
    pub contention_dependency_frame: u64,
    pub contention_trie_node: u64,
    /// Trie-node contention seen by inserts that found the path already there.
    pub contention_trie_repeated: u64,
}

impl PredStats {
    fn add(&mut self, o: &PredStats) {
        self.first += o.first;
        self.subgoal_nodes += o.subgoal_nodes;
        self.answer_nodes += o.answer_nodes;
        self.frames += o.frames;
        self.unique += o.unique;
        self.repeated += o.repeated;
        self.total_depth += o.total_depth;
        self.contention_subgoal_frame += o.contention_subgoal_frame;
        self.contention_dependency_frame += o.contention_dependency_frame;
        self.contention_trie_node += o.contention_trie_node;
        self.contention_trie_repeated += o.contention_trie_repeated;
    }

    /// Answer nodes actually used, i.e. without the per-subgoal roots.
    pub fn used_nodes(&self) -> u64 {
        self.answer_nodes - self.frames
    }

    /// `(total - used) / total` as an exact fraction, where `total` counts
    /// one node per token of every answer stored on its own path.
    pub fn saving_fraction(&self) -> (u64, u64) {
        (self.total_depth - self.used_nodes(), self.total_depth)
    }

    pub fn saving(&self) -> f64 {
        let (n, d) = self.saving_fraction();
        if d == 0 {
            0.0
        } else {
            n as f64 / d as f64
        }
    }

    pub fn depth(&self) -> f64 {
        if self.unique == 0 {
            0.0
        } else {
            self.total_depth as f64 / self.unique as f64
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TableStats {
    pub preds: Vec<PredStats>,
    pub total: PredStats,
}
