use std::sync::Arc;

use parking_lot::Mutex;

use super::goals::Goals;
use crate::par::OrFrame;
use crate::table::{lock_counted, SubgoalFrame, START};
use crate::terms::Cell;
use crate::tree::BranchNode;

/// A first call to a tabled subgoal.
#[derive(Debug)]
pub struct GenCall {
    pub frame: Arc<SubgoalFrame>,
    /// Heap addresses of the call's distinct variables, canonical order.
    pub vars: Arc<[usize]>,
    /// Continuation after the call.
    pub cont: Goals,
    pub node: Arc<BranchNode>,
}

/// A variant call suspended on an incomplete table.
#[derive(Debug)]
pub struct DepFrame {
    pub frame: Arc<SubgoalFrame>,
    pub consumer: Arc<BranchNode>,
    /// Age used for chain order; normally the consumer node's age.
    pub age: u64,
    /// Completion point for this consumer. Fixed at creation.
    pub leader: Arc<BranchNode>,
    pub goals: Goals,
    pub vars: Arc<[usize]>,
    /// Trail bindings at creation, used to rebuild the consumer's bindings.
    pub trail: Arc<[(usize, Cell)]>,
    /// Heap size at creation; the heap is never cut below it while the
    /// frame lives.
    pub heap_mark: usize,
    cursor: Mutex<u32>,
}

impl DepFrame {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        frame: Arc<SubgoalFrame>,
        consumer: Arc<BranchNode>,
        age: u64,
        leader: Arc<BranchNode>,
        goals: Goals,
        vars: Arc<[usize]>,
        trail: Arc<[(usize, Cell)]>,
        heap_mark: usize,
    ) -> Self {
        DepFrame { frame, consumer, age, leader, goals, vars, trail, heap_mark, cursor: Mutex::new(START) }
    }

    pub fn has_unconsumed(&self) -> bool {
        let (c, _) = lock_counted(&self.cursor, &self.frame.contention_dependency);
        self.frame.next_answer(*c).is_some()
    }

    /// Claims the next unconsumed answer leaf.
    pub fn take_next(&self) -> Option<u32> {
        let (mut c, _) = lock_counted(&self.cursor, &self.frame.contention_dependency);
        let n = self.frame.next_answer(*c)?;
        *c = n;
        Some(n)
    }

    pub fn cursor(&self) -> u32 {
        *self.cursor.lock()
    }
}

#[derive(Clone, Debug)]
pub enum CpKind {
    Root,
    Interior,
    Generator(Arc<GenCall>),
    Consumer { dep: Arc<DepFrame>, resumed: bool },
    /// Iterates a completed table.
    Loader,
}

#[derive(Clone, Debug)]
pub enum Alt {
    Clauses { pred: usize, list: Arc<[u32]>, next: usize },
    Dep,
    Answers { frame: Arc<SubgoalFrame>, vars: Arc<[usize]>, cursor: u32 },
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct ChoicePoint {
    pub node: Arc<BranchNode>,
    pub kind: CpKind,
    /// Continuation for the remaining alternatives.
    pub goals: Goals,
    pub call: usize,
    pub heap_top: usize,
    pub trail_top: usize,
    pub alt: Alt,
    /// Set once the node has been shared with other workers.
    pub public: Option<Arc<OrFrame>>,
}

impl ChoicePoint {
    pub fn is_tabled(&self) -> bool {
        matches!(self.kind, CpKind::Generator(_) | CpKind::Consumer { .. })
    }

    pub fn has_alternatives(&self) -> bool {
        match &self.alt {
            Alt::Clauses { list, next, .. } => *next < list.len(),
            Alt::Dep => match &self.kind {
                CpKind::Consumer { dep, .. } => dep.has_unconsumed(),
                _ => false,
            },
            Alt::Answers { frame, cursor, .. } => frame.next_answer(*cursor).is_some(),
            Alt::Exhausted => false,
        }
    }
}
