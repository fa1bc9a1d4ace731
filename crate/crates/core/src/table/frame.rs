use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;

use super::locks::lock_counted;
use super::trie::{Trie, TrieCtx, NIL};
use super::TableError;
use crate::terms::{PredKey, Token};
use crate::tree::BranchNode;

/// Cursor value meaning "before the first answer".
pub const START: u32 = NIL;

/// The generator choice point that evaluates a subgoal.
#[derive(Clone, Debug)]
pub struct GenRef {
    pub node: Arc<BranchNode>,
    pub worker: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AnswerResult {
    New(u32),
    Repeated,
}

struct Chain {
    last: u32,
}

pub struct SubgoalFrame {
    pub id: u32,
    pub pred: PredKey,
    /// Argument tokens of the call, variables numbered canonically.
    pub key: Vec<Token>,
    /// Number of distinct variables in the call; each answer binds them all.
    pub nvars: u32,
    pub generator: GenRef,
    answers: Trie,
    chain: Mutex<Chain>,
    first: AtomicU32,
    count: AtomicU64,
    complete: AtomicBool,
    pub repeated: AtomicU64,
    pub contention_frame: AtomicU64,
    pub contention_dependency: AtomicU64,
    /// Successful `mark_complete` calls; must end at exactly 1.
    pub completions: AtomicU32,
}

impl std::fmt::Debug for SubgoalFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SubgoalFrame#{}", self.id)
    }
}

impl SubgoalFrame {
    pub fn new(id: u32, pred: PredKey, key: Vec<Token>, nvars: u32, generator: GenRef) -> Self {
        SubgoalFrame {
            id,
            pred,
            key,
            nvars,
            generator,
            answers: Trie::new(),
            chain: Mutex::new(Chain { last: NIL }),
            first: AtomicU32::new(NIL),
            count: AtomicU64::new(0),
            complete: AtomicBool::new(false),
            repeated: AtomicU64::new(0),
            contention_frame: AtomicU64::new(0),
            contention_dependency: AtomicU64::new(0),
            completions: AtomicU32::new(0),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.complete.load(Ordering::Acquire)
    }

    pub fn answer_trie(&self) -> &Trie {
        &self.answers
    }

    pub fn answer_count(&self) -> u64 {
        self.count.load(Ordering::Acquire)
    }

    pub fn insert_answer(&self, tokens: &[Token], ctx: &TrieCtx<'_>) -> Result<AnswerResult, TableError> {
        if self.is_complete() {
            return Err(TableError::InsertIntoComplete(self.id));
        }
        let r = self.answers.insert(tokens, ctx, || NIL);
        if !r.created {
            self.repeated.fetch_add(1, Ordering::Relaxed);
            return Ok(AnswerResult::Repeated);
        }
        let (mut chain, _) = lock_counted(&self.chain, &self.contention_frame);
        if chain.last == NIL {
            self.first.store(r.leaf, Ordering::Release);
        } else {
            self.answers.node(chain.last).value.store(r.leaf, Ordering::Release);
        }
        chain.last = r.leaf;
        self.count.fetch_add(1, Ordering::Release);
        Ok(AnswerResult::New(r.leaf))
    }

    /// Leaf following `after` in insertion order; `START` asks for the first.
    pub fn next_answer(&self, after: u32) -> Option<u32> {
        let n = if after == START {
            self.first.load(Ordering::Acquire)
        } else {
            self.answers.node(after).value.load(Ordering::Acquire)
        };
        (n != NIL).then_some(n)
    }

    pub fn answer_tokens(&self, leaf: u32, out: &mut Vec<Token>) {
        self.answers.path(leaf, out)
    }

    pub fn mark_complete(&self) -> Result<(), TableError> {
        if self.complete.swap(true, Ordering::AcqRel) {
            return Err(TableError::AlreadyComplete(self.id));
        }
        self.completions.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    /// Completes the frame unless it already is; reports whether this call did it.
    pub(crate) fn try_complete(&self) -> bool {
        self.mark_complete().is_ok()
    }

    /// Leaves in insertion order.
    pub fn answers(&self) -> impl Iterator<Item = u32> + '_ {
        let mut cur = START;
        std::iter::from_fn(move || {
            let n = self.next_answer(cur)?;
            cur = n;
            Some(n)
        })
    }

    pub fn load_completed_answers(&self) -> Result<impl Iterator<Item = u32> + '_, TableError> {
        if !self.is_complete() {
            return Err(TableError::NotComplete(self.id));
        }
        Ok(self.answers())
    }

    /// All answers as token vectors, in insertion order.
    pub fn answer_list(&self) -> Vec<Vec<Token>> {
        self.answers()
            .map(|l| {
                let mut v = Vec::new();
                self.answer_tokens(l, &mut v);
                v
            })
            .collect()
    }
}
