use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use super::builtins;
use super::choice::{Alt, ChoicePoint, CpKind, DepFrame, GenCall};
use super::goals::{self, Goal, Goals};
use super::{EngineError, EngineStats, Scheduling, Shared, Solution};
use crate::table::{AnswerResult, GenRef, SubgoalFrame, START};
use crate::terms::{wk, ArgKey, Cell, Query, Store, Term, Token};
use crate::tree::BranchNode;

/// An incomplete subgoal whose generator ran on this worker's branch.
#[derive(Clone, Debug)]
pub struct GenEntry {
    pub age: u64,
    pub frame: Arc<SubgoalFrame>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    /// No choice points left.
    Done,
    /// A shared node ran out of alternatives; the scheduler takes over.
    Public,
    /// A work request is pending and the machine is at a safe point.
    Share,
}

pub(super) enum Retry {
    Resumed,
    Failed,
    Exhausted,
}

pub struct Machine {
    pub shared: Arc<Shared>,
    pub worker: usize,
    pub store: Store,
    pub cps: Vec<ChoicePoint>,
    pub goals: Goals,
    /// Incomplete generators evaluated here, oldest first.
    pub gens: Vec<GenEntry>,
    /// Dependency chain, oldest first.
    pub deps: Vec<Arc<DepFrame>>,
    /// Heap cells below this line belong to live consumers.
    pub freeze: usize,
    pub age: u64,
    pub stats: EngineStats,
    pub solutions: Vec<Solution>,
    pub query_vars: Arc<[usize]>,
    pub share_flag: Option<Arc<AtomicBool>>,
    /// When nonzero, yield the thread whenever `steps & yield_mask == 0`;
    /// used to inject scheduling jitter.
    pub yield_mask: u64,
    pub(super) log: Option<Vec<(u64, u32)>>,
    steps: u64,
    varbuf: Vec<Option<usize>>,
}

impl Machine {
    pub fn new(shared: Arc<Shared>, worker: usize) -> Machine {
        let mut store = Store::new();
        store.occurs_check = shared.config.occurs_check;
        let log = shared.config.log_alternatives.then(Vec::new);
        Machine {
            shared,
            worker,
            store,
            cps: Vec::new(),
            goals: None,
            gens: Vec::new(),
            deps: Vec::new(),
            freeze: 0,
            age: 0,
            stats: EngineStats::default(),
            solutions: Vec::new(),
            query_vars: Vec::new().into(),
            share_flag: None,
            log,
            steps: 0,
            yield_mask: 0,
            varbuf: Vec::new(),
        }
    }

    /// Sets up the root choice point and the query goals. Returns the names
    /// of the reported query variables.
    pub fn start(&mut self, query: &Query) -> Vec<String> {
        self.cps.push(ChoicePoint {
            node: self.shared.root.clone(),
            kind: CpKind::Root,
            goals: None,
            call: 0,
            heap_top: 0,
            trail_top: 0,
            alt: Alt::Exhausted,
            public: None,
        });
        let mut vars = vec![None; query.var_names.len()];
        let named = query.named_vars();
        for &(v, _) in &named {
            if vars[v as usize].is_none() {
                vars[v as usize] = Some(self.store.new_var());
            }
        }
        self.query_vars = named.iter().map(|&(v, _)| vars[v as usize].unwrap()).collect();
        let mut g = goals::push(Goal::Solution, None);
        for t in query.goals.iter().rev() {
            g = if *t == Term::Atom(wk::CUT) {
                goals::push(Goal::Cut { barrier: 1, age: 0 }, g)
            } else {
                let a = self.store.put_term_addr(t, &mut vars);
                goals::push(Goal::Call(a), g)
            };
        }
        self.goals = g;
        named.iter().map(|&(_, n)| n.to_string()).collect()
    }

    pub fn take_log(&mut self) -> Vec<(u64, u32)> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn next_age(&mut self) -> u64 {
        self.age += 1;
        self.age
    }

    fn tick(&mut self) -> Result<(), EngineError> {
        self.steps += 1;
        if self.yield_mask != 0 && self.steps & self.yield_mask == 0 {
            std::thread::yield_now();
        }
        if self.steps & 1023 == 0 {
            if self.shared.abort.load(Ordering::Relaxed) {
                return Err(EngineError::Aborted);
            }
            if let Some(d) = self.shared.config.deadline {
                if Instant::now() >= d {
                    return Err(EngineError::Timeout);
                }
            }
        }
        Ok(())
    }

    /// Runs forward and backward until the machine needs outside help.
    pub fn run(&mut self) -> Result<Exit, EngineError> {
        loop {
            self.tick()?;
            if let Some(f) = &self.share_flag {
                if f.load(Ordering::Relaxed) {
                    return Ok(Exit::Share);
                }
            }
            let node = self.goals.take().expect("goal lists end in Solution");
            self.goals = node.next.clone();
            let ok = match &node.goal {
                Goal::Call(a) => self.call(*a)?,
                Goal::Cut { barrier, age } => self.cut(*barrier, *age)?,
                Goal::NewAnswer(g) => self.new_answer(g)?,
                Goal::Solution => {
                    self.record_solution();
                    false
                }
            };
            if !ok {
                if let Some(exit) = self.backtrack()? {
                    return Ok(exit);
                }
            }
        }
    }

    fn record_solution(&mut self) {
        let mut names = HashMap::new();
        let s = self.query_vars.iter().map(|&a| self.store.to_term(a, &mut names)).collect();
        self.solutions.push(s);
    }

    fn call(&mut self, a: usize) -> Result<bool, EngineError> {
        let (f, n, p) = self.store.callable(a)?;
        if builtins::is_builtin(f, n) {
            return builtins::call(&mut self.store, f, n, p);
        }
        let prog = self.shared.program.clone();
        let Some(pi) = prog.pred_index((f, n)) else {
            return Ok(false);
        };
        let list = self.clause_list(pi, n, p);
        if prog.is_tabled((f, n)) {
            return self.tabled_call(a, pi, list);
        }
        if list.is_empty() {
            return Ok(false);
        }
        let barrier = self.cps.len();
        let cont = self.goals.clone();
        if list.len() > 1 {
            let age = self.next_age();
            let node = BranchNode::child(&self.cps.last().unwrap().node, age);
            self.cps.push(ChoicePoint {
                node,
                kind: CpKind::Interior,
                goals: cont.clone(),
                call: a,
                heap_top: self.store.len(),
                trail_top: self.store.trail().len(),
                alt: Alt::Clauses { pred: pi, list: list.clone(), next: 1 },
                public: None,
            });
            if let Some(l) = &mut self.log {
                l.push((self.cps.last().unwrap().node.id, 0));
            }
        }
        Ok(self.try_clause(pi, list[0], a, barrier, cont))
    }

    fn clause_list(&self, pi: usize, n: u32, p: usize) -> Arc<[u32]> {
        let pred = &self.shared.program.predicates()[pi];
        if !self.shared.config.indexing || n == 0 {
            return pred.all_clauses().clone();
        }
        let a = self.store.deref(p + 1);
        let key = match self.store.cell(a) {
            Cell::Ref(_) => None,
            Cell::Atom(s) => Some(ArgKey::Atom(s)),
            Cell::Int(i) => Some(ArgKey::Int(i)),
            Cell::Str(q) => match self.store.cell(q) {
                Cell::Fun(f, k) => Some(ArgKey::Functor(f, k)),
                _ => unreachable!(),
            },
            Cell::Fun(..) => unreachable!(),
        };
        pred.clauses_for(key).clone()
    }

    /// Resolves the call at `call` with clause `ci`. On success the body is
    /// pushed in front of `cont`.
    pub(super) fn try_clause(&mut self, pi: usize, ci: u32, call: usize, barrier: usize, cont: Goals) -> bool {
        let prog = self.shared.program.clone();
        let clause = &prog.predicates()[pi].clauses[ci as usize];
        let mut vars = std::mem::take(&mut self.varbuf);
        vars.clear();
        vars.resize(clause.nvars as usize, None);
        let ok = self.unify_head(&clause.head, call, &mut vars);
        if ok {
            let mut g = cont;
            for t in clause.body.iter().rev() {
                g = if *t == Term::Atom(wk::CUT) {
                    goals::push(Goal::Cut { barrier, age: self.age }, g)
                } else {
                    let a = self.store.put_term_addr(t, &mut vars);
                    goals::push(Goal::Call(a), g)
                };
            }
            self.goals = g;
        }
        self.varbuf = vars;
        ok
    }

    fn unify_head(&mut self, head: &Term, call: usize, vars: &mut [Option<usize>]) -> bool {
        let args = head.args();
        if args.is_empty() {
            return true;
        }
        let Ok((_, _, p)) = self.store.callable(call) else { return false };
        for (i, t) in args.iter().enumerate() {
            let ca = p + 1 + i;
            let ok = match t {
                Term::Var(v) => match vars[*v as usize] {
                    None => {
                        vars[*v as usize] = Some(ca);
                        true
                    }
                    Some(va) => self.store.unify(va, ca),
                },
                Term::Atom(s) => self.store.unify_const(ca, Cell::Atom(*s)),
                Term::Int(k) => self.store.unify_const(ca, Cell::Int(*k)),
                Term::Compound(..) => {
                    let ha = self.store.put_term_addr(t, vars);
                    self.store.unify(ha, ca)
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn tabled_call(&mut self, a: usize, pi: usize, list: Arc<[u32]>) -> Result<bool, EngineError> {
        let (key, vars) = self.store.canonical_variant(a)?;
        let Token::Functor(f, n) = key.0[0] else { unreachable!() };
        let age = self.next_age();
        let tip = self.cps.last().unwrap().node.clone();
        let node = BranchNode::child(&tip, age);
        let worker = self.worker;
        let shared = self.shared.clone();
        let (frame, is_new) = shared
            .tables
            .lookup_insert_subgoal((f, n), &key.0[1..], vars.len() as u32, || GenRef { node: node.clone(), worker })
            .expect("tabled predicate has a table entry");
        let vars: Arc<[usize]> = vars.into();
        let heap_top = self.store.len();
        let trail_top = self.store.trail().len();
        if is_new {
            let g = Arc::new(GenCall { frame: frame.clone(), vars, cont: self.goals.clone(), node: node.clone() });
            self.gens.push(GenEntry { age, frame });
            self.cps.push(ChoicePoint {
                node,
                kind: CpKind::Generator(g.clone()),
                goals: goals::push(Goal::NewAnswer(g), None),
                call: a,
                heap_top,
                trail_top,
                alt: Alt::Clauses { pred: pi, list, next: 0 },
                public: None,
            });
        } else if frame.is_complete() {
            self.stats.complete_calls += 1;
            if frame.next_answer(START).is_none() {
                return Ok(false);
            }
            self.cps.push(ChoicePoint {
                node,
                kind: CpKind::Loader,
                goals: self.goals.clone(),
                call: a,
                heap_top,
                trail_top,
                alt: Alt::Answers { frame, vars, cursor: START },
                public: None,
            });
        } else {
            self.stats.variant_calls += 1;
            let leader = self.compute_leader(&tip, &frame.generator.node);
            let dep = Arc::new(DepFrame::new(
                frame,
                node.clone(),
                age,
                leader,
                self.goals.clone(),
                vars,
                self.store.trail_snapshot(0).into(),
                heap_top,
            ));
            self.deps.push(dep.clone());
            self.freeze = self.freeze.max(heap_top);
            self.cps.push(ChoicePoint {
                node,
                kind: CpKind::Consumer { dep, resumed: false },
                goals: self.goals.clone(),
                call: a,
                heap_top,
                trail_top,
                alt: Alt::Dep,
                public: None,
            });
        }
        Ok(false)
    }

    fn new_answer(&mut self, g: &Arc<GenCall>) -> Result<bool, EngineError> {
        let mut toks = Vec::new();
        let mut seen = Vec::new();
        for &v in g.vars.iter() {
            self.store.encode(v, &mut toks, &mut seen);
        }
        match self.shared.tables.insert_answer(&g.frame, &toks)? {
            AnswerResult::New(_) if self.shared.config.scheduling == Scheduling::Batched => {
                self.goals = g.cont.clone();
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn cut(&mut self, barrier: usize, age: u64) -> Result<bool, EngineError> {
        if barrier >= self.cps.len() {
            return Ok(true);
        }
        let pruned = &self.cps[barrier..];
        if pruned.iter().any(|c| c.is_tabled())
            || self.gens.last().is_some_and(|g| g.age > age)
            || self.deps.last().is_some_and(|d| d.age > age)
        {
            return Err(EngineError::TabledPrune);
        }
        if pruned.iter().any(|c| c.public.is_some()) {
            return Err(EngineError::Internal("cut reached a shared node".into()));
        }
        self.cps.truncate(barrier);
        Ok(true)
    }

    /// Restores the bindings and heap of choice point `i`.
    pub(crate) fn restore(&mut self, i: usize) {
        let (h, t) = (self.cps[i].heap_top, self.cps[i].trail_top);
        self.restore_to(h, t);
    }

    pub fn restore_to(&mut self, heap_top: usize, trail_top: usize) {
        self.store.undo_unchecked(trail_top);
        self.store.truncate(heap_top.max(self.freeze));
    }

    /// Backtracks to the youngest choice point with work. `None` means
    /// forward execution resumed.
    pub fn backtrack(&mut self) -> Result<Option<Exit>, EngineError> {
        loop {
            self.tick()?;
            let Some(top) = self.cps.last() else {
                return Ok(Some(Exit::Done));
            };
            let public = top.public.is_some();
            let i = self.cps.len() - 1;
            match self.retry(i)? {
                Retry::Resumed => return Ok(None),
                Retry::Failed => {}
                Retry::Exhausted if public => return Ok(Some(Exit::Public)),
                Retry::Exhausted => self.on_exhausted(i)?,
            }
        }
    }

    /// Takes the next alternative of choice point `i`. Shared nodes keep
    /// their alternatives in the or-frame.
    pub(super) fn retry(&mut self, i: usize) -> Result<Retry, EngineError> {
        enum Taken {
            Clause { pi: usize, ci: u32, k: usize, last: bool },
            Answer { frame: Arc<SubgoalFrame>, leaf: u32, vars: Arc<[usize]> },
            Nothing,
        }
        let public = self.cps[i].public.clone();
        let mut guard = public.as_ref().map(|p| p.lock());
        let cp = &mut self.cps[i];
        let alt = match guard.as_mut() {
            Some(g) => &mut g.alt,
            None => &mut cp.alt,
        };
        let taken = match alt {
            Alt::Clauses { pred, list, next } => {
                if *next >= list.len() {
                    Taken::Nothing
                } else {
                    let t = Taken::Clause { pi: *pred, ci: list[*next], k: *next, last: *next + 1 == list.len() };
                    *next += 1;
                    t
                }
            }
            Alt::Dep => {
                let CpKind::Consumer { dep, .. } = &cp.kind else { unreachable!() };
                match dep.take_next() {
                    Some(leaf) => Taken::Answer { frame: dep.frame.clone(), leaf, vars: dep.vars.clone() },
                    None => Taken::Nothing,
                }
            }
            Alt::Answers { frame, vars, cursor } => match frame.next_answer(*cursor) {
                Some(leaf) => {
                    *cursor = leaf;
                    Taken::Answer { frame: frame.clone(), leaf, vars: vars.clone() }
                }
                None => Taken::Nothing,
            },
            Alt::Exhausted => Taken::Nothing,
        };
        drop(guard);
        match taken {
            Taken::Nothing => Ok(Retry::Exhausted),
            Taken::Clause { pi, ci, k, last } => {
                let cp = &self.cps[i];
                let (call, cont, node_age, node_id) = (cp.call, cp.goals.clone(), cp.node.age, cp.node.id);
                let poppable = last && public.is_none() && matches!(cp.kind, CpKind::Interior);
                self.restore(i);
                if let Some(l) = &mut self.log {
                    l.push((node_id, k as u32));
                }
                self.stats.alternatives += 1;
                if poppable && !self.deps.last().is_some_and(|d| d.age > node_age) {
                    self.cps.pop();
                }
                Ok(if self.try_clause(pi, ci, call, i, cont) { Retry::Resumed } else { Retry::Failed })
            }
            Taken::Answer { frame, leaf, vars } => {
                let cont = self.cps[i].goals.clone();
                self.restore(i);
                Ok(self.consume(&frame, leaf, &vars, cont))
            }
        }
    }

    /// Binds `vars` to answer `leaf` and continues with `cont`.
    pub(super) fn consume(&mut self, frame: &SubgoalFrame, leaf: u32, vars: &[usize], cont: Goals) -> Retry {
        let mut toks = Vec::new();
        frame.answer_tokens(leaf, &mut toks);
        let addrs = self.store.decode(&toks, vars.len());
        for (&v, &t) in vars.iter().zip(&addrs) {
            if !self.store.unify(v, t) {
                return Retry::Failed;
            }
        }
        self.goals = cont;
        Retry::Resumed
    }

    pub fn log_mut(&mut self) -> Option<&mut Vec<(u64, u32)>> {
        self.log.as_mut()
    }
}
