use std::collections::HashSet;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{generator_frame, OrFrame, OrInner, Pool, SuspendedScc};
use crate::engine::{Alt, CpKind, EngineError, Exit, Machine, Scheduling};
use crate::table::START;

pub(crate) struct Worker {
    pub m: Machine,
    pub id: usize,
    pub pool: Arc<Pool>,
    /// Shared nodes this worker left while frozen work below them was
    /// still incomplete; it stays counted as a member.
    pub held: Vec<Arc<OrFrame>>,
    /// Nodes with no members whose suspended SCCs this worker must collect.
    pub list: Vec<Arc<OrFrame>>,
    pub idle: bool,
    pub rng: StdRng,
}

impl Worker {
    pub fn new(pool: Arc<Pool>, id: usize) -> Worker {
        let mut m = Machine::new(pool.shared.clone(), id);
        m.share_flag = Some(pool.slots[id].flag.clone());
        let seed = pool.jitter.unwrap_or(0x5eed) ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = StdRng::seed_from_u64(seed);
        if pool.jitter.is_some() {
            m.yield_mask = (1 << rng.gen_range(2..7)) - 1;
        }
        Worker { m, id, pool, held: Vec::new(), list: Vec::new(), idle: false, rng }
    }

    pub(crate) fn jitter(&mut self) {
        if self.pool.jitter.is_none() {
            return;
        }
        match self.rng.gen_range(0..4) {
            0 => std::thread::yield_now(),
            1 => {
                for _ in 0..self.rng.gen_range(0..500) {
                    std::hint::spin_loop();
                }
            }
            _ => {}
        }
    }

    pub fn run(&mut self) -> Result<(), EngineError> {
        let mut ready = self.id == 0;
        loop {
            if !ready && !self.schedule()? {
                return Ok(());
            }
            ready = match self.m.run()? {
                Exit::Public => false,
                Exit::Share => {
                    self.serve_share();
                    true
                }
                Exit::Done => return Err(EngineError::Internal("worker lost the root node".into())),
            };
        }
    }

    /// Moves through shared nodes until forward execution can resume.
    /// False once the whole run has finished.
    fn schedule(&mut self) -> Result<bool, EngineError> {
        loop {
            if self.pool.shared.abort.load(Ordering::Relaxed) {
                return Err(EngineError::Aborted);
            }
            if self.pool.done.load(Ordering::Acquire) {
                return Ok(false);
            }
            self.jitter();
            match self.m.backtrack()? {
                None => return Ok(true),
                Some(Exit::Public) => {}
                Some(e) => return Err(EngineError::Internal(format!("unexpected exit {e:?} while scheduling"))),
            }
            let i = self.m.cps.len() - 1;
            if self.is_completion_point(i) {
                self.public_completion(i);
            } else if i == 0 {
                if !self.idle_at_root()? {
                    return Ok(false);
                }
            } else {
                self.maybe_convert(i);
                self.leave(i);
            }
        }
    }

    fn is_completion_point(&self, i: usize) -> bool {
        let node = &self.m.cps[i].node;
        match self.m.deps.last() {
            Some(d) if d.age > node.age => d.leader.id == node.id,
            _ => self.m.gens.last().is_some_and(|g| g.age >= node.age),
        }
    }

    /// Under local scheduling the first worker to exhaust a shared generator
    /// that is not a leader keeps a consumer for the generator's caller.
    fn maybe_convert(&mut self, i: usize) {
        if self.m.shared.config.scheduling != Scheduling::Local || !matches!(self.m.cps[i].kind, CpKind::Generator(_)) {
            return;
        }
        let f = self.m.cps[i].public.clone().expect("shared node");
        let mut inner = f.lock();
        if inner.converted {
            return;
        }
        inner.converted = true;
        drop(inner);
        self.m.suspend_generator(i);
    }

    fn is_under(n: &OrFrame, x: &OrFrame) -> bool {
        x.node.id != n.node.id && n.node.is_ancestor_of(&x.node)
    }

    /// Nodes from the worker's list and holds that lie below `n`.
    fn own_nodes_under(&self, n: &OrFrame) -> Vec<Arc<OrFrame>> {
        self.list.iter().chain(&self.held).filter(|x| Self::is_under(n, x)).cloned().collect()
    }

    /// Removes and returns a suspended SCC with unconsumed answers reachable
    /// from `inner` (the locked node) or `extra`, looking through the nodes
    /// each record holds.
    fn claim_unconsumed(inner: &mut OrInner, extra: &[Arc<OrFrame>]) -> Option<SuspendedScc> {
        if let Some(k) = inner.suspended.iter().position(|r| r.has_unconsumed()) {
            return Some(inner.suspended.swap_remove(k));
        }
        let mut seen = HashSet::new();
        let mut queue: Vec<Arc<OrFrame>> = extra.to_vec();
        queue.extend(inner.suspended.iter().flat_map(|r| r.held.iter().cloned()));
        while let Some(h) = queue.pop() {
            if !seen.insert(h.node.id) {
                continue;
            }
            let mut g = h.lock();
            if let Some(k) = g.suspended.iter().position(|r| r.has_unconsumed()) {
                return Some(g.suspended.swap_remove(k));
            }
            queue.extend(g.suspended.iter().flat_map(|r| r.held.iter().cloned()));
        }
        None
    }

    /// Takes every suspended SCC reachable from `inner` and `extra`; the
    /// nodes visited are left empty.
    fn drain_all(inner: &mut OrInner, extra: &[Arc<OrFrame>]) -> Vec<SuspendedScc> {
        let mut recs = std::mem::take(&mut inner.suspended);
        let mut seen = HashSet::new();
        let mut queue: Vec<Arc<OrFrame>> = extra.to_vec();
        let mut k = 0;
        loop {
            while k < recs.len() {
                queue.extend(recs[k].held.iter().cloned());
                k += 1;
            }
            let Some(h) = queue.pop() else { break };
            if !seen.insert(h.node.id) {
                continue;
            }
            let mut g = h.lock();
            g.members = 0;
            recs.append(&mut g.suspended);
        }
        recs
    }

    fn complete_records(&mut self, recs: Vec<SuspendedScc>) {
        for r in recs {
            for g in r.gens {
                if g.frame.try_complete() {
                    self.m.stats.completions += 1;
                }
            }
        }
    }

    /// Sets the worker's own SCC above node `i` aside.
    fn suspend_own(&mut self, i: usize) -> Option<SuspendedScc> {
        let node = self.m.cps[i].node.clone();
        let age = node.age;
        let f = self.m.cps[i].public.clone().expect("shared node");
        let gk = self.m.gens.partition_point(|g| g.age < age);
        let dk = self.m.deps.partition_point(|d| d.age <= age);
        let (held, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.held).into_iter().partition(|h| Self::is_under(&f, h));
        self.held = keep;
        if gk == self.m.gens.len() && dk == self.m.deps.len() && held.is_empty() {
            return None;
        }
        self.m.restore(i);
        let rec = SuspendedScc {
            leader: node,
            cps: self.m.cps[..=i].to_vec(),
            store: self.m.store.clone(),
            gens: self.m.gens.split_off(gk),
            deps: self.m.deps.split_off(dk),
            held,
            age: self.m.age,
        };
        self.m.freeze = self.m.deps.iter().map(|d| d.heap_mark).max().unwrap_or(0);
        self.m.stats.scc_suspends += 1;
        Some(rec)
    }

    /// Continues a suspended SCC whose path passes through node `i`.
    fn install_record(&mut self, r: SuspendedScc, i: usize) {
        debug_assert_eq!(r.cps[i].node.id, self.m.cps[i].node.id);
        for cp in &r.cps[i + 1..] {
            cp.public.as_ref().expect("suspended path is shared").lock().members += 1;
        }
        self.m.cps = r.cps;
        self.m.store = r.store;
        self.m.gens.extend(r.gens);
        self.m.deps.extend(r.deps);
        self.held.extend(r.held);
        self.m.age = self.m.age.max(r.age);
        self.m.freeze = self.m.deps.iter().map(|d| d.heap_mark).max().unwrap_or(0);
        self.m.goals = None;
        self.m.stats.scc_resumes += 1;
    }

    /// Completion check at shared leader `i`.
    fn public_completion(&mut self, i: usize) {
        let age = self.m.cps[i].node.age;
        let pick = self.m.deps.iter().rev().take_while(|d| d.age > age).find(|d| d.has_unconsumed()).cloned();
        if let Some(d) = pick {
            self.m.resume_consumer(i, d);
            return;
        }
        let f = self.m.cps[i].public.clone().expect("shared node");
        let extra = self.own_nodes_under(&f);
        let mut inner = f.lock();
        if let Some(r) = Self::claim_unconsumed(&mut inner, &extra) {
            if let Some(own) = self.suspend_own(i) {
                inner.suspended.push(own);
            }
            drop(inner);
            self.install_record(r, i);
            return;
        }
        if inner.members == 1 {
            let recs = Self::drain_all(&mut inner, &extra);
            self.list.retain(|x| !Self::is_under(&f, x));
            self.held.retain(|x| !Self::is_under(&f, x));
            self.complete_records(recs);
            self.m.complete_scc(age);
            if self.m.shared.config.scheduling == Scheduling::Local {
                if let CpKind::Generator(g) = &self.m.cps[i].kind {
                    if !inner.converted {
                        inner.converted = true;
                        let g = g.clone();
                        inner.alt = Alt::Answers { frame: g.frame.clone(), vars: g.vars.clone(), cursor: START };
                        let cp = &mut self.m.cps[i];
                        cp.kind = CpKind::Loader;
                        cp.goals = g.cont.clone();
                        return;
                    }
                }
            }
            drop(inner);
            if i > 0 {
                self.leave(i);
            }
            return;
        }
        if let Some(own) = self.suspend_own(i) {
            inner.suspended.push(own);
        }
        drop(inner);
        if i > 0 {
            self.leave(i);
        }
    }

    /// Backtracks out of exhausted shared node `i`.
    fn leave(&mut self, i: usize) {
        let f = self.m.cps[i].public.clone().expect("shared node");
        let age = f.node.age;
        let gen = generator_frame(&self.m.cps[i]);
        if self.m.deps.last().is_some_and(|d| d.leader.age >= age) {
            self.m.stats.leader_clamp_violations += 1;
        }
        self.m.cps.pop();
        let frozen = self.m.deps.last().is_some_and(|d| d.age > age) || self.m.gens.last().is_some_and(|g| g.age >= age);
        if frozen {
            self.held.push(f);
            return;
        }
        let extra: Vec<_> = self.list.iter().filter(|x| Self::is_under(&f, x)).cloned().collect();
        self.list.retain(|x| !Self::is_under(&f, x));
        let mut inner = f.lock();
        inner.members -= 1;
        if inner.members > 0 {
            for x in extra {
                let mut g = x.lock();
                inner.suspended.append(&mut g.suspended);
            }
            return;
        }
        if Self::claim_peek(&mut inner, &extra) {
            for x in extra {
                let mut g = x.lock();
                inner.suspended.append(&mut g.suspended);
            }
            drop(inner);
            self.list.push(f);
            return;
        }
        let recs = Self::drain_all(&mut inner, &extra);
        drop(inner);
        self.complete_records(recs);
        if let Some(fr) = gen {
            if fr.try_complete() {
                self.m.stats.completions += 1;
            }
        }
    }

    /// True if some reachable suspended SCC has unconsumed answers.
    fn claim_peek(inner: &mut OrInner, extra: &[Arc<OrFrame>]) -> bool {
        match Self::claim_unconsumed(inner, extra) {
            Some(r) => {
                inner.suspended.push(r);
                true
            }
            None => false,
        }
    }

    /// At the root with nothing to do: hand over collected SCCs, resume one
    /// if it has answers, detect global termination, or ask for work.
    fn idle_at_root(&mut self) -> Result<bool, EngineError> {
        let pool = self.pool.clone();
        let mut spins = 0u32;
        loop {
            if pool.shared.abort.load(Ordering::Relaxed) {
                return Err(EngineError::Aborted);
            }
            if pool.done.load(Ordering::Acquire) {
                return Ok(false);
            }
            {
                let mut inner = pool.root.lock();
                for x in std::mem::take(&mut self.list) {
                    let mut g = x.lock();
                    inner.suspended.append(&mut g.suspended);
                }
                if !self.idle {
                    self.idle = true;
                    inner.members -= 1;
                    self.refuse_pending();
                }
                if let Some(r) = Self::claim_unconsumed(&mut inner, &[]) {
                    inner.members += 1;
                    self.idle = false;
                    pool.slots[self.id].busy.store(true, Ordering::Relaxed);
                    drop(inner);
                    self.install_record(r, 0);
                    return Ok(true);
                }
                if inner.members == 0 {
                    let recs = Self::drain_all(&mut inner, &[]);
                    drop(inner);
                    self.complete_records(recs);
                    pool.done.store(true, Ordering::Release);
                    return Ok(false);
                }
            }
            if self.request_work() {
                return Ok(true);
            }
            spins += 1;
            if spins < 64 {
                std::thread::yield_now();
            } else {
                std::thread::sleep(Duration::from_micros(50));
            }
        }
    }
}
