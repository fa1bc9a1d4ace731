use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{sync_channel, RecvTimeoutError, SyncSender};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;

use super::worker::Worker;
use super::OrFrame;
use crate::engine::{goals, Alt, ChoicePoint, DepFrame, GenEntry};
use crate::terms::Store;

pub(crate) type Reply = Option<Box<Snapshot>>;

/// Per-worker registry entry used to find and contact donors.
pub(crate) struct Slot {
    pub busy: AtomicBool,
    /// Raised by a requester; the donor polls it between goals.
    pub flag: Arc<AtomicBool>,
    pub mailbox: Mutex<Option<SyncSender<Reply>>>,
}

impl Slot {
    pub fn new(busy: bool) -> Slot {
        Slot { busy: AtomicBool::new(busy), flag: Arc::new(AtomicBool::new(false)), mailbox: Mutex::new(None) }
    }
}

/// A copy of a donor's stacks up to its youngest shared node.
pub(crate) struct Snapshot {
    pub cps: Vec<ChoicePoint>,
    pub store: Store,
    pub gens: Vec<GenEntry>,
    pub deps: Vec<Arc<DepFrame>>,
    pub held: Vec<Arc<OrFrame>>,
    pub age: u64,
}

impl Worker {
    /// Answers a pending work request at a safe point.
    pub(crate) fn serve_share(&mut self) {
        let slot = &self.pool.slots[self.id];
        let req = {
            let mut mb = slot.mailbox.lock();
            slot.flag.store(false, Ordering::Relaxed);
            mb.take()
        };
        let Some(tx) = req else { return };
        self.jitter();
        let snap = self.publish();
        let _ = tx.send(snap);
    }

    /// Refuses whatever request is pending; used when going idle.
    pub(crate) fn refuse_pending(&self) {
        let slot = &self.pool.slots[self.id];
        let mut mb = slot.mailbox.lock();
        slot.busy.store(false, Ordering::Relaxed);
        slot.flag.store(false, Ordering::Relaxed);
        if let Some(tx) = mb.take() {
            let _ = tx.send(None);
        }
    }

    /// Highest stack index that may become shared. Nodes inside the scope of
    /// a pending cut stay private, so cuts never reach shared nodes.
    fn share_fence(&self) -> usize {
        let prog = &self.m.shared.program;
        let mut fence = goals::min_cut(&self.m.goals).min(self.m.cps.len());
        for (i, cp) in self.m.cps.iter().enumerate().rev() {
            if cp.public.is_some() {
                break;
            }
            let cuts_here = match (&cp.alt, &cp.kind) {
                (Alt::Clauses { pred, .. }, _) => prog.predicates()[*pred].has_cut,
                _ => false,
            };
            let f = if cuts_here { i } else { goals::min_cut(&cp.goals) };
            fence = fence.min(f);
        }
        fence
    }

    /// Makes the private nodes below the fence public and copies the stacks.
    pub(crate) fn publish(&mut self) -> Reply {
        let first_private = self.m.cps.iter().position(|c| c.public.is_none()).unwrap_or(self.m.cps.len());
        let top = self.share_fence();
        if top <= first_private || !self.m.cps[first_private..top].iter().any(|c| c.has_alternatives()) {
            self.m.stats.share_refusals += 1;
            return None;
        }
        let mut parent = self.m.cps[first_private - 1].public.clone();
        for cp in &mut self.m.cps[first_private..top] {
            let alt = std::mem::replace(&mut cp.alt, Alt::Exhausted);
            let f = OrFrame::new(cp.node.clone(), parent.take(), alt, 1);
            cp.public = Some(f.clone());
            parent = Some(f);
        }
        // The requester joins every copied node now, while the donor still
        // holds them, so nothing completes with the snapshot in flight.
        self.pool.root.lock().members += 1;
        for cp in &self.m.cps[1..top] {
            cp.public.as_ref().expect("copied nodes are shared").lock().members += 1;
        }
        for h in &self.held {
            h.lock().members += 1;
        }
        self.m.stats.shares += 1;
        // SCCs led by private nodes stay with the donor, which completes
        // them on its own.
        let top_age = self.m.cps[top - 1].node.age;
        Some(Box::new(Snapshot {
            cps: self.m.cps[..top].to_vec(),
            store: self.m.store.clone(),
            gens: self.m.gens.iter().filter(|g| g.age <= top_age).cloned().collect(),
            deps: self.m.deps.iter().filter(|d| d.leader.age <= top_age).cloned().collect(),
            held: self.held.clone(),
            age: self.m.age,
        }))
    }

    /// Installs a donor's snapshot; the worker sits idle at the root.
    pub(crate) fn install_snapshot(&mut self, s: Snapshot) {
        self.m.cps = s.cps;
        self.m.store = s.store;
        self.m.gens = s.gens;
        self.m.deps = s.deps;
        self.held = s.held;
        self.m.age = self.m.age.max(s.age);
        self.m.freeze = self.m.deps.iter().map(|d| d.heap_mark).max().unwrap_or(0);
        self.m.goals = None;
    }

    /// Asks busy workers for work in random order. True once a snapshot was
    /// installed.
    pub(crate) fn request_work(&mut self) -> bool {
        let pool = self.pool.clone();
        let mut order: Vec<usize> = (0..pool.slots.len()).filter(|&d| d != self.id).collect();
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut self.rng);
        for d in order {
            let slot = &pool.slots[d];
            if !slot.busy.load(Ordering::Relaxed) {
                continue;
            }
            let (tx, rx) = sync_channel(1);
            {
                let mut mb = slot.mailbox.lock();
                if mb.is_some() || !slot.busy.load(Ordering::Relaxed) {
                    continue;
                }
                *mb = Some(tx);
                slot.flag.store(true, Ordering::Relaxed);
            }
            let reply = loop {
                match rx.recv_timeout(Duration::from_millis(1)) {
                    Ok(r) => break r,
                    Err(RecvTimeoutError::Disconnected) => break None,
                    Err(RecvTimeoutError::Timeout) => {
                        if pool.shared.abort.load(Ordering::Relaxed) {
                            let mut mb = slot.mailbox.lock();
                            if mb.take().is_some() {
                                break None;
                            }
                        }
                    }
                }
            };
            if let Some(s) = reply {
                self.idle = false;
                pool.slots[self.id].busy.store(true, Ordering::Relaxed);
                self.install_snapshot(*s);
                return true;
            }
        }
        false
    }
}
