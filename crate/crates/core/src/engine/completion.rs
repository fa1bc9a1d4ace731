use std::sync::Arc;

use super::choice::{Alt, ChoicePoint, CpKind, DepFrame};
use super::machine::Machine;
use super::{EngineError, Scheduling};
use crate::table::START;
use crate::tree::BranchNode;

/// Widens the leader hypothesis `start` over the dependency chain: the first
/// dependency younger than the hypothesis whose leader is older moves it.
pub fn leader_scan(deps: &[Arc<DepFrame>], start: Arc<BranchNode>) -> Arc<BranchNode> {
    let mut hyp = start;
    for d in deps.iter().rev() {
        if d.age <= hyp.age {
            break;
        }
        if d.leader.age < hyp.age {
            hyp = d.leader.clone();
            break;
        }
    }
    hyp
}

impl Machine {
    /// Leader for a new consumer whose branch tip is `tip`.
    pub(super) fn compute_leader(&self, tip: &Arc<BranchNode>, gen: &Arc<BranchNode>) -> Arc<BranchNode> {
        let hyp = leader_scan(&self.deps, BranchNode::common_ancestor(tip, gen));
        self.clamp(hyp.age, self.cps.len())
    }

    /// Youngest node among `cps[..upto]` no younger than `age`. Completion is
    /// only checked at nodes on the stack.
    pub(crate) fn clamp(&self, age: u64, upto: usize) -> Arc<BranchNode> {
        let k = self.cps[..upto].partition_point(|c| c.node.age <= age);
        self.cps[k.max(1) - 1].node.clone()
    }

    /// Choice point `i` (the top) has no alternatives left.
    pub(super) fn on_exhausted(&mut self, i: usize) -> Result<(), EngineError> {
        let node = self.cps[i].node.clone();
        if let Some(d) = self.deps.last() {
            if d.age > node.age {
                if d.leader.id == node.id {
                    return self.complete_at(i);
                }
                if self.shared.config.scheduling == Scheduling::Local {
                    if let CpKind::Generator(_) = self.cps[i].kind {
                        self.suspend_generator(i);
                    }
                }
                self.cps.pop();
                return Ok(());
            }
        }
        self.complete_scc(node.age);
        self.finish_node(i);
        Ok(())
    }

    /// Fixpoint check at leader `i`: resume the youngest consumer with
    /// unconsumed answers, or complete everything younger.
    fn complete_at(&mut self, i: usize) -> Result<(), EngineError> {
        let age = self.cps[i].node.age;
        let pick = self
            .deps
            .iter()
            .rev()
            .take_while(|d| d.age > age)
            .find(|d| d.has_unconsumed())
            .cloned();
        match pick {
            Some(d) => self.resume_consumer(i, d),
            None => {
                self.complete_scc(age);
                self.finish_node(i);
            }
        }
        Ok(())
    }

    /// Rebuilds consumer `d`'s bindings above leader `i` and pushes a fresh
    /// choice point that feeds it answers.
    pub(crate) fn resume_consumer(&mut self, i: usize, d: Arc<DepFrame>) {
        self.restore(i);
        let from = self.cps[i].trail_top;
        self.store.replay(&d.trail[from..]);
        let age = self.next_age();
        self.stats.consumer_resumptions += 1;
        self.cps.push(ChoicePoint {
            node: BranchNode::sibling_of(&d.consumer, age),
            goals: d.goals.clone(),
            kind: CpKind::Consumer { dep: d, resumed: true },
            call: 0,
            heap_top: self.store.len(),
            trail_top: self.store.trail().len(),
            alt: Alt::Dep,
            public: None,
        });
    }

    /// Marks complete every generator of age `age` or younger and drops the
    /// dependencies above it.
    pub(crate) fn complete_scc(&mut self, age: u64) {
        while let Some(g) = self.gens.last() {
            if g.age < age {
                break;
            }
            if g.frame.try_complete() {
                self.stats.completions += 1;
            }
            self.gens.pop();
        }
        let k = self.deps.partition_point(|d| d.age <= age);
        self.deps.truncate(k);
        self.freeze = self.deps.iter().map(|d| d.heap_mark).max().unwrap_or(0);
    }

    /// Leaves node `i` once its subgoals are done. Under local scheduling a
    /// generator turns into an iterator over its now complete table.
    fn finish_node(&mut self, i: usize) {
        if self.shared.config.scheduling == Scheduling::Local {
            if let CpKind::Generator(g) = &self.cps[i].kind {
                let g = g.clone();
                let cp = &mut self.cps[i];
                cp.goals = g.cont.clone();
                cp.alt = Alt::Answers { frame: g.frame.clone(), vars: g.vars.clone(), cursor: START };
                cp.kind = CpKind::Loader;
                return;
            }
        }
        self.cps.pop();
    }

    /// Under local scheduling a generator that is not a leader hands its
    /// answers to its caller through a consumer of its own table.
    pub(crate) fn suspend_generator(&mut self, i: usize) {
        let CpKind::Generator(g) = &self.cps[i].kind else { return };
        let g = g.clone();
        self.restore(i);
        let hyp = leader_scan(&self.deps, g.node.clone());
        let leader = self.clamp(hyp.age, i);
        let age = self.next_age();
        let heap_mark = self.store.len();
        let dep = DepFrame::new(
            g.frame.clone(),
            self.cps[i].node.clone(),
            age,
            leader,
            g.cont.clone(),
            g.vars.clone(),
            self.store.trail_snapshot(0).into(),
            heap_mark,
        );
        self.deps.push(Arc::new(dep));
        self.freeze = self.freeze.max(heap_mark);
    }
}
