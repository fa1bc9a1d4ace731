use std::sync::Arc;

use super::choice::GenCall;

#[derive(Clone, Debug)]
pub enum Goal {
    /// Call the term stored at this heap address.
    Call(usize),
    /// Prune choice points from `barrier` up. `age` is the node age when the
    /// clause was entered; tabled work younger than it lies in the cut scope.
    Cut { barrier: usize, age: u64 },
    NewAnswer(Arc<GenCall>),
    Solution,
}

#[derive(Debug)]
pub struct GoalNode {
    pub goal: Goal,
    pub next: Goals,
    /// Lowest cut barrier anywhere in this list.
    pub min_cut: usize,
}

/// Persistent goal list; continuations are shared, never copied.
pub type Goals = Option<Arc<GoalNode>>;

pub fn push(goal: Goal, next: Goals) -> Goals {
    let below = min_cut(&next);
    let own = match goal {
        Goal::Cut { barrier, .. } => barrier,
        Goal::NewAnswer(ref g) => min_cut(&g.cont),
        _ => usize::MAX,
    };
    Some(Arc::new(GoalNode { goal, next, min_cut: own.min(below) }))
}

pub fn min_cut(g: &Goals) -> usize {
    g.as_ref().map_or(usize::MAX, |n| n.min_cut)
}

impl Drop for GoalNode {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(n) = next {
            match Arc::try_unwrap(n) {
                Ok(mut n) => next = n.next.take(),
                Err(_) => break,
            }
        }
    }
}
