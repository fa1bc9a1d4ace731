//! Search-tree nodes shared between workers.
//!
//! Every choice point owns a `BranchNode`. Nodes only point at their parent,
//! so a worker's branch is the parent chain from its youngest node.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub struct BranchNode {
    pub id: u64,
    /// Creation order along any branch: a parent is always older.
    pub age: u64,
    pub depth: u32,
    pub parent: Option<Arc<BranchNode>>,
}

impl BranchNode {
    pub fn root() -> Arc<BranchNode> {
        Arc::new(BranchNode { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), age: 0, depth: 0, parent: None })
    }

    pub fn child(parent: &Arc<BranchNode>, age: u64) -> Arc<BranchNode> {
        debug_assert!(age > parent.age);
        Arc::new(BranchNode {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            age,
            depth: parent.depth + 1,
            parent: Some(parent.clone()),
        })
    }

    /// A new node standing in for `orig` on the same branch position.
    pub fn sibling_of(orig: &Arc<BranchNode>, age: u64) -> Arc<BranchNode> {
        Arc::new(BranchNode {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            age,
            depth: orig.depth,
            parent: orig.parent.clone(),
        })
    }

    pub fn is_ancestor_of(self: &Arc<Self>, other: &Arc<BranchNode>) -> bool {
        let mut n = other;
        while n.depth > self.depth {
            n = n.parent.as_ref().expect("depth > 0 has a parent");
        }
        n.id == self.id
    }

    /// Youngest node that is an ancestor of (or equal to) both `a` and `b`.
    pub fn common_ancestor(a: &Arc<BranchNode>, b: &Arc<BranchNode>) -> Arc<BranchNode> {
        let (mut a, mut b) = (a, b);
        while a.depth > b.depth {
            a = a.parent.as_ref().unwrap();
        }
        while b.depth > a.depth {
            b = b.parent.as_ref().unwrap();
        }
        while a.id != b.id {
            a = a.parent.as_ref().expect("branches share a root");
            b = b.parent.as_ref().expect("branches share a root");
        }
        a.clone()
    }
}

impl Drop for BranchNode {
    fn drop(&mut self) {
        // Long parent chains would otherwise recurse once per node.
        let mut next = self.parent.take();
        while let Some(p) = next {
            match Arc::try_unwrap(p) {
                Ok(mut n) => next = n.parent.take(),
                Err(_) => break,
            }
        }
    }
}
