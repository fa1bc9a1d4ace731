use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};

use parking_lot::{Mutex, RwLock};

use super::locks::{lock_counted, GlobalLocks, LockScheme};
use crate::terms::Token;

pub const NIL: u32 = u32::MAX;
const ROOT: u32 = 0;

static NEXT_TRIE: AtomicU64 = AtomicU64::new(1);

pub struct Node {
    pub token: Token,
    pub parent: u32,
    first_child: AtomicU32,
    /// Older sibling; fixed when the node is linked.
    sibling: u32,
    children: AtomicU32,
    hash: RwLock<Option<HashMap<Token, u32>>>,
    lock: Mutex<()>,
    /// Subgoal tries: frame index at leaves. Answer tries: next leaf in
    /// insertion order.
    pub value: AtomicU32,
}

impl Node {
    fn new(token: Token, parent: u32, sibling: u32, value: u32) -> Self {
        Node {
            token,
            parent,
            first_child: AtomicU32::new(NIL),
            sibling,
            children: AtomicU32::new(0),
            hash: RwLock::new(None),
            lock: Mutex::new(()),
            value: AtomicU32::new(value),
        }
    }
}

/// Settings shared by every trie of a run.
pub struct TrieCtx<'a> {
    pub scheme: LockScheme,
    pub threshold: u32,
    pub locks: &'a GlobalLocks,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Inserted {
    pub leaf: u32,
    pub created: bool,
    /// Some lock on the way was contended.
    pub contended: bool,
}

/// A token trie with nodes in an append-only arena.
pub struct Trie {
    id: u64,
    nodes: boxcar::Vec<Node>,
    whole: Mutex<()>,
    root_claimed: AtomicBool,
    pub contention: AtomicU64,
    pub contention_repeated: AtomicU64,
}

impl Default for Trie {
    fn default() -> Self {
        Self::new()
    }
}

impl Trie {
    pub fn new() -> Self {
        let nodes = boxcar::Vec::new();
        nodes.push(Node::new(Token::Var(u32::MAX), NIL, NIL, NIL));
        Trie {
            id: NEXT_TRIE.fetch_add(1, Ordering::Relaxed),
            nodes,
            whole: Mutex::new(()),
            root_claimed: AtomicBool::new(false),
            contention: AtomicU64::new(0),
            contention_repeated: AtomicU64::new(0),
        }
    }

    pub fn node(&self, i: u32) -> &Node {
        &self.nodes[i as usize]
    }

    /// Number of nodes, root included.
    pub fn len(&self) -> usize {
        self.nodes.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 1
    }

    pub fn find_child(&self, parent: u32, t: Token, threshold: u32) -> Option<u32> {
        let p = self.node(parent);
        if p.children.load(Ordering::Acquire) > threshold {
            if let Some(h) = p.hash.read().as_ref() {
                return h.get(&t).copied();
            }
        }
        let mut c = p.first_child.load(Ordering::Acquire);
        while c != NIL {
            let n = self.node(c);
            if n.token == t {
                return Some(c);
            }
            c = n.sibling;
        }
        None
    }

    /// Children of `parent`, youngest first.
    pub fn children(&self, parent: u32) -> impl Iterator<Item = u32> + '_ {
        let mut c = self.node(parent).first_child.load(Ordering::Acquire);
        std::iter::from_fn(move || {
            if c == NIL {
                return None;
            }
            let r = c;
            c = self.node(c).sibling;
            Some(r)
        })
    }

    pub fn has_hash(&self, parent: u32) -> bool {
        self.node(parent).hash.read().is_some()
    }

    /// Links `node` under `parent`. The caller holds whatever lock
    /// serialises writers of `parent`.
    fn link(&self, parent: u32, mut node: Node, threshold: u32) -> u32 {
        let p = self.node(parent);
        node.sibling = p.first_child.load(Ordering::Acquire);
        let token = node.token;
        let idx = self.nodes.push(node) as u32;
        p.first_child.store(idx, Ordering::Release);
        let n = p.children.load(Ordering::Relaxed) + 1;
        if n > threshold {
            let mut h = p.hash.write();
            match h.as_mut() {
                Some(m) => {
                    m.insert(token, idx);
                }
                None => *h = Some(self.children(parent).map(|c| (self.node(c).token, c)).collect()),
            }
        }
        p.children.store(n, Ordering::Release);
        idx
    }

    /// Finds or creates the path `tokens`. `leaf_value` runs only when the
    /// leaf is created, before it becomes visible.
    pub fn insert(&self, tokens: &[Token], ctx: &TrieCtx<'_>, leaf_value: impl FnOnce() -> u32) -> Inserted {
        if tokens.is_empty() {
            return self.claim_root(leaf_value);
        }
        let th = ctx.threshold;
        let mut value = Some(leaf_value);
        let mut cur = ROOT;
        let mut created = false;
        let mut contended = false;
        let last = tokens.len() - 1;
        fn make<F: FnOnce() -> u32>(leaf: bool, t: Token, parent: u32, value: &mut Option<F>) -> Node {
            let v = if leaf { value.take().map_or(NIL, |f| f()) } else { NIL };
            Node::new(t, parent, NIL, v)
        }
        match ctx.scheme {
            LockScheme::Tlel => {
                let (_g, c) = lock_counted(&self.whole, &self.contention);
                contended |= c;
                for (i, &t) in tokens.iter().enumerate() {
                    cur = match self.find_child(cur, t, th) {
                        Some(n) => n,
                        None => {
                            created = true;
                            let n = make(i == last, t, cur, &mut value);
                            self.link(cur, n, th)
                        }
                    };
                }
            }
            LockScheme::Tlnl => {
                for (i, &t) in tokens.iter().enumerate() {
                    let (_g, c) = lock_counted(&self.node(cur).lock, &self.contention);
                    contended |= c;
                    cur = match self.find_child(cur, t, th) {
                        Some(n) => n,
                        None => {
                            created = true;
                            let n = make(i == last, t, cur, &mut value);
                            self.link(cur, n, th)
                        }
                    };
                }
            }
            LockScheme::Tlwl | LockScheme::TlwlAbc => {
                let abc = ctx.scheme == LockScheme::TlwlAbc;
                for (i, &t) in tokens.iter().enumerate() {
                    if let Some(n) = self.find_child(cur, t, th) {
                        cur = n;
                        continue;
                    }
                    let pre = abc.then(|| Node::new(t, cur, NIL, NIL));
                    let (_g, c) = lock_counted(ctx.locks.slot(self.id, cur), &self.contention);
                    contended |= c;
                    cur = match self.find_child(cur, t, th) {
                        Some(n) => n,
                        None => {
                            created = true;
                            let n = match pre {
                                Some(mut n) => {
                                    if i == last {
                                        n.value = AtomicU32::new(value.take().map_or(NIL, |f| f()));
                                    }
                                    n
                                }
                                None => make(i == last, t, cur, &mut value),
                            };
                            self.link(cur, n, th)
                        }
                    };
                }
            }
        }
        // Paths are prefix-free, so creating any node means the leaf is new.
        if contended && !created {
            self.contention_repeated.fetch_add(1, Ordering::Relaxed);
        }
        Inserted { leaf: cur, created, contended }
    }

    fn claim_root(&self, leaf_value: impl FnOnce() -> u32) -> Inserted {
        let (_g, contended) = lock_counted(&self.node(ROOT).lock, &self.contention);
        let created = !self.root_claimed.load(Ordering::Acquire);
        if created {
            self.node(ROOT).value.store(leaf_value(), Ordering::Release);
            self.root_claimed.store(true, Ordering::Release);
        } else if contended {
            self.contention_repeated.fetch_add(1, Ordering::Relaxed);
        }
        Inserted { leaf: ROOT, created, contended }
    }

    /// Tokens on the path from the root to `leaf`.
    pub fn path(&self, leaf: u32, out: &mut Vec<Token>) {
        let start = out.len();
        let mut c = leaf;
        while c != ROOT {
            let n = self.node(c);
            out.push(n.token);
            c = n.parent;
        }
        out[start..].reverse();
    }

    /// Number of tokens on the path to `leaf`.
    pub fn depth(&self, leaf: u32) -> usize {
        let mut d = 0;
        let mut c = leaf;
        while c != ROOT {
            d += 1;
            c = self.node(c).parent;
        }
        d
    }
}
