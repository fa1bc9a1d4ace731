use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::{Mutex, MutexGuard};

/// How concurrent trie writers synchronise.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Hash)]
pub enum LockScheme {
    /// One lock per trie, held for the whole path.
    Tlel,
    /// Lock the parent node at every step.
    Tlnl,
    /// Scan without locks, then lock a slot of a global array and rescan.
    #[default]
    Tlwl,
    /// As `Tlwl`, but the new node is built before the lock is taken.
    TlwlAbc,
}

impl LockScheme {
    pub const ALL: [LockScheme; 4] = [LockScheme::Tlel, LockScheme::Tlnl, LockScheme::Tlwl, LockScheme::TlwlAbc];
}

impl fmt::Display for LockScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LockScheme::Tlel => "tlel",
            LockScheme::Tlnl => "tlnl",
            LockScheme::Tlwl => "tlwl",
            LockScheme::TlwlAbc => "tlwl-abc",
        })
    }
}

impl FromStr for LockScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tlel" => Ok(LockScheme::Tlel),
            "tlnl" => Ok(LockScheme::Tlnl),
            "tlwl" => Ok(LockScheme::Tlwl),
            "tlwl-abc" | "tlwl_abc" => Ok(LockScheme::TlwlAbc),
            _ => Err(format!("unknown lock scheme {s:?}")),
        }
    }
}

pub const GLOBAL_LOCKS: usize = 512;

pub struct GlobalLocks {
    slots: Box<[Mutex<()>]>,
}

impl Default for GlobalLocks {
    fn default() -> Self {
        GlobalLocks { slots: (0..GLOBAL_LOCKS).map(|_| Mutex::new(())).collect() }
    }
}

impl GlobalLocks {
    pub fn slot(&self, trie: u64, node: u32) -> &Mutex<()> {
        let h = (trie.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ node as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        &self.slots[(h >> 32) as usize % GLOBAL_LOCKS]
    }
}

/// Takes `m`, counting a contention point when the first attempt fails.
pub fn lock_counted<'a, T>(m: &'a Mutex<T>, counter: &AtomicU64) -> (MutexGuard<'a, T>, bool) {
    match m.try_lock() {
        Some(g) => (g, false),
        None => {
            counter.fetch_add(1, Ordering::Relaxed);
            (m.lock(), true)
        }
    }
}
