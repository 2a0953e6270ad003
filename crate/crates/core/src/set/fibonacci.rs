//! The Fibonacci word `0100101001...` (fixed point of `0 -> 01, 1 -> 0`)
//! and the two-sided word that is all ones at negative indices.

use std::sync::{Arc, OnceLock, RwLock};

static PREFIX: OnceLock<RwLock<Arc<Vec<u8>>>> = OnceLock::new();

fn cache() -> &'static RwLock<Arc<Vec<u8>>> {
    PREFIX.get_or_init(|| RwLock::new(Arc::new(vec![0, 1])))
}

/// The first `len` letters of the one-sided Fibonacci word.
///
/// The prefix is materialized lazily by morphism iteration and memoized in a
/// grow-only cache; concurrent readers share the published prefix.
pub fn fibonacci_word_prefix(len: usize) -> Arc<Vec<u8>> {
    {
        let guard = cache().read().expect("fibonacci cache");
        if guard.len() >= len {
            return Arc::clone(&guard);
        }
    }
    let mut guard = cache().write().expect("fibonacci cache");
    while guard.len() < len {
        // h(prefix) is a longer prefix of the fixed point.
        let mut next = Vec::with_capacity(guard.len() * 2);
        for &c in guard.iter() {
            if c == 0 {
                next.push(0);
                next.push(1);
            } else {
                next.push(0);
            }
        }
        *guard = Arc::new(next);
    }
    Arc::clone(&guard)
}

/// Letter `g_i` of the two-sided word: all ones for `i < 0`, the Fibonacci
/// word for `i >= 0`.
pub fn two_sided_digit(i: i64) -> u8 {
    if i < 0 {
        return 1;
    }
    let idx = i as usize;
    let prefix = fibonacci_word_prefix(idx + 1);
    prefix[idx]
}
