//! Memo table used for per-(variety, prime) Weil models.
//!
//! With `std` the table sits behind a mutex and can be shared between
//! threads; without it, a `RefCell` is used. Values are computed outside the
//! lock, so two racing callers may both compute a value; both results are
//! identical because the computation is deterministic.

use alloc::collections::BTreeMap;

#[cfg(feature = "std")]
type Cell<T> = std::sync::Mutex<T>;
#[cfg(not(feature = "std"))]
type Cell<T> = core::cell::RefCell<T>;

pub(crate) struct Memo<K, V> {
    inner: Cell<BTreeMap<K, V>>,
}

impl<K: Ord + Clone, V: Clone> Memo<K, V> {
    pub(crate) fn new() -> Self {
        Memo { inner: Cell::new(BTreeMap::new()) }
    }

    pub(crate) fn get(&self, key: &K) -> Option<V> {
        #[cfg(feature = "std")]
        let map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        #[cfg(not(feature = "std"))]
        let map = self.inner.borrow();
        map.get(key).cloned()
    }

    pub(crate) fn insert(&self, key: K, value: V) {
        #[cfg(feature = "std")]
        let mut map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        #[cfg(not(feature = "std"))]
        let mut map = self.inner.borrow_mut();
        map.entry(key).or_insert(value);
    }

    pub(crate) fn len(&self) -> usize {
        #[cfg(feature = "std")]
        let map = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        #[cfg(not(feature = "std"))]
        let map = self.inner.borrow();
        map.len()
    }
}
