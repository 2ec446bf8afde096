use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::sketch::SketchError;

/// Misra-Gries frequent-items summary with `capacity` counters.
///
/// Reported counts are lower bounds: `true - n / (capacity + 1) <= count <= true`.
/// Every value occurring more than `n / (capacity + 1)` times is tracked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisraGries<K: Ord> {
    capacity: usize,
    counters: BTreeMap<K, u64>,
    count: u64,
    /// Total amount subtracted from each counter; bounds the undercount.
    offset: u64,
}

impl<K: Ord + Clone> MisraGries<K> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self { capacity, counters: BTreeMap::new(), count: 0, offset: 0 }
    }

    pub fn from_parts(
        capacity: usize,
        counters: Vec<(K, u64)>,
        count: u64,
        offset: u64,
    ) -> Result<Self, SketchError> {
        if capacity == 0 || counters.len() > capacity || counters.iter().any(|(_, c)| *c == 0) {
            return Err(SketchError::Corrupt("frequent-items shape"));
        }
        let tracked: u64 = counters.iter().map(|(_, c)| c).sum();
        if tracked > count {
            return Err(SketchError::Corrupt("frequent-items counts"));
        }
        Ok(Self { capacity, counters: counters.into_iter().collect(), count, offset })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Upper bound on how far any reported count is below the truth.
    pub fn error_bound(&self) -> u64 {
        self.offset
    }

    pub fn update(&mut self, key: K) {
        self.count += 1;
        if let Some(c) = self.counters.get_mut(&key) {
            *c += 1;
        } else if self.counters.len() < self.capacity {
            self.counters.insert(key, 1);
        } else {
            // The arriving item and one unit of every counter cancel out.
            self.offset += 1;
            self.counters.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }

    /// Lower-bound count for `key` (zero if untracked).
    pub fn estimate(&self, key: &K) -> u64 {
        self.counters.get(key).copied().unwrap_or(0)
    }

    /// Tracked values by descending count, ties by key.
    pub fn items(&self) -> Vec<(K, u64)> {
        let mut v: Vec<(K, u64)> = self.counters.iter().map(|(k, c)| (k.clone(), *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Tracked values in key order.
    pub fn counters(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counters.iter().map(|(k, c)| (k, *c))
    }

    pub fn is_tracked(&self, key: &K) -> bool {
        self.counters.contains_key(key)
    }

    /// Merges another summary; the combined undercount stays within
    /// `(n1 + n2) / (capacity + 1)`.
    pub fn merge(&mut self, other: &MisraGries<K>) -> Result<(), SketchError> {
        if self.capacity != other.capacity {
            return Err(SketchError::Incomparable);
        }
        for (k, c) in &other.counters {
            *self.counters.entry(k.clone()).or_insert(0) += c;
        }
        self.count += other.count;
        self.offset += other.offset;
        if self.counters.len() > self.capacity {
            let mut counts: Vec<u64> = self.counters.values().copied().collect();
            counts.sort_unstable_by(|a, b| b.cmp(a));
            let cut = counts[self.capacity];
            self.offset += cut;
            self.counters.retain(|_, c| {
                *c = c.saturating_sub(cut);
                *c > 0
            });
        }
        Ok(())
    }
}
