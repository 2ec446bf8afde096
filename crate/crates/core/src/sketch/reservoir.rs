//! Coordinated bottom-`r` sampling.
//!
//! Each row gets a pseudo-random priority derived from `(seed, row)`; a
//! reservoir keeps the `r` present cells with the smallest priorities. That
//! is a uniform sample without replacement, it merges by taking the bottom
//! `r` of the union, and two columns with the same presence pattern sample
//! exactly the same rows, so bivariate samples line up by row index.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

use crate::math::mix64;
use crate::sketch::SketchError;

#[inline]
pub fn row_priority(seed: u64, row: u64) -> u64 {
    mix64(mix64(seed ^ 0x5a5a_5a5a_5a5a_5a5a) ^ row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSample<T> {
    capacity: usize,
    seed: u64,
    seen: u64,
    /// Sampled `(row, value)` pairs in row order.
    entries: Vec<(u64, T)>,
}

impl<T: Clone> ReservoirSample<T> {
    pub fn from_parts(capacity: usize, seed: u64, seen: u64, mut entries: Vec<(u64, T)>) -> Result<Self, SketchError> {
        if entries.len() > capacity || entries.len() as u64 > seen {
            return Err(SketchError::Corrupt("reservoir shape"));
        }
        entries.sort_by_key(|e| e.0);
        Ok(Self { capacity, seed, seen, entries })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of present cells offered to the sampler.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn entries(&self) -> &[(u64, T)] {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&self, other: &ReservoirSample<T>) -> Result<Self, SketchError> {
        if self.capacity != other.capacity || self.seed != other.seed {
            return Err(SketchError::Incomparable);
        }
        let mut builder = ReservoirBuilder::new(self.capacity, self.seed);
        for (row, v) in self.entries.iter().chain(&other.entries) {
            builder.offer(*row, v.clone());
        }
        let mut merged = builder.finish();
        merged.seen = self.seen + other.seen;
        Ok(merged)
    }
}

struct Slot<T> {
    priority: u64,
    row: u64,
    value: T,
}

impl<T> PartialEq for Slot<T> {
    fn eq(&self, other: &Self) -> bool {
        (self.priority, self.row) == (other.priority, other.row)
    }
}

impl<T> Eq for Slot<T> {}

impl<T> PartialOrd for Slot<T> {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Slot<T> {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.priority, self.row).cmp(&(other.priority, other.row))
    }
}

/// Streaming builder; a max-heap on priority holds the current sample.
pub struct ReservoirBuilder<T> {
    capacity: usize,
    seed: u64,
    seen: u64,
    heap: BinaryHeap<Slot<T>>,
}

impl<T: Clone> ReservoirBuilder<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self { capacity, seed, seen: 0, heap: BinaryHeap::with_capacity(capacity + 1) }
    }

    pub fn offer(&mut self, row: u64, value: T) {
        self.seen += 1;
        if self.capacity == 0 {
            return;
        }
        let priority = row_priority(self.seed, row);
        if self.heap.len() < self.capacity {
            self.heap.push(Slot { priority, row, value });
        } else if let Some(top) = self.heap.peek() {
            if (priority, row) < (top.priority, top.row) {
                self.heap.pop();
                self.heap.push(Slot { priority, row, value });
            }
        }
    }

    pub fn finish(self) -> ReservoirSample<T> {
        let mut entries: Vec<(u64, T)> = self.heap.into_iter().map(|s| (s.row, s.value)).collect();
        entries.sort_by_key(|e| e.0);
        ReservoirSample { capacity: self.capacity, seed: self.seed, seen: self.seen, entries }
    }
}

/// Rows of `0..n` (filtered by `present`) that a reservoir with this
/// seed and capacity would keep, in row order.
pub fn sample_rows(seed: u64, capacity: usize, rows: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut b = ReservoirBuilder::new(capacity, seed);
    rows.for_each(|r| b.offer(r, ()));
    b.finish().entries.into_iter().map(|(r, _)| r).collect()
}
