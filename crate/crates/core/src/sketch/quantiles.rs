//! Deterministic mergeable quantile summary built from a stack of
//! compactors.
//!
//! Level `h` holds items of weight `2^h`. When a level reaches `capacity`
//! items it is sorted and equal neighbours are paired first: two copies of
//! `v` at weight `2^h` are exactly one copy at `2^(h + 1)`, so this step is
//! lossless. Only if more than half the level survives is the rest halved
//! by promoting every other item (alternating the starting offset between
//! compactions). A lossy compaction at level `h` moves any rank estimate by
//! at most `2^h` and empties the level, so it happens at most once per
//! `capacity` items entering the level, exactly as without the lossless
//! step. The sum of `2^h` over lossy compactions bounds the rank error; the
//! capacity is chosen so that this bound stays below `epsilon * n` for
//! streams up to the configured maximum length.

use alloc::vec;
use alloc::vec::Vec;

use crate::sketch::SketchError;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSketch {
    epsilon: f64,
    capacity: usize,
    levels: Vec<Vec<f64>>,
    /// Next compaction offset per level.
    parity: Vec<bool>,
    count: u64,
    min: f64,
    max: f64,
    /// Sum of `2^h` over every compaction performed.
    error: u64,
}

/// Smallest even capacity whose worst-case error stays within
/// `epsilon * n` for every `n <= max_count`.
pub fn capacity_for(epsilon: f64, max_count: u64) -> usize {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    let levels = |cap: usize| -> u32 {
        let mut l = 0;
        while (cap as u128) << l <= max_count as u128 {
            l += 1;
        }
        l
    };
    let even = |c: f64| {
        let c = libm::ceil(c) as usize;
        (c + (c & 1)).max(2)
    };
    let mut cap = even(1.0 / epsilon);
    while levels(cap) as f64 > epsilon * cap as f64 {
        cap = even(levels(cap) as f64 / epsilon).max(cap + 2);
    }
    cap
}

impl QuantileSketch {
    /// Sketch whose rank error is at most `epsilon * n` for streams of up
    /// to `max_count` values.
    pub fn new(epsilon: f64, max_count: u64) -> Self {
        Self::with_capacity(epsilon, capacity_for(epsilon, max_count.max(1)))
    }

    pub fn with_capacity(epsilon: f64, capacity: usize) -> Self {
        assert!(capacity >= 2 && capacity % 2 == 0);
        Self {
            epsilon,
            capacity,
            levels: vec![Vec::new()],
            parity: vec![false],
            count: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            error: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        epsilon: f64,
        capacity: usize,
        levels: Vec<Vec<f64>>,
        parity: Vec<bool>,
        count: u64,
        min: f64,
        max: f64,
        error: u64,
    ) -> Result<Self, SketchError> {
        let weight: u128 = levels
            .iter()
            .enumerate()
            .map(|(h, l)| (l.len() as u128) << h)
            .sum();
        if capacity < 2
            || capacity % 2 == 1
            || levels.is_empty()
            || levels.len() != parity.len()
            || weight != count as u128
        {
            return Err(SketchError::Corrupt("quantile sketch shape"));
        }
        Ok(Self { epsilon, capacity, levels, parity, count, min, max, error })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn parity(&self) -> &[bool] {
        &self.parity
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Worst-case absolute rank error accumulated so far.
    pub fn rank_error_bound(&self) -> u64 {
        self.error
    }

    pub fn retained(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.levels[0].push(v);
        if self.levels[0].len() >= self.capacity {
            self.compact_from(0);
        }
    }

    pub fn merge(&mut self, other: &QuantileSketch) -> Result<(), SketchError> {
        if self.capacity != other.capacity {
            return Err(SketchError::Incomparable);
        }
        if other.is_empty() {
            return Ok(());
        }
        while self.levels.len() < other.levels.len() {
            self.levels.push(Vec::new());
            self.parity.push(false);
        }
        for (mine, theirs) in self.levels.iter_mut().zip(&other.levels) {
            mine.extend_from_slice(theirs);
        }
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.error += other.error;
        self.compact_from(0);
        Ok(())
    }

    fn compact_from(&mut self, start: usize) {
        let mut h = start;
        while h < self.levels.len() {
            if self.levels[h].len() >= self.capacity {
                self.compact(h);
            }
            h += 1;
        }
    }

    fn compact(&mut self, h: usize) {
        let mut buf = core::mem::take(&mut self.levels[h]);
        buf.sort_unstable_by(f64::total_cmp);
        if h + 1 == self.levels.len() {
            self.levels.push(Vec::new());
            self.parity.push(false);
        }
        let (mut kept, mut pairs) = (Vec::with_capacity(buf.len()), Vec::new());
        let mut i = 0;
        while i < buf.len() {
            if i + 1 < buf.len() && buf[i].to_bits() == buf[i + 1].to_bits() {
                pairs.push(buf[i]);
                i += 2;
            } else {
                kept.push(buf[i]);
                i += 1;
            }
        }
        self.levels[h + 1].extend(pairs);
        if kept.len() <= self.capacity / 2 {
            self.levels[h] = kept;
            return;
        }
        let leftover = if kept.len() % 2 == 1 { kept.pop() } else { None };
        let offset = self.parity[h] as usize;
        self.parity[h] = !self.parity[h];
        let promoted = kept.iter().skip(offset).step_by(2).copied();
        self.levels[h + 1].extend(promoted);
        kept.clear();
        kept.extend(leftover);
        self.levels[h] = kept;
        self.error += 1u64 << h;
    }

    /// Sorted weighted view for answering several queries.
    pub fn view(&self) -> QuantileView {
        let mut items: Vec<(f64, u64)> = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(h, l)| l.iter().map(move |&v| (v, 1u64 << h)))
            .collect();
        items.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut cumulative = Vec::with_capacity(items.len());
        let mut run = 0u64;
        for (_, w) in &items {
            run += w;
            cumulative.push(run);
        }
        QuantileView {
            values: items.into_iter().map(|(v, _)| v).collect(),
            cumulative,
            count: self.count,
            min: self.min,
            max: self.max,
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64, SketchError> {
        if self.is_empty() {
            return Err(SketchError::Empty);
        }
        Ok(self.view().quantile(q))
    }

    /// Estimated number of values `<= v`.
    pub fn rank(&self, v: f64) -> Result<u64, SketchError> {
        if self.is_empty() {
            return Err(SketchError::Empty);
        }
        Ok(self.view().rank(v))
    }
}

#[derive(Debug, Clone)]
pub struct QuantileView {
    values: Vec<f64>,
    cumulative: Vec<u64>,
    count: u64,
    min: f64,
    max: f64,
}

impl QuantileView {
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Value whose rank is within the sketch's error of `q * n`. The
    /// extremes are exact.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.min;
        }
        if q >= 1.0 {
            return self.max;
        }
        let target = q * self.count as f64;
        let i = self.cumulative.partition_point(|&c| (c as f64) < target);
        self.values
            .get(i)
            .copied()
            .unwrap_or(self.max)
            .clamp(self.min, self.max)
    }

    /// Estimated number of values `<= v`.
    pub fn rank(&self, v: f64) -> u64 {
        let i = self.values.partition_point(|&x| x <= v);
        if i == 0 {
            0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// Estimated number of values `< v`.
    pub fn rank_exclusive(&self, v: f64) -> u64 {
        let i = self.values.partition_point(|&x| x < v);
        if i == 0 {
            0
        } else {
            self.cumulative[i - 1]
        }
    }
}
