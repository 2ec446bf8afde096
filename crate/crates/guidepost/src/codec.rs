//! Versioned binary container for sketch bundles.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "GPSK"  u16 version
//! config: k u64, seed u64, epsilon f64, s u64, r u64, cardinality_cap u64, max_rows u64 (0 = unset)
//! fingerprint: str
//! rows u64, column count u64
//! per column: tag u8, body length u64, body
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8. Reals are stored as raw
//! bits, so decoding then encoding reproduces the input exactly.

use guidepost_core::math::ExactSum;
use guidepost_core::sketch::{
    CategoricalSketch, ColumnSketch, DistinctSketch, HyperplaneSketch, IntegerFrequencies, MisraGries, MomentSketch,
    NumericSketch, QuantileSketch, ReservoirSample, SketchError,
};
use guidepost_core::{DatasetId, SketchBundle, SketchConfig};

pub const MAGIC: &[u8; 4] = b"GPSK";
pub const VERSION: u16 = 1;

const TAG_ABSENT: u8 = 0;
const TAG_NUMERIC: u8 = 1;
const TAG_CATEGORICAL: u8 = 2;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("not a sketch bundle (bad magic)")]
    BadMagic,
    #[error("unsupported bundle version {0}")]
    Version(u16),
    #[error("truncated bundle")]
    Truncated,
    #[error("corrupt bundle: {0}")]
    Corrupt(String),
}

impl From<SketchError> for FormatError {
    fn from(e: SketchError) -> Self {
        FormatError::Corrupt(e.to_string())
    }
}

pub fn encode_bundle(bundle: &SketchBundle) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u16(VERSION);
    let c = bundle.config();
    w.usize(c.k);
    w.u64(c.seed);
    w.f64(c.epsilon);
    w.usize(c.s);
    w.usize(c.r);
    w.usize(c.cardinality_cap);
    w.u64(c.max_rows.unwrap_or(0));
    w.str(bundle.fingerprint().as_str());
    w.u64(bundle.rows());
    w.usize(bundle.columns().len());
    for column in bundle.columns() {
        let mut body = Writer::default();
        let tag = match column {
            ColumnSketch::Absent => TAG_ABSENT,
            ColumnSketch::Numeric(s) => {
                body.numeric(s);
                TAG_NUMERIC
            }
            ColumnSketch::Categorical(s) => {
                body.categorical(s);
                TAG_CATEGORICAL
            }
        };
        w.u8(tag);
        w.usize(body.0.len());
        w.bytes(&body.0);
    }
    w.0
}

pub fn decode_bundle(bytes: &[u8]) -> Result<SketchBundle, FormatError> {
    let mut r = Reader(bytes);
    if r.take(4)? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let config = SketchConfig {
        k: r.usize()?,
        seed: r.u64()?,
        epsilon: r.f64()?,
        s: r.usize()?,
        r: r.usize()?,
        cardinality_cap: r.usize()?,
        max_rows: Some(r.u64()?).filter(|&m| m != 0),
    };
    let fingerprint = DatasetId::new(r.str()?);
    let rows = r.u64()?;
    let count = r.usize()?;
    let mut columns = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let tag = r.u8()?;
        let len = r.usize()?;
        let mut body = Reader(r.take(len)?);
        let column = match tag {
            TAG_ABSENT => ColumnSketch::Absent,
            TAG_NUMERIC => ColumnSketch::Numeric(Box::new(body.numeric()?)),
            TAG_CATEGORICAL => ColumnSketch::Categorical(Box::new(body.categorical()?)),
            t => return Err(FormatError::Corrupt(format!("unknown column tag {t}"))),
        };
        if !body.0.is_empty() {
            return Err(FormatError::Corrupt("column record has trailing bytes".into()));
        }
        columns.push(column);
    }
    if !r.0.is_empty() {
        return Err(FormatError::Corrupt("trailing bytes".into()));
    }
    Ok(SketchBundle::from_parts(config, fingerprint, rows, columns)?)
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    fn i64(&mut self, v: i64) {
        self.bytes(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    fn str(&mut self, s: &str) {
        self.u32(u32::try_from(s.len()).expect("label shorter than 4 GiB"));
        self.bytes(s.as_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }

    fn numeric(&mut self, s: &NumericSketch) {
        let m = &s.moments;
        self.u64(m.count());
        for sum in m.exact_sums() {
            self.f64s(sum.partials());
        }
        self.f64(m.min());
        self.f64(m.max());

        let q = &s.quantiles;
        self.f64(q.epsilon());
        self.usize(q.capacity());
        self.u64(q.count());
        self.f64(q.min());
        self.f64(q.max());
        self.u64(q.rank_error_bound());
        self.usize(q.levels().len());
        for (level, &parity) in q.levels().iter().zip(q.parity()) {
            self.u8(parity as u8);
            self.f64s(level);
        }

        self.reservoir(&s.reservoir, |w, &v| w.f64(v));

        match &s.hyperplane {
            None => self.u8(0),
            Some(h) => {
                self.u8(1);
                self.usize(h.k());
                self.u64(h.seed());
                self.f64(h.mean());
                h.projections().iter().for_each(|&p| self.f64(p));
                h.masses().iter().for_each(|&p| self.f64(p));
            }
        }

        match &s.frequencies {
            None => self.u8(0),
            Some(f) => {
                self.u8(1);
                self.misra_gries(&f.heavy, |w, &k| w.i64(k));
                self.distinct(&f.distinct);
            }
        }
    }

    fn categorical(&mut self, s: &CategoricalSketch) {
        self.u64(s.count);
        self.misra_gries(&s.heavy, |w, k| w.str(k));
        self.distinct(&s.distinct);
        self.reservoir(&s.reservoir, |w, v| w.str(v));
    }

    fn reservoir<T: Clone>(&mut self, s: &ReservoirSample<T>, mut put: impl FnMut(&mut Self, &T)) {
        self.usize(s.capacity());
        self.u64(s.seed());
        self.u64(s.seen());
        self.usize(s.len());
        for (row, v) in s.entries() {
            self.u64(*row);
            put(self, v);
        }
    }

    fn misra_gries<K: Ord + Clone>(&mut self, s: &MisraGries<K>, mut put: impl FnMut(&mut Self, &K)) {
        self.usize(s.capacity());
        self.u64(s.count());
        self.u64(s.error_bound());
        let counters: Vec<_> = s.counters().collect();
        self.usize(counters.len());
        for (k, c) in counters {
            put(self, k);
            self.u64(c);
        }
    }

    fn distinct(&mut self, s: &DistinctSketch) {
        self.usize(s.cap());
        match s.hashes() {
            None => self.u8(0),
            Some(h) => {
                self.u8(1);
                let h: Vec<u64> = h.collect();
                self.usize(h.len());
                h.into_iter().for_each(|x| self.u64(x));
            }
        }
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.0.len() < n {
            return Err(FormatError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn flag(&mut self) -> Result<bool, FormatError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(FormatError::Corrupt(format!("bad flag byte {v}"))),
        }
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn usize(&mut self) -> Result<usize, FormatError> {
        usize::try_from(self.u64()?).map_err(|_| FormatError::Corrupt("length overflows usize".into()))
    }

    /// A length whose elements take at least `min_size` bytes each; guards
    /// allocations against corrupt lengths.
    fn len(&mut self, min_size: usize) -> Result<usize, FormatError> {
        let n = self.usize()?;
        if n.saturating_mul(min_size) > self.0.len() {
            return Err(FormatError::Truncated);
        }
        Ok(n)
    }

    fn i64(&mut self) -> Result<i64, FormatError> {
        Ok(i64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn str(&mut self) -> Result<String, FormatError> {
        let n = self.u32()? as usize;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| FormatError::Corrupt("label is not UTF-8".into()))
    }

    fn f64s(&mut self) -> Result<Vec<f64>, FormatError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn numeric(&mut self) -> Result<NumericSketch, FormatError> {
        let count = self.u64()?;
        let mut sums: [ExactSum; 4] = Default::default();
        for sum in &mut sums {
            *sum = ExactSum::from_stored_partials(self.f64s()?)
                .ok_or_else(|| FormatError::Corrupt("non-finite power sum".into()))?;
        }
        let moments = MomentSketch::from_parts(count, sums, self.f64()?, self.f64()?);

        let epsilon = self.f64()?;
        let capacity = self.usize()?;
        let qcount = self.u64()?;
        let (min, max) = (self.f64()?, self.f64()?);
        let error = self.u64()?;
        let depth = self.len(9)?;
        let mut levels = Vec::with_capacity(depth);
        let mut parity = Vec::with_capacity(depth);
        for _ in 0..depth {
            parity.push(self.flag()?);
            levels.push(self.f64s()?);
        }
        let quantiles = QuantileSketch::from_parts(epsilon, capacity, levels, parity, qcount, min, max, error)?;

        let reservoir = self.reservoir(|r| r.f64())?;

        let hyperplane = if self.flag()? {
            let k = self.usize()?;
            let seed = self.u64()?;
            let mean = self.f64()?;
            if k.saturating_mul(16) > self.0.len() {
                return Err(FormatError::Truncated);
            }
            let projections = (0..k).map(|_| self.f64()).collect::<Result<_, _>>()?;
            let masses = (0..k).map(|_| self.f64()).collect::<Result<_, _>>()?;
            Some(HyperplaneSketch::from_parts(k, seed, mean, projections, masses)?)
        } else {
            None
        };

        let frequencies = if self.flag()? {
            Some(IntegerFrequencies { heavy: self.misra_gries(|r| r.i64())?, distinct: self.distinct()? })
        } else {
            None
        };
        Ok(NumericSketch { moments, quantiles, reservoir, hyperplane, frequencies })
    }

    fn categorical(&mut self) -> Result<CategoricalSketch, FormatError> {
        Ok(CategoricalSketch {
            count: self.u64()?,
            heavy: self.misra_gries(|r| r.str())?,
            distinct: self.distinct()?,
            reservoir: self.reservoir(|r| r.str())?,
        })
    }

    fn reservoir<T: Clone>(
        &mut self,
        mut get: impl FnMut(&mut Self) -> Result<T, FormatError>,
    ) -> Result<ReservoirSample<T>, FormatError> {
        let capacity = self.usize()?;
        let seed = self.u64()?;
        let seen = self.u64()?;
        let n = self.len(8)?;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let row = self.u64()?;
            entries.push((row, get(self)?));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(FormatError::Corrupt("reservoir rows out of order".into()));
        }
        Ok(ReservoirSample::from_parts(capacity, seed, seen, entries)?)
    }

    fn misra_gries<K: Ord + Clone>(
        &mut self,
        mut get: impl FnMut(&mut Self) -> Result<K, FormatError>,
    ) -> Result<MisraGries<K>, FormatError> {
        let capacity = self.usize()?;
        let count = self.u64()?;
        let offset = self.u64()?;
        let n = self.len(8)?;
        let mut counters = Vec::with_capacity(n);
        for _ in 0..n {
            let k = get(self)?;
            counters.push((k, self.u64()?));
        }
        if counters.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(FormatError::Corrupt("frequent-items keys out of order".into()));
        }
        Ok(MisraGries::from_parts(capacity, counters, count, offset)?)
    }

    fn distinct(&mut self) -> Result<DistinctSketch, FormatError> {
        let cap = self.usize()?;
        let hashes = if self.flag()? {
            let n = self.len(8)?;
            let h: Vec<u64> = (0..n).map(|_| self.u64()).collect::<Result<_, _>>()?;
            if h.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FormatError::Corrupt("distinct hashes out of order".into()));
            }
            Some(h)
        } else {
            None
        };
        Ok(DistinctSketch::from_parts(cap, hashes)?)
    }
}
