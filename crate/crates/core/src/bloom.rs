//! Bloom-filter membership baseline.
//!
//! A filter answers "possibly present" or "definitely absent" and nothing
//! else: there is no way to ask which document holds a term, where, or how
//! often.

use std::fs;
use std::path::Path;

use log::warn;
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, IoContext, Result};

const SEED_A: u64 = 0x9e37_79b9_7f4a_7c15;
const SEED_B: u64 = 0xc2b2_ae3d_27d4_eb4f;
const HEADER_BYTES: usize = 8 + 4 + 8;

/// `(m, k)` for capacity `n` and target false-positive rate `p`.
pub fn optimal_params(n: u64, p: f64) -> (u64, u32) {
    let n = n.max(1) as f64;
    let ln2 = std::f64::consts::LN_2;
    let m = (-n * p.ln() / (ln2 * ln2)).ceil();
    let k = ((m / n) * ln2).round().max(1.0);
    (m as u64, k as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    m: u64,
    k: u32,
    n_inserted: u64,
    capacity: u64,
    bits: Vec<u8>,
}

impl BloomFilter {
    pub fn new(capacity: u64, fp_rate: f64) -> Result<Self> {
        if !(fp_rate > 0.0 && fp_rate < 1.0) {
            return Err(Error::InvalidConfig(format!("false-positive rate must lie in (0, 1), got {fp_rate}")));
        }
        let (m, k) = optimal_params(capacity, fp_rate);
        Ok(BloomFilter { m, k, n_inserted: 0, capacity: capacity.max(1), bits: vec![0; m.div_ceil(8) as usize] })
    }

    pub fn bit_count(&self) -> u64 {
        self.m
    }

    pub fn hash_count(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.n_inserted
    }

    pub fn is_empty(&self) -> bool {
        self.n_inserted == 0
    }

    pub fn capacity_exceeded(&self) -> bool {
        self.n_inserted > self.capacity
    }

    /// `(1 - e^(-kn/m))^k` for the current fill.
    pub fn estimated_fp_rate(&self) -> f64 {
        let (k, n, m) = (f64::from(self.k), self.n_inserted as f64, self.m as f64);
        (1.0 - (-k * n / m).exp()).powf(k)
    }

    fn indexes(&self, term: &str) -> impl Iterator<Item = u64> {
        let h1 = xxh3_64_with_seed(term.as_bytes(), SEED_A);
        let h2 = xxh3_64_with_seed(term.as_bytes(), SEED_B) | 1;
        let m = self.m;
        (0..u64::from(self.k)).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % m)
    }

    pub fn insert(&mut self, term: &str) {
        for i in self.indexes(term).collect::<Vec<_>>() {
            self.bits[(i / 8) as usize] |= 1 << (i % 8);
        }
        self.n_inserted += 1;
        if self.n_inserted == self.capacity + 1 {
            warn!("bloom filter capacity {} exceeded; false-positive bound no longer holds", self.capacity);
        }
    }

    pub fn maybe_contains(&self, term: &str) -> bool {
        self.indexes(term).all(|i| self.bits[(i / 8) as usize] & (1 << (i % 8)) != 0)
    }

    /// `m:u64 k:u32 n:u64` then the bit array, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.bits.len());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.extend_from_slice(&self.n_inserted.to_le_bytes());
        out.extend_from_slice(&self.bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let m = u64::from_le_bytes(bytes.get(0..8)?.try_into().ok()?);
        let k = u32::from_le_bytes(bytes.get(8..12)?.try_into().ok()?);
        let n = u64::from_le_bytes(bytes.get(12..20)?.try_into().ok()?);
        let bits = bytes.get(HEADER_BYTES..)?;
        if m == 0 || k == 0 || bits.len() as u64 != m.div_ceil(8) {
            return None;
        }
        Some(BloomFilter { m, k, n_inserted: n, capacity: n.max(1), bits: bits.to_vec() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).at(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).at(path)?;
        Self::from_bytes(&bytes).ok_or_else(|| Error::corrupt(path, "not a bloom filter"))
    }
}

/// Builds a filter sized for `capacity` and inserts every term.
pub fn build_filter<I, S>(terms: I, capacity: u64, fp_rate: f64) -> Result<BloomFilter>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut f = BloomFilter::new(capacity, fp_rate)?;
    for t in terms {
        f.insert(t.as_ref());
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_filter_contains_nothing() {
        let f = BloomFilter::new(100, 0.01).unwrap();
        assert!(f.is_empty());
        assert!(!f.maybe_contains("climate"));
        assert!(!f.maybe_contains(""));
    }

    #[test]
    fn inserted_terms_are_found() {
        let f = build_filter(["climate", ""], 10, 0.01).unwrap();
        assert!(f.maybe_contains("climate"));
        assert!(f.maybe_contains(""));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn serialization_round_trip() {
        let f = build_filter(["a", "b", "c"], 50, 0.05).unwrap();
        let g = BloomFilter::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!((g.bit_count(), g.hash_count(), g.len()), (f.bit_count(), f.hash_count(), 3));
        assert!(g.maybe_contains("b"));
        assert!(BloomFilter::from_bytes(&[1, 2, 3]).is_none());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(BloomFilter::new(10, 0.0).is_err());
        assert!(BloomFilter::new(10, 1.0).is_err());
    }

    #[test]
    fn capacity_overflow_is_flagged() {
        let f = build_filter((0..5).map(|i| i.to_string()), 3, 0.1).unwrap();
        assert!(f.capacity_exceeded());
    }
}
