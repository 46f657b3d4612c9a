//! Classic Bloom filter, kept as the comparison baseline.
//!
//! Hash `i` of `j` is the key digest under seed `base_seed + i`, reduced
//! mod the bit count. Avoid base seeds within `j` below the key length
//! for short keys, see [`crate::keyhash::is_weak_seed`].

use crate::error::{Error, Result};
use crate::filter::Answer;
use crate::keyhash::digest;
use crate::metrics::MembershipQuery;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BloomFilter {
    words: Vec<u64>,
    num_bits: usize,
    num_hashes: u32,
    base_seed: u32,
}

impl BloomFilter {
    pub fn new(num_bits: usize, num_hashes: u32, base_seed: u32) -> Result<Self> {
        if num_bits == 0 || num_hashes == 0 {
            return Err(Error::Parameter(format!(
                "bloom filter needs n >= 1 bits and j >= 1 hashes (n = {num_bits}, j = {num_hashes})"
            )));
        }
        Ok(BloomFilter {
            words: vec![0; num_bits.div_ceil(64)],
            num_bits,
            num_hashes,
            base_seed,
        })
    }

    /// A filter over existing bit words; bits past `num_bits` are cleared.
    pub fn from_words(
        num_bits: usize,
        num_hashes: u32,
        base_seed: u32,
        mut words: Vec<u64>,
    ) -> Result<Self> {
        let mut bf = BloomFilter::new(num_bits, num_hashes, base_seed)?;
        if words.len() != bf.words.len() {
            return Err(Error::Parameter(format!(
                "expected {} words for {num_bits} bits, got {}",
                bf.words.len(),
                words.len()
            )));
        }
        if !num_bits.is_multiple_of(64) {
            *words.last_mut().unwrap() &= (1u64 << (num_bits % 64)) - 1;
        }
        bf.words = words;
        Ok(bf)
    }

    /// `j` near `(n / m) ln 2`, the FPR-minimising hash count for `m` keys.
    pub fn optimal_hashes(num_bits: usize, num_keys: usize) -> u32 {
        let j = (num_bits as f64 / num_keys.max(1) as f64 * std::f64::consts::LN_2).round();
        j.max(1.0) as u32
    }

    #[inline]
    fn position(&self, key: &[u8], i: u32) -> usize {
        let d = digest(key, self.base_seed.wrapping_add(i), 0);
        (d.as_u128() % self.num_bits as u128) as usize
    }

    pub fn insert(&mut self, key: &[u8]) {
        for i in 0..self.num_hashes {
            let p = self.position(key, i);
            self.words[p / 64] |= 1 << (p % 64);
        }
    }

    pub fn query(&self, key: &[u8]) -> Answer {
        let all = (0..self.num_hashes).all(|i| {
            let p = self.position(key, i);
            (self.words[p / 64] >> (p % 64)) & 1 == 1
        });
        if all {
            Answer::Maybe
        } else {
            Answer::No
        }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn num_hashes(&self) -> u32 {
        self.num_hashes
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl MembershipQuery for BloomFilter {
    fn contains(&self, key: &[u8]) -> bool {
        self.query(key).is_maybe()
    }
}

/// Asymptotic FPR `(1 - e^{-j m / n})^j` after `m` insertions.
pub fn bloom_fpr_theory(num_bits: usize, num_hashes: u32, num_keys: usize) -> f64 {
    let j = num_hashes as f64;
    (1.0 - (-j * num_keys as f64 / num_bits as f64).exp()).powf(j)
}

/// `-log2(fpr) / (n / m)` for an `n`-bit filter holding `m` keys.
pub fn bloom_efficiency(fpr: f64, num_bits: usize, num_keys: usize) -> Result<f64> {
    if !(fpr > 0.0 && fpr < 1.0) {
        return Err(Error::Domain(format!(
            "false-positive rate {fpr} outside (0, 1)"
        )));
    }
    if num_bits == 0 || num_keys == 0 {
        return Err(Error::Domain("bit and key counts must be positive".into()));
    }
    Ok(-fpr.log2() / (num_bits as f64 / num_keys as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::measure_fpr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn insert_then_query() {
        let mut bf = BloomFilter::new(1000, 4, 1).unwrap();
        assert_eq!(bf.query(b"hello"), Answer::No);
        bf.insert(b"hello");
        assert_eq!(bf.query(b"hello"), Answer::Maybe);
        assert!(bf.count_ones() <= 4);
        let snapshot = bf.clone();
        bf.insert(b"hello");
        assert_eq!(bf, snapshot);
    }

    #[test]
    fn empty_and_full() {
        let empty = BloomFilter::new(100, 3, 0).unwrap();
        let full = BloomFilter::from_words(100, 3, 0, vec![u64::MAX; 2]).unwrap();
        assert_eq!(full.count_ones(), 100);
        for key in 0u64..1000 {
            assert_eq!(empty.query(&key.to_le_bytes()), Answer::No);
            assert_eq!(full.query(&key.to_le_bytes()), Answer::Maybe);
        }
    }

    #[test]
    fn monotone_under_insertion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut bf = BloomFilter::new(2000, 3, 9).unwrap();
        let probes: Vec<u64> = (0..2000).map(|_| rng.gen()).collect();
        let mut inserted = Vec::new();
        for _ in 0..20 {
            let before: Vec<Answer> = probes.iter().map(|p| bf.query(&p.to_le_bytes())).collect();
            for _ in 0..30 {
                let key: u64 = rng.gen();
                bf.insert(&key.to_le_bytes());
                inserted.push(key);
            }
            for (p, b) in probes.iter().zip(before) {
                if b.is_maybe() {
                    assert!(bf.query(&p.to_le_bytes()).is_maybe());
                }
            }
            assert!(inserted
                .iter()
                .all(|k| bf.query(&k.to_le_bytes()).is_maybe()));
        }
    }

    #[test]
    fn fpr_matches_closed_form() {
        let (m, n, j) = (1usize << 14, 200_000usize, 7u32);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut bf = BloomFilter::new(n, j, 100).unwrap();
        let mut members = HashSet::new();
        while members.len() < m {
            let key: u64 = rng.gen();
            if members.insert(key) {
                bf.insert(&key.to_le_bytes());
            }
        }
        let est = measure_fpr(&bf, 400_000, 5, &members);
        let p = bloom_fpr_theory(n, j, m);
        let sigma = (p * (1.0 - p) / est.trials as f64).sqrt();
        assert!(
            (est.estimate - p).abs() < 4.0 * sigma,
            "{} vs {p}",
            est.estimate
        );
    }

    #[test]
    fn efficiency_formula() {
        assert_eq!(bloom_efficiency(0.5, 10, 10).unwrap(), 1.0);
        assert!(bloom_efficiency(1.0, 10, 10).is_err());
        assert!(bloom_efficiency(0.0, 10, 10).is_err());
        assert_eq!(BloomFilter::optimal_hashes(10 * 1000, 1000), 7);
        assert!(BloomFilter::new(0, 1, 0).is_err());
        assert!(BloomFilter::new(1, 0, 0).is_err());
    }
}
