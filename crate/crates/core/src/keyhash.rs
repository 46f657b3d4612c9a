//! Key to clause derivation.
//!
//! A key's 128-bit digest is read as a little-endian bit stream: bit `i` of
//! the stream is bit `i % 64` of word `i / 64`. Each literal draws
//! `ceil(log2 n)` bits for its variable, rejecting values `>= n` and
//! variables already in the clause, then one sign bit (1 = negated). A draw
//! that does not fit in the bits left re-digests with the next counter and
//! starts from bit 0 of the new digest.
//!
//! In [`HashMode::TwoHash`] variables come from the stream seeded with
//! `base_seed` and signs from a second stream seeded with `base_seed + 1`.

use std::fmt;
use std::str::FromStr;

use crate::cnf::{Clause, Literal};
use crate::error::{Error, Result};
use crate::murmur3::murmur3_x64_128;

const COUNTER_MIX: u32 = 0x9E37_79B9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum HashAlgorithm {
    Murmur3X64_128 = 1,
}

impl HashAlgorithm {
    pub fn id(self) -> u16 {
        self as u16
    }

    pub fn from_id(id: u16) -> Result<Self> {
        match id {
            1 => Ok(HashAlgorithm::Murmur3X64_128),
            other => Err(Error::Format(format!("unknown hash algorithm id {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum HashMode {
    OneHash = 1,
    TwoHash = 2,
}

impl HashMode {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(HashMode::OneHash),
            2 => Ok(HashMode::TwoHash),
            other => Err(Error::Format(format!("unknown hash mode {other}"))),
        }
    }
}

impl fmt::Display for HashMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HashMode::OneHash => "one",
            HashMode::TwoHash => "two",
        })
    }
}

impl FromStr for HashMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "1" => Ok(HashMode::OneHash),
            "two" | "2" => Ok(HashMode::TwoHash),
            other => Err(Error::Parameter(format!(
                "hash mode must be `one` or `two`, got {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HashSpec {
    pub algorithm: HashAlgorithm,
    pub mode: HashMode,
    pub base_seed: u32,
}

impl HashSpec {
    pub fn new(mode: HashMode, base_seed: u32) -> Self {
        HashSpec {
            algorithm: HashAlgorithm::Murmur3X64_128,
            mode,
            base_seed,
        }
    }

    pub fn one_hash(base_seed: u32) -> Self {
        HashSpec::new(HashMode::OneHash, base_seed)
    }

    pub fn two_hash(base_seed: u32) -> Self {
        HashSpec::new(HashMode::TwoHash, base_seed)
    }
}

impl HashSpec {
    /// Seeds hashed at counter 0: the base seed, plus `base_seed + 1` in
    /// two-hash mode.
    pub fn seeds(&self) -> Vec<u32> {
        match self.mode {
            HashMode::OneHash => vec![self.base_seed],
            HashMode::TwoHash => vec![self.base_seed, self.base_seed.wrapping_add(1)],
        }
    }
}

impl Default for HashSpec {
    fn default() -> Self {
        HashSpec::one_hash(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KeyDigest {
    pub words: [u64; 2],
}

impl KeyDigest {
    pub fn as_u128(self) -> u128 {
        self.words[0] as u128 | (self.words[1] as u128) << 64
    }
}

/// Seed actually passed to the hash for a `(seed, counter)` pair. Counter 0
/// leaves the seed unchanged.
pub fn effective_seed(seed: u32, counter: u32) -> u32 {
    seed ^ counter.wrapping_mul(COUNTER_MIX)
}

/// For keys of at most 8 bytes, a seed equal to the key length makes both
/// lanes of MurmurHash3 finalise to the same value. The low word of the
/// digest is then always even and two keys share each digest mod any
/// modulus of the form used here.
pub fn is_weak_seed(seed: u32, key_len: usize) -> bool {
    key_len <= 8 && seed as usize == key_len
}

pub fn digest(key: &[u8], seed: u32, counter: u32) -> KeyDigest {
    let (h1, h2) = murmur3_x64_128(key, effective_seed(seed, counter));
    KeyDigest { words: [h1, h2] }
}

struct BitStream<'a> {
    key: &'a [u8],
    seed: u32,
    counter: u32,
    bits: u128,
    pos: u32,
}

impl<'a> BitStream<'a> {
    fn new(key: &'a [u8], seed: u32) -> Self {
        BitStream {
            key,
            seed,
            counter: 0,
            bits: digest(key, seed, 0).as_u128(),
            pos: 0,
        }
    }

    #[inline]
    fn take(&mut self, width: u32) -> u64 {
        debug_assert!((1..=64).contains(&width));
        if self.pos + width > 128 {
            self.counter = self.counter.wrapping_add(1);
            self.bits = digest(self.key, self.seed, self.counter).as_u128();
            self.pos = 0;
        }
        let v = (self.bits >> self.pos) as u64;
        self.pos += width;
        if width == 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }
}

/// Bits needed to index `n` values; `n >= 2`.
#[inline]
pub fn index_bits(n: usize) -> u32 {
    usize::BITS - (n - 1).leading_zeros()
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Parameter(format!(
            "clause width k = {k} must be at least 2"
        )));
    }
    if n < k {
        return Err(Error::Parameter(format!(
            "need n >= k to draw distinct variables (n = {n}, k = {k})"
        )));
    }
    Ok(())
}

/// Fills `out` with the k literals for `key`. `out` is cleared first.
pub fn derive_literals(
    key: &[u8],
    spec: &HashSpec,
    n: usize,
    k: usize,
    out: &mut Vec<Literal>,
) -> Result<()> {
    check_dims(n, k)?;
    derive_unchecked(key, spec, n, k, out);
    Ok(())
}

#[inline]
pub(crate) fn derive_unchecked(
    key: &[u8],
    spec: &HashSpec,
    n: usize,
    k: usize,
    out: &mut Vec<Literal>,
) {
    out.clear();
    let width = index_bits(n);
    let mut vars = BitStream::new(key, spec.base_seed);
    let mut signs = match spec.mode {
        HashMode::OneHash => None,
        HashMode::TwoHash => Some(BitStream::new(key, spec.base_seed.wrapping_add(1))),
    };
    while out.len() < k {
        let v = vars.take(width) as usize;
        if v >= n || out.iter().any(|l| l.var == v) {
            continue;
        }
        let negated = match signs.as_mut() {
            None => vars.take(1) == 1,
            Some(s) => s.take(1) == 1,
        };
        out.push(Literal::new(v, negated));
    }
}

pub fn derive_clause(key: &[u8], spec: &HashSpec, n: usize, k: usize) -> Result<Clause> {
    let mut lits = Vec::with_capacity(k);
    derive_literals(key, spec, n, k, &mut lits)?;
    Ok(Clause::from_distinct(lits))
}
