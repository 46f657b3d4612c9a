//! Filter file layout, all integers little-endian:
//!
//! | offset | size | field            |
//! |--------|------|------------------|
//! | 0      | 4    | magic `NAEF`     |
//! | 4      | 2    | version          |
//! | 6      | 2    | k                |
//! | 8      | 8    | n                |
//! | 16     | 8    | m                |
//! | 24     | 4    | s                |
//! | 28     | 2    | hash algorithm   |
//! | 30     | 1    | hash mode        |
//! | 31     | 4    | base seed        |
//! | 35     | 2    | build engine id  |
//! | 37     | 27   | reserved, zero   |
//!
//! followed by `n` rows of `ceil(s / 64)` u64 words.

use std::io::{Read, Write};
use std::path::Path;

use super::{FilterHeader, NaeSatFilter, SolutionMatrix};
use crate::error::{Error, Result};
use crate::keyhash::{HashAlgorithm, HashMode, HashSpec};

pub const MAGIC: [u8; 4] = *b"NAEF";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;
const RESERVED_START: usize = 37;

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

impl NaeSatFilter {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&h.version.to_le_bytes());
        out.extend_from_slice(&(h.k as u16).to_le_bytes());
        out.extend_from_slice(&(h.n as u64).to_le_bytes());
        out.extend_from_slice(&(h.m as u64).to_le_bytes());
        out.extend_from_slice(&(h.s as u32).to_le_bytes());
        out.extend_from_slice(&h.hash_spec.algorithm.id().to_le_bytes());
        out.push(h.hash_spec.mode.id());
        out.extend_from_slice(&h.hash_spec.base_seed.to_le_bytes());
        out.extend_from_slice(&h.build_engine_id.to_le_bytes());
        debug_assert_eq!(out.len(), RESERVED_START);
        out.resize(HEADER_LEN, 0);
        for w in self.matrix.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(fmt_err(format!(
                "truncated header: {} bytes, need {HEADER_LEN}",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(fmt_err("bad magic, not a filter file"));
        }
        let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());

        let version = u16_at(4);
        if version != FORMAT_VERSION {
            return Err(fmt_err(format!("unsupported version {version}")));
        }
        let k = u16_at(6) as usize;
        let n = usize::try_from(u64_at(8)).map_err(|_| fmt_err("n does not fit in memory"))?;
        let m = usize::try_from(u64_at(16)).map_err(|_| fmt_err("m does not fit in memory"))?;
        let s = u32_at(24) as usize;
        let algorithm = HashAlgorithm::from_id(u16_at(28))?;
        let mode = HashMode::from_id(bytes[30])?;
        let base_seed = u32_at(31);
        let build_engine_id = u16_at(35);
        if bytes[RESERVED_START..HEADER_LEN].iter().any(|&b| b != 0) {
            return Err(fmt_err("reserved header bytes are not zero"));
        }
        if s == 0 {
            return Err(fmt_err("header claims s = 0"));
        }
        if k < 2 || n < k || m == 0 {
            return Err(fmt_err(format!(
                "header dimensions invalid (k = {k}, n = {n}, m = {m})"
            )));
        }

        let words_per_row = s.div_ceil(64);
        let expected = n
            .checked_mul(words_per_row)
            .and_then(|w| w.checked_mul(8))
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| fmt_err("matrix size overflows"))?;
        if bytes.len() != expected {
            return Err(fmt_err(format!(
                "payload length {} does not match header (expected {expected} bytes)",
                bytes.len()
            )));
        }
        let words = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let matrix = SolutionMatrix::from_words(n, s, words)?;
        let header = FilterHeader {
            version,
            k,
            n,
            m,
            s,
            hash_spec: HashSpec {
                algorithm,
                mode,
                base_seed,
            },
            build_engine_id,
        };
        NaeSatFilter::from_parts(header, matrix)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        NaeSatFilter::from_bytes(&buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        NaeSatFilter::from_bytes(&std::fs::read(path)?)
    }
}
