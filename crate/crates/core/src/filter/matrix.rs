use crate::cnf::{low_mask, Assignment};
use crate::error::{Error, Result};

/// `n` rows of `s` bits; row `i`, bit `j` is solution `j`'s value of `x_i`.
///
/// Each row occupies `ceil(s / 64)` words. Pad bits above `s` in the last
/// word of a row are always zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionMatrix {
    n: usize,
    s: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl SolutionMatrix {
    /// Packs assignments as columns. All must have the same length.
    pub fn from_solutions(solutions: &[Assignment]) -> Result<Self> {
        let Some(first) = solutions.first() else {
            return Err(Error::Parameter("need at least one solution".into()));
        };
        let n = first.len();
        if let Some(bad) = solutions.iter().position(|a| a.len() != n) {
            return Err(Error::Contract(format!(
                "solution {bad} has {} variables, expected {n}",
                solutions[bad].len()
            )));
        }
        let s = solutions.len();
        let words_per_row = s.div_ceil(64);
        let mut words = vec![0u64; n * words_per_row];
        for (j, a) in solutions.iter().enumerate() {
            let (w, bit) = (j / 64, j % 64);
            for (chunk_idx, &chunk) in a.words().iter().enumerate() {
                let mut bits = chunk;
                while bits != 0 {
                    let i = chunk_idx * 64 + bits.trailing_zeros() as usize;
                    words[i * words_per_row + w] |= 1 << bit;
                    bits &= bits - 1;
                }
            }
        }
        Ok(SolutionMatrix {
            n,
            s,
            words_per_row,
            words,
        })
    }

    /// Wraps raw row words, validating size and pad bits.
    pub fn from_words(n: usize, s: usize, words: Vec<u64>) -> Result<Self> {
        if s == 0 {
            return Err(Error::Format("solution count s = 0".into()));
        }
        let words_per_row = s.div_ceil(64);
        if words.len() != n * words_per_row {
            return Err(Error::Format(format!(
                "matrix has {} words, expected {n} x {words_per_row}",
                words.len()
            )));
        }
        let pad = !last_word_mask(s);
        if pad != 0 {
            for i in 0..n {
                if words[(i + 1) * words_per_row - 1] & pad != 0 {
                    return Err(Error::Format(format!("nonzero pad bits in row {i}")));
                }
            }
        }
        Ok(SolutionMatrix {
            n,
            s,
            words_per_row,
            words,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_solutions(&self) -> usize {
        self.s
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn row(&self, var: usize) -> &[u64] {
        &self.words[var * self.words_per_row..(var + 1) * self.words_per_row]
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, var: usize, solution: usize) -> bool {
        (self.row(var)[solution / 64] >> (solution % 64)) & 1 == 1
    }

    /// Column `j` as an assignment.
    pub fn solution(&self, j: usize) -> Assignment {
        assert!(j < self.s, "solution {j} out of range for {}", self.s);
        let mut a = Assignment::zeros(self.n);
        for i in 0..self.n {
            if self.get(i, j) {
                a.set(i, true);
            }
        }
        a
    }

    pub fn solutions(&self) -> Vec<Assignment> {
        (0..self.s).map(|j| self.solution(j)).collect()
    }

    /// The first `s` columns.
    pub fn prefix(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.s {
            return Err(Error::Parameter(format!(
                "prefix length {s} outside 1..={}",
                self.s
            )));
        }
        let wpr = s.div_ceil(64);
        let mask = last_word_mask(s);
        let mut words = Vec::with_capacity(self.n * wpr);
        for i in 0..self.n {
            let row = &self.row(i)[..wpr];
            words.extend_from_slice(&row[..wpr - 1]);
            words.push(row[wpr - 1] & mask);
        }
        Ok(SolutionMatrix {
            n: self.n,
            s,
            words_per_row: wpr,
            words,
        })
    }
}

/// Valid bits of the last word in a row of `s` bits.
#[inline]
pub(crate) fn last_word_mask(s: usize) -> u64 {
    match s % 64 {
        0 => u64::MAX,
        r => low_mask(r),
    }
}
