//! The NAE-SAT membership filter.
//!
//! Building hashes every key to a k-clause, solves the resulting formula for
//! `s` NAE solutions and packs them variable-major into a
//! [`SolutionMatrix`]. A query re-derives the key's clause and checks it
//! against 64 solutions per word:
//!
//! ```text
//! L_i  = row[var_i] ^ (negated_i ? !0 : 0)   // literal i under each solution
//! pass = (L_1 | .. | L_k) & !(L_1 & .. & L_k)
//! ```
//!
//! The key is a `Maybe` iff `pass` has all of its low `s` bits set.

mod format;
mod matrix;

use std::time::{Duration, Instant};

use log::warn;

pub use format::{FORMAT_VERSION, HEADER_LEN, MAGIC};
pub use matrix::SolutionMatrix;

use crate::cnf::{eval_clause_nae, eval_clause_sat, Assignment, Clause, Cnf, Literal};
use crate::error::{Error, Result};
use crate::keyhash::{derive_clause, derive_unchecked, is_weak_seed, HashSpec};
use crate::metrics;
use crate::solvers::{collect_solutions, CollectOptions};

/// Engine id for filters packed from externally computed solutions.
pub const EXTERNAL_ENGINE_ID: u16 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Maybe,
    No,
}

impl Answer {
    pub fn is_maybe(self) -> bool {
        self == Answer::Maybe
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Answer::Maybe
        } else {
            Answer::No
        }
    }
}

/// Which clause semantics a query checks against the stored solutions.
/// Filters are built for [`QueryMode::Nae`]; `Sat` exists for comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QueryMode {
    #[default]
    Nae,
    Sat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterHeader {
    pub version: u16,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub hash_spec: HashSpec,
    pub build_engine_id: u16,
}

impl FilterHeader {
    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Parameter(format!(
                "k = {} must be at least 2",
                self.k
            )));
        }
        if self.n < self.k {
            return Err(Error::Parameter(format!(
                "n = {} must be at least k = {}",
                self.n, self.k
            )));
        }
        if self.s == 0 {
            return Err(Error::Parameter("s must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Parameter("m must be at least 1".into()));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// Everything [`NaeSatFilter::build`] needs besides the keys.
#[derive(Clone, Debug)]
pub struct FilterParams {
    pub k: usize,
    pub n: usize,
    pub s: usize,
    pub hash_spec: HashSpec,
    pub collect: CollectOptions,
    pub seed: u64,
}

/// Outcome of [`NaeSatFilter::query_batch`].
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub answers: Vec<Answer>,
    pub total: Duration,
}

impl BatchOutcome {
    pub fn maybe_count(&self) -> usize {
        self.answers.iter().filter(|a| a.is_maybe()).count()
    }

    pub fn per_key(&self) -> Duration {
        if self.answers.is_empty() {
            Duration::ZERO
        } else {
            self.total / self.answers.len() as u32
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaeSatFilter {
    header: FilterHeader,
    matrix: SolutionMatrix,
}

/// The formula a filter is built from: one clause per key, in key order.
pub fn build_cnf<K: AsRef<[u8]>>(keys: &[K], k: usize, n: usize, spec: &HashSpec) -> Result<Cnf> {
    let clauses = keys
        .iter()
        .map(|key| derive_clause(key.as_ref(), spec, n, k))
        .collect::<Result<Vec<Clause>>>()?;
    Cnf::new(n, k, clauses)
}

impl NaeSatFilter {
    pub fn build<K: AsRef<[u8]>>(keys: &[K], params: &FilterParams) -> Result<Self> {
        let header = FilterHeader {
            version: FORMAT_VERSION,
            k: params.k,
            n: params.n,
            m: keys.len(),
            s: params.s,
            hash_spec: params.hash_spec,
            build_engine_id: params.collect.engine.id(),
        };
        header.validate()?;
        let ceiling = metrics::alpha_ceiling(params.k);
        if header.alpha() > ceiling {
            warn!(
                "alpha = {:.3} exceeds {:.3}, above which a random NAE {}-SAT formula is almost surely unsatisfiable",
                header.alpha(),
                ceiling,
                params.k
            );
        }
        for seed in params.hash_spec.seeds() {
            if keys.iter().any(|k| is_weak_seed(seed, k.as_ref().len())) {
                warn!(
                    "hash seed {seed} equals the length of some keys; their clauses lose entropy"
                );
            }
        }
        let cnf = build_cnf(keys, params.k, params.n, &params.hash_spec)?;
        let solutions = collect_solutions(&cnf, params.s, params.seed, &params.collect)?;
        Ok(NaeSatFilter {
            header,
            matrix: SolutionMatrix::from_solutions(&solutions)?,
        })
    }

    /// Packs caller-supplied solutions. Each must NAE-satisfy the formula
    /// built from `keys`; the index of the first that does not is reported.
    pub fn from_solutions<K: AsRef<[u8]>>(
        keys: &[K],
        k: usize,
        hash_spec: HashSpec,
        build_engine_id: u16,
        solutions: &[Assignment],
    ) -> Result<Self> {
        let Some(first) = solutions.first() else {
            return Err(Error::Parameter("need at least one solution".into()));
        };
        let n = first.len();
        let header = FilterHeader {
            version: FORMAT_VERSION,
            k,
            n,
            m: keys.len(),
            s: solutions.len(),
            hash_spec,
            build_engine_id,
        };
        header.validate()?;
        let cnf = build_cnf(keys, k, n, &hash_spec)?;
        for (i, a) in solutions.iter().enumerate() {
            let cost = crate::cnf::cost_nae(&cnf, a)
                .map_err(|e| Error::Contract(format!("solution {i}: {e}")))?;
            if cost != 0 {
                return Err(Error::Contract(format!(
                    "solution {i} leaves {cost} clauses NAE-unsatisfied"
                )));
            }
        }
        Ok(NaeSatFilter {
            header,
            matrix: SolutionMatrix::from_solutions(solutions)?,
        })
    }

    pub(crate) fn from_parts(header: FilterHeader, matrix: SolutionMatrix) -> Result<Self> {
        header
            .validate()
            .map_err(|e| Error::Format(e.to_string()))?;
        if matrix.num_vars() != header.n || matrix.num_solutions() != header.s {
            return Err(Error::Format(
                "matrix dimensions do not match header".into(),
            ));
        }
        Ok(NaeSatFilter { header, matrix })
    }

    pub fn header(&self) -> &FilterHeader {
        &self.header
    }

    pub fn matrix(&self) -> &SolutionMatrix {
        &self.matrix
    }

    pub fn solutions(&self) -> Vec<Assignment> {
        self.matrix.solutions()
    }

    /// Same filter restricted to its first `s` solutions.
    pub fn prefix(&self, s: usize) -> Result<Self> {
        Ok(NaeSatFilter {
            header: FilterHeader { s, ..self.header },
            matrix: self.matrix.prefix(s)?,
        })
    }

    /// Bits of solution data, `s * n`.
    pub fn solution_bits(&self) -> u64 {
        self.header.s as u64 * self.header.n as u64
    }

    /// Size of the serialized filter in bytes.
    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + self.matrix.words().len() * 8
    }

    /// Closed-form NAE false-positive rate for this `k` and `s`.
    pub fn theoretical_fpr(&self) -> f64 {
        metrics::fpr_theory_nae(self.header.k, self.header.s).unwrap_or(f64::NAN)
    }

    /// Efficiency at the closed-form FPR, counting `s * n` bits.
    pub fn theoretical_efficiency(&self) -> f64 {
        let h = &self.header;
        metrics::efficiency(self.theoretical_fpr(), h.n, h.s, h.m).unwrap_or(f64::NAN)
    }

    #[inline]
    fn evaluate(&self, lits: &[Literal], mode: QueryMode) -> bool {
        let wpr = self.matrix.words_per_row();
        let words = self.matrix.words();
        let last = matrix::last_word_mask(self.header.s);
        for w in 0..wpr {
            let mut any = 0u64;
            let mut all = u64::MAX;
            for l in lits {
                let x = words[l.var * wpr + w] ^ (l.negated as u64).wrapping_neg();
                any |= x;
                all &= x;
            }
            let pass = match mode {
                QueryMode::Nae => any & !all,
                QueryMode::Sat => any,
            };
            let need = if w + 1 == wpr { last } else { u64::MAX };
            if pass & need != need {
                return false;
            }
        }
        true
    }

    pub fn query(&self, key: &[u8]) -> Answer {
        self.query_with(key, QueryMode::Nae)
    }

    pub fn query_with(&self, key: &[u8], mode: QueryMode) -> Answer {
        let mut lits = Vec::with_capacity(self.header.k);
        self.query_into(key, mode, &mut lits)
    }

    #[inline]
    fn query_into(&self, key: &[u8], mode: QueryMode, lits: &mut Vec<Literal>) -> Answer {
        let h = &self.header;
        derive_unchecked(key, &h.hash_spec, h.n, h.k, lits);
        Answer::from_bool(self.evaluate(lits, mode))
    }

    /// Queries every key in order, timing the whole batch.
    pub fn query_batch<K: AsRef<[u8]>>(&self, keys: &[K]) -> BatchOutcome {
        let mut lits = Vec::with_capacity(self.header.k);
        let mut answers = Vec::with_capacity(keys.len());
        let start = Instant::now();
        for key in keys {
            answers.push(self.query_into(key.as_ref(), QueryMode::Nae, &mut lits));
        }
        BatchOutcome {
            answers,
            total: start.elapsed(),
        }
    }

    /// Unpacked, one-solution-at-a-time evaluator used to cross-check the
    /// packed kernel.
    pub fn scalar_reference(&self) -> ScalarReference {
        ScalarReference {
            header: self.header,
            columns: self.matrix.solutions(),
        }
    }

    /// Single-key convenience over [`NaeSatFilter::scalar_reference`].
    pub fn scalar_query_reference(&self, key: &[u8]) -> Answer {
        self.scalar_reference().query(key, QueryMode::Nae)
    }
}

pub struct ScalarReference {
    header: FilterHeader,
    columns: Vec<Assignment>,
}

impl ScalarReference {
    pub fn query(&self, key: &[u8], mode: QueryMode) -> Answer {
        let h = &self.header;
        let clause = derive_clause(key, &h.hash_spec, h.n, h.k).expect("header validated");
        let ok = self.columns.iter().all(|a| match mode {
            QueryMode::Nae => eval_clause_nae(&clause, a).expect("clause within range"),
            QueryMode::Sat => eval_clause_sat(&clause, a).expect("clause within range"),
        });
        Answer::from_bool(ok)
    }
}

impl metrics::MembershipQuery for NaeSatFilter {
    fn contains(&self, key: &[u8]) -> bool {
        self.query(key).is_maybe()
    }
}
