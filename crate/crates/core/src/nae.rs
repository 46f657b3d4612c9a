//! NAE-CNF to plain CNF via penalty clauses.
//!
//! Each clause `c` is followed by its all-complemented twin. `c` forbids
//! the all-false pattern, the twin forbids all-true, so a plain SAT solution
//! of the output is exactly a NAE solution of the input.

use crate::cnf::Cnf;
use crate::error::{Error, Result};

/// Emits `2m` clauses, each source clause immediately followed by its
/// complement. No deduplication.
///
/// The input must not already be penalty-paired; debug builds assert this.
pub fn to_sat_cnf(f: &Cnf) -> Result<Cnf> {
    if f.num_clauses() > 0 && f.width() < 2 {
        return Err(Error::Parameter(format!(
            "NAE rewrite needs clause width >= 2, got {}",
            f.width()
        )));
    }
    debug_assert!(
        f.num_clauses() == 0 || !is_penalty_paired(f),
        "to_sat_cnf applied to an already penalty-paired formula"
    );
    let mut clauses = Vec::with_capacity(2 * f.num_clauses());
    for c in f.clauses() {
        clauses.push(c.clone());
        clauses.push(c.complement());
    }
    Cnf::new(f.num_vars(), f.width(), clauses)
}

/// True iff the clauses come in adjacent `(c, complement(c))` pairs.
pub fn is_penalty_paired(f: &Cnf) -> bool {
    let cs = f.clauses();
    cs.len().is_multiple_of(2) && cs.chunks_exact(2).all(|p| p[1] == p[0].complement())
}
