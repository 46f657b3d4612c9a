//! Probabilistic set-membership filters built from not-all-equal SAT
//! solutions.
//!
//! A keyset `Y` is hashed into a random k-CNF with one clause per key. A
//! handful of NAE solutions of that formula is stored bit-packed; a key
//! queries `Maybe` only if its clause is NAE-satisfied by every stored
//! solution. Inserted keys therefore never produce a false negative.
//!
//! The crate is organised bottom-up:
//!
//! * [`cnf`] and [`dimacs`]: formulas, assignments, SAT/NAE semantics.
//! * [`keyhash`]: MurmurHash3-based key to clause derivation.
//! * [`nae`]: the penalty-clause rewrite of NAE-CNF into plain CNF.
//! * [`solvers`]: WalkSAT, parallel tempering, solution collection.
//! * [`filter`]: build, packed query, on-disk format.
//! * [`bloom`]: the Bloom filter baseline.
//! * [`metrics`]: closed-form FPR/efficiency and empirical estimation.

pub mod bloom;
pub mod cnf;
pub mod dimacs;
mod error;
pub mod filter;
pub mod keyhash;
pub mod metrics;
pub mod murmur3;
pub mod nae;
pub mod solvers;

pub use bloom::BloomFilter;
pub use cnf::{Assignment, Clause, Cnf, Literal};
pub use error::{Error, PartialCollection, Result};
pub use filter::{Answer, NaeSatFilter, QueryMode};
pub use keyhash::{HashAlgorithm, HashMode, HashSpec, KeyDigest};
pub use solvers::{Engine, SolverBudget, SolverReport, TemperatureLadder};
