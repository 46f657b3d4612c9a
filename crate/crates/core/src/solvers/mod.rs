//! Stochastic solvers for filter construction.
//!
//! [`walksat_solve`] works on plain CNF (NAE formulas go through
//! [`crate::nae::to_sat_cnf`] first); [`pt_solve`] minimises the NAE cost
//! directly. [`collect_solutions`] drives either engine to gather several
//! solutions for one formula.

mod collect;
mod tempering;
mod walksat;

pub use collect::{collect_solutions, CollectOptions};
pub use tempering::{pt_solve, swap_acceptance, TemperatureLadder};
pub use walksat::{walksat_solve, DEFAULT_NOISE};

use rand::Rng;

use crate::cnf::{Assignment, Cnf};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverBudget {
    /// Flips (WalkSAT) or sweeps (tempering) per restart.
    pub max_steps: u64,
    /// Additional attempts after the first; restart `r` uses seed
    /// `rng_seed + r`.
    pub max_restarts: u32,
    pub rng_seed: u64,
}

impl SolverBudget {
    pub fn new(max_steps: u64, max_restarts: u32, rng_seed: u64) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::Parameter("max_steps must be at least 1".into()));
        }
        Ok(SolverBudget {
            max_steps,
            max_restarts,
            rng_seed,
        })
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        SolverBudget { rng_seed, ..self }
    }

    /// Default WalkSAT budget: 200 flips per variable, 9 restarts.
    pub fn walksat_default(num_vars: usize) -> Self {
        SolverBudget {
            max_steps: (200 * num_vars as u64).max(10_000),
            max_restarts: 9,
            rng_seed: 0,
        }
    }

    /// Default tempering budget: 2000 sweeps, 4 restarts.
    pub fn tempering_default() -> Self {
        SolverBudget {
            max_steps: 2000,
            max_restarts: 4,
            rng_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverReport {
    pub solution: Option<Assignment>,
    pub steps_used: u64,
    pub restarts_used: u32,
    /// Lowest cost reached; 0 exactly when `solution` is present.
    pub final_cost: usize,
}

impl SolverReport {
    pub fn is_solved(&self) -> bool {
        self.solution.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Engine {
    WalkSat { noise: f64 },
    ParallelTempering { ladder: TemperatureLadder },
}

impl Engine {
    pub fn walksat() -> Self {
        Engine::WalkSat {
            noise: DEFAULT_NOISE,
        }
    }

    pub fn tempering() -> Self {
        Engine::ParallelTempering {
            ladder: TemperatureLadder::default(),
        }
    }

    /// Engine tag stored in filter headers. 0 is reserved for
    /// externally computed solutions.
    pub fn id(&self) -> u16 {
        match self {
            Engine::WalkSat { .. } => 1,
            Engine::ParallelTempering { .. } => 2,
        }
    }

    pub fn default_budget(&self, num_vars: usize) -> SolverBudget {
        match self {
            Engine::WalkSat { .. } => SolverBudget::walksat_default(num_vars),
            Engine::ParallelTempering { .. } => SolverBudget::tempering_default(),
        }
    }
}

/// Clause/occurrence layout shared by both engines.
pub(crate) struct FlatCnf {
    pub n: usize,
    pub k: usize,
    /// Clause `c` is `lits[c * k..(c + 1) * k]` as `(var, negated)`.
    pub lits: Vec<(u32, bool)>,
    /// Occurrences of variable `v` are `occ[occ_start[v]..occ_start[v + 1]]`,
    /// packed as `clause << 1 | negated`.
    pub occ_start: Vec<usize>,
    pub occ: Vec<u32>,
}

impl FlatCnf {
    pub fn new(f: &Cnf) -> Self {
        let n = f.num_vars();
        let k = f.width();
        let mut lits = Vec::with_capacity(f.num_clauses() * k);
        let mut degree = vec![0usize; n + 1];
        for c in f.clauses() {
            for l in c.literals() {
                lits.push((l.var as u32, l.negated));
                degree[l.var + 1] += 1;
            }
        }
        for v in 0..n {
            degree[v + 1] += degree[v];
        }
        let occ_start = degree;
        let mut fill = occ_start.clone();
        let mut occ = vec![0u32; lits.len()];
        for (c, chunk) in lits.chunks_exact(k).enumerate() {
            for &(v, neg) in chunk {
                occ[fill[v as usize]] = (c as u32) << 1 | neg as u32;
                fill[v as usize] += 1;
            }
        }
        FlatCnf {
            n,
            k,
            lits,
            occ_start,
            occ,
        }
    }

    #[inline]
    pub fn clause(&self, c: usize) -> &[(u32, bool)] {
        &self.lits[c * self.k..(c + 1) * self.k]
    }

    #[inline]
    pub fn occurrences(&self, v: usize) -> &[u32] {
        &self.occ[self.occ_start[v]..self.occ_start[v + 1]]
    }

    #[inline]
    pub fn unpack(o: u32) -> (usize, bool) {
        ((o >> 1) as usize, o & 1 == 1)
    }

    /// Per-clause count of true literals.
    pub fn true_counts(&self, values: &[bool]) -> Vec<u32> {
        self.lits
            .chunks_exact(self.k)
            .map(|c| {
                c.iter()
                    .filter(|&&(v, neg)| values[v as usize] != neg)
                    .count() as u32
            })
            .collect()
    }
}

pub(crate) fn random_values<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen()).collect()
}

/// SplitMix64 finaliser, used to derive independent sub-seeds.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
