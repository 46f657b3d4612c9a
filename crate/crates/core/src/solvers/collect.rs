use log::debug;
use rayon::prelude::*;

use super::{pt_solve, splitmix64, walksat_solve, Engine, SolverBudget, SolverReport};
use crate::cnf::{cost_nae, Assignment, Cnf};
use crate::error::{Error, PartialCollection, Result};
use crate::nae::to_sat_cnf;

#[derive(Clone, Debug, PartialEq)]
pub struct CollectOptions {
    pub engine: Engine,
    /// Per-solve budget; its `rng_seed` is replaced by the attempt seed.
    pub budget: SolverBudget,
    /// Reject a solution whose complement-folded distance to an accepted
    /// one is below `min_hamming_frac * n`.
    pub min_hamming_frac: f64,
    /// Cap on solve attempts, counting rejected ones.
    pub max_attempts: usize,
}

impl CollectOptions {
    pub fn new(engine: Engine, budget: SolverBudget) -> Self {
        CollectOptions {
            engine,
            budget,
            min_hamming_frac: 0.0,
            max_attempts: 0,
        }
    }

    /// Engine defaults for a formula over `num_vars` variables.
    pub fn defaults(engine: Engine, num_vars: usize) -> Self {
        let budget = engine.default_budget(num_vars);
        CollectOptions::new(engine, budget)
    }

    pub fn with_min_hamming_frac(mut self, frac: f64) -> Self {
        self.min_hamming_frac = frac;
        self
    }

    fn attempt_cap(&self, s: usize) -> usize {
        if self.max_attempts > 0 {
            self.max_attempts
        } else {
            4 * s + 16
        }
    }
}

/// Seed for solve attempt `t`. Restart seeds `seed + r` stay inside the
/// attempt's own 2^32 block.
pub fn attempt_seed(base_seed: u64, attempt: usize) -> u64 {
    base_seed.wrapping_add((attempt as u64) << 32)
}

/// Gathers `s` zero-cost NAE assignments of `f`.
///
/// Attempt `t` solves with [`attempt_seed`]`(base_seed, t)` and complements
/// its result when the low bit of `splitmix64(seed)` is set. Exact
/// duplicates and solutions too close to an accepted one are dropped and
/// the next attempt runs. Attempts are solved in parallel batches of at
/// most one per worker thread and consumed in attempt order, so the output
/// does not depend on the thread count. A solve that exhausts its budget ends collection with
/// [`Error::Solver`] carrying the solutions accepted so far.
pub fn collect_solutions(
    f: &Cnf,
    s: usize,
    base_seed: u64,
    opts: &CollectOptions,
) -> Result<Vec<Assignment>> {
    if s == 0 {
        return Err(Error::Parameter(
            "solution count s must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&opts.min_hamming_frac) {
        return Err(Error::Parameter(format!(
            "min_hamming_frac {} outside [0, 1]",
            opts.min_hamming_frac
        )));
    }
    if f.num_clauses() > 0 && f.width() < 2 {
        return Err(Error::Parameter(
            "NAE formulas need clause width >= 2".into(),
        ));
    }
    let encoded = match opts.engine {
        Engine::WalkSat { .. } => Some(to_sat_cnf(f)?),
        Engine::ParallelTempering { .. } => None,
    };
    let n = f.num_vars();
    let min_dist = (opts.min_hamming_frac * n as f64).ceil() as usize;
    let cap = opts.attempt_cap(s);

    let solve = |attempt: usize| -> Result<(u64, SolverReport)> {
        let seed = attempt_seed(base_seed, attempt);
        let budget = opts.budget.with_seed(seed);
        let report = match &opts.engine {
            Engine::WalkSat { noise } => walksat_solve(encoded.as_ref().unwrap(), budget, *noise)?,
            Engine::ParallelTempering { ladder } => pt_solve(f, budget, ladder)?,
        };
        Ok((seed, report))
    };

    let mut accepted: Vec<Assignment> = Vec::with_capacity(s);
    let mut attempts = 0usize;
    let mut steps_used = 0u64;
    let mut best_cost = usize::MAX;

    while accepted.len() < s && attempts < cap {
        let batch = (s - accepted.len())
            .min(cap - attempts)
            .min(rayon::current_num_threads());
        let reports: Vec<Result<(u64, SolverReport)>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(solve)
            .collect();
        for r in reports {
            let (seed, report) = r?;
            attempts += 1;
            steps_used += report.steps_used;
            best_cost = best_cost.min(report.final_cost);
            let Some(mut a) = report.solution else {
                return Err(partial(f, accepted, s, attempts, steps_used, best_cost));
            };
            // Re-verify against the NAE formula rather than trusting the engine.
            if cost_nae(f, &a)? != 0 {
                return Err(Error::Contract(format!(
                    "engine returned a non-solution for attempt {}",
                    attempts - 1
                )));
            }
            if splitmix64(seed) & 1 == 1 {
                a = a.complement();
            }
            let reject = accepted.iter().any(|b| {
                let d = a.hamming(b);
                d == 0 || d.min(n - d) < min_dist
            });
            if reject {
                debug!(
                    "attempt {} rejected as too close to an accepted solution",
                    attempts - 1
                );
                continue;
            }
            if accepted.len() < s {
                accepted.push(a);
            }
        }
    }

    if accepted.len() < s {
        return Err(partial(f, accepted, s, attempts, steps_used, best_cost));
    }
    Ok(accepted)
}

fn partial(
    f: &Cnf,
    solutions: Vec<Assignment>,
    requested: usize,
    attempts: usize,
    steps_used: u64,
    best_cost: usize,
) -> Error {
    Error::Solver(Box::new(PartialCollection {
        solutions,
        requested,
        attempts,
        steps_used,
        best_cost: if best_cost == usize::MAX {
            0
        } else {
            best_cost
        },
        alpha: f.alpha(),
    }))
}
