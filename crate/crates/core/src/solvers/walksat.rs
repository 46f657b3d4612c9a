use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_values, FlatCnf, SolverBudget, SolverReport};
use crate::cnf::{cost_sat, Assignment, Cnf};
use crate::error::{Error, Result};

pub const DEFAULT_NOISE: f64 = 0.25;

struct State<'a> {
    f: &'a FlatCnf,
    values: Vec<bool>,
    true_count: Vec<u32>,
    unsat: Vec<u32>,
    /// Position in `unsat`, `u32::MAX` when satisfied.
    unsat_pos: Vec<u32>,
}

impl<'a> State<'a> {
    fn new(f: &'a FlatCnf, values: Vec<bool>) -> Self {
        let true_count = f.true_counts(&values);
        let mut unsat = Vec::new();
        let mut unsat_pos = vec![u32::MAX; true_count.len()];
        for (c, &t) in true_count.iter().enumerate() {
            if t == 0 {
                unsat_pos[c] = unsat.len() as u32;
                unsat.push(c as u32);
            }
        }
        State {
            f,
            values,
            true_count,
            unsat,
            unsat_pos,
        }
    }

    /// Clauses that would become unsatisfied if `v` flipped.
    #[inline]
    fn break_count(&self, v: usize) -> u32 {
        let val = self.values[v];
        self.f
            .occurrences(v)
            .iter()
            .filter(|&&o| {
                let (c, neg) = FlatCnf::unpack(o);
                val != neg && self.true_count[c] == 1
            })
            .count() as u32
    }

    fn flip(&mut self, v: usize) {
        let was = self.values[v];
        self.values[v] = !was;
        for &o in self.f.occurrences(v) {
            let (c, neg) = FlatCnf::unpack(o);
            if was != neg {
                self.true_count[c] -= 1;
                if self.true_count[c] == 0 {
                    self.unsat_pos[c] = self.unsat.len() as u32;
                    self.unsat.push(c as u32);
                }
            } else {
                self.true_count[c] += 1;
                if self.true_count[c] == 1 {
                    let pos = self.unsat_pos[c] as usize;
                    let last = *self.unsat.last().unwrap();
                    self.unsat.swap_remove(pos);
                    if last as usize != c {
                        self.unsat_pos[last as usize] = pos as u32;
                    }
                    self.unsat_pos[c] = u32::MAX;
                }
            }
        }
    }
}

/// WalkSAT with break-count selection.
///
/// Each step picks a uniformly random unsatisfied clause. With probability
/// `noise` a uniformly random literal of it is flipped, otherwise the
/// literal with the fewest breaks, ties broken uniformly.
pub fn walksat_solve(f: &Cnf, budget: SolverBudget, noise: f64) -> Result<SolverReport> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Parameter(format!("noise {noise} outside [0, 1]")));
    }
    if budget.max_steps == 0 {
        return Err(Error::Parameter("max_steps must be at least 1".into()));
    }
    let flat = FlatCnf::new(f);
    let k = flat.k;
    let mut steps_used = 0u64;
    let mut best_cost = usize::MAX;
    let mut ties: Vec<usize> = Vec::with_capacity(k);

    for restart in 0..=budget.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.rng_seed.wrapping_add(restart as u64));
        let values = random_values(&mut rng, flat.n);
        let mut st = State::new(&flat, values);
        best_cost = best_cost.min(st.unsat.len());

        let mut steps = 0u64;
        while !st.unsat.is_empty() && steps < budget.max_steps {
            let c = st.unsat[rng.gen_range(0..st.unsat.len())] as usize;
            let lits = flat.clause(c);
            let v = if rng.gen_bool(noise) {
                lits[rng.gen_range(0..k)].0 as usize
            } else {
                ties.clear();
                let mut best = u32::MAX;
                for &(v, _) in lits {
                    let b = st.break_count(v as usize);
                    if b < best {
                        best = b;
                        ties.clear();
                    }
                    if b == best {
                        ties.push(v as usize);
                    }
                }
                if ties.len() == 1 {
                    ties[0]
                } else {
                    ties[rng.gen_range(0..ties.len())]
                }
            };
            st.flip(v);
            steps += 1;
            best_cost = best_cost.min(st.unsat.len());
        }
        steps_used += steps;

        if st.unsat.is_empty() {
            let a = Assignment::from_bools(&st.values);
            debug_assert_eq!(cost_sat(f, &a).ok(), Some(0));
            return Ok(SolverReport {
                solution: Some(a),
                steps_used,
                restarts_used: restart,
                final_cost: 0,
            });
        }
    }

    Ok(SolverReport {
        solution: None,
        steps_used,
        restarts_used: budget.max_restarts,
        final_cost: best_cost,
    })
}
