//! Parallel tempering Monte Carlo on the NAE cost function.
//!
//! Energy is the number of NAE-violated clauses. Every replica sits at one
//! inverse temperature of the ladder. A step is one sequential Metropolis
//! sweep over all variables of every replica, followed by one swap pass
//! over adjacent ladder pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_values, FlatCnf, SolverBudget, SolverReport};
use crate::cnf::{cost_nae, Assignment, Cnf};
use crate::error::{Error, Result};

/// Strictly increasing inverse temperatures, at least two of them.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureLadder {
    betas: Vec<f64>,
}

impl TemperatureLadder {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 {
            return Err(Error::Parameter(
                "temperature ladder needs at least 2 rungs".into(),
            ));
        }
        if betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::Parameter(
                "inverse temperatures must be finite and >= 0".into(),
            ));
        }
        if betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "inverse temperatures must be strictly increasing".into(),
            ));
        }
        Ok(TemperatureLadder { betas })
    }

    /// `count` rungs spaced geometrically from `lo` to `hi`.
    pub fn geometric(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || lo <= 0.0 || hi <= lo {
            return Err(Error::Parameter(format!(
                "geometric ladder needs 0 < lo < hi and count >= 2 (lo = {lo}, hi = {hi}, count = {count})"
            )));
        }
        let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
        let mut betas: Vec<f64> = (0..count).map(|i| lo * ratio.powi(i as i32)).collect();
        betas[count - 1] = hi;
        TemperatureLadder::new(betas)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }
}

impl Default for TemperatureLadder {
    /// 16 rungs, beta from 0.1 to 5.0.
    fn default() -> Self {
        TemperatureLadder::geometric(0.1, 5.0, 16).unwrap()
    }
}

/// Metropolis acceptance for exchanging the states at `beta_i` and `beta_j`
/// with energies `e_i` and `e_j`.
pub fn swap_acceptance(beta_i: f64, beta_j: f64, e_i: usize, e_j: usize) -> f64 {
    let x = (beta_i - beta_j) * (e_i as f64 - e_j as f64);
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

struct Replica {
    values: Vec<bool>,
    true_count: Vec<u8>,
    energy: usize,
}

impl Replica {
    fn new(f: &FlatCnf, values: Vec<bool>) -> Self {
        let true_count: Vec<u8> = f
            .true_counts(&values)
            .into_iter()
            .map(|t| t as u8)
            .collect();
        let k = f.k as u8;
        let energy = true_count.iter().filter(|&&t| t == 0 || t == k).count();
        Replica {
            values,
            true_count,
            energy,
        }
    }

    /// Energy change from flipping `v`, via `table[t << 1 | lit_true]`.
    #[inline]
    fn delta(&self, f: &FlatCnf, table: &[i8], v: usize) -> i64 {
        let val = self.values[v] as u32;
        let mut d = 0i64;
        for &o in f.occurrences(v) {
            let t = self.true_count[(o >> 1) as usize] as usize;
            let lit_true = (val ^ (o & 1)) as usize;
            d += table[t << 1 | lit_true] as i64;
        }
        d
    }

    #[inline]
    fn flip(&mut self, f: &FlatCnf, v: usize, delta: i64) {
        let val = self.values[v];
        self.values[v] = !val;
        for &o in f.occurrences(v) {
            let (c, neg) = FlatCnf::unpack(o);
            let t = &mut self.true_count[c];
            if val != neg {
                *t -= 1;
            } else {
                *t += 1;
            }
        }
        self.energy = (self.energy as i64 + delta) as usize;
    }

    fn sweep<R: Rng>(&mut self, f: &FlatCnf, table: &[i8], accept: &[f64], rng: &mut R) {
        for v in 0..f.n {
            let d = self.delta(f, table, v);
            let ok = d <= 0 || {
                let p = accept.get(d as usize).copied().unwrap_or(0.0);
                p > 0.0 && rng.gen::<f64>() < p
            };
            if ok {
                self.flip(f, v, d);
            }
        }
    }
}

/// Change in NAE violation of one clause when one literal flips, indexed
/// by `true_count << 1 | literal_was_true`.
fn delta_table(k: usize) -> Vec<i8> {
    let bad = |t: usize| (t == 0 || t == k) as i8;
    let mut table = vec![0i8; 2 * (k + 1)];
    for t in 0..=k {
        if t < k {
            table[t << 1] = bad(t + 1) - bad(t);
        }
        if t > 0 {
            table[t << 1 | 1] = bad(t - 1) - bad(t);
        }
    }
    table
}

/// Minimises the NAE cost of `f` by parallel tempering. One step is one
/// sweep plus one swap pass.
pub fn pt_solve(f: &Cnf, budget: SolverBudget, ladder: &TemperatureLadder) -> Result<SolverReport> {
    if f.num_clauses() > 0 && f.width() < 2 {
        return Err(Error::Parameter("NAE cost needs clause width >= 2".into()));
    }
    if f.width() > u8::MAX as usize {
        return Err(Error::Parameter(format!(
            "clause width {} above 255",
            f.width()
        )));
    }
    if budget.max_steps == 0 {
        return Err(Error::Parameter("max_steps must be at least 1".into()));
    }
    let flat = FlatCnf::new(f);
    let betas = ladder.betas();
    let max_degree = (0..flat.n)
        .map(|v| flat.occurrences(v).len())
        .max()
        .unwrap_or(0);
    // accept[r][d] = exp(-beta_r * d)
    let accept: Vec<Vec<f64>> = betas
        .iter()
        .map(|b| (0..=max_degree).map(|d| (-b * d as f64).exp()).collect())
        .collect();

    let table = delta_table(flat.k);

    let mut steps_used = 0u64;
    let mut best_cost = usize::MAX;

    for restart in 0..=budget.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.rng_seed.wrapping_add(restart as u64));
        let mut replicas: Vec<Replica> = (0..betas.len())
            .map(|_| Replica::new(&flat, random_values(&mut rng, flat.n)))
            .collect();
        // slot[r] = replica currently at rung r
        let mut slot: Vec<usize> = (0..betas.len()).collect();

        let mut found = replicas.iter().position(|r| r.energy == 0);
        best_cost = best_cost.min(replicas.iter().map(|r| r.energy).min().unwrap_or(0));
        let mut steps = 0u64;
        while found.is_none() && steps < budget.max_steps {
            for (rung, &idx) in slot.iter().enumerate() {
                replicas[idx].sweep(&flat, &table, &accept[rung], &mut rng);
            }
            steps += 1;
            found = replicas.iter().position(|r| r.energy == 0);
            best_cost = best_cost.min(replicas.iter().map(|r| r.energy).min().unwrap_or(0));
            if found.is_some() {
                break;
            }
            for r in 0..betas.len() - 1 {
                let (a, b) = (slot[r], slot[r + 1]);
                let p = swap_acceptance(
                    betas[r],
                    betas[r + 1],
                    replicas[a].energy,
                    replicas[b].energy,
                );
                if p >= 1.0 || rng.gen::<f64>() < p {
                    slot.swap(r, r + 1);
                }
            }
        }
        steps_used += steps;

        if let Some(idx) = found {
            let a = Assignment::from_bools(&replicas[idx].values);
            debug_assert_eq!(cost_nae(f, &a).ok(), Some(0));
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
