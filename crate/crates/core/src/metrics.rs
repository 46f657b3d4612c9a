//! Closed-form false-positive rates and efficiencies, empirical FPR
//! estimation and solution-diversity statistics.

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cnf::Assignment;
use crate::error::{Error, Result};
use crate::solvers::splitmix64;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Trials per independently seeded shard of [`measure_fpr`].
const SHARD_TRIALS: u64 = 1 << 15;

/// Anything answering membership queries on byte-string keys.
pub trait MembershipQuery: Sync {
    fn contains(&self, key: &[u8]) -> bool;
}

fn check_s(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::Domain("solution count s must be at least 1".into()));
    }
    Ok(())
}

/// `(1 - 2^-k)^s`, the FPR of a plain SAT filter with `s` independent
/// solutions.
pub fn fpr_theory_sat(k: usize, s: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("clause width k must be at least 1".into()));
    }
    check_s(s)?;
    Ok((s as f64 * (-(0.5f64.powi(k as i32))).ln_1p()).exp())
}

/// `(1 - 2^(1-k))^s`, the FPR of a NAE filter with `s` independent
/// solutions.
pub fn fpr_theory_nae(k: usize, s: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("NAE needs k >= 2, got {k}")));
    }
    fpr_theory_sat(k - 1, s)
}

/// `-log2(fpr) / (s n / m)`: information per stored bit per key.
pub fn efficiency(fpr: f64, n: usize, s: usize, m: usize) -> Result<f64> {
    if !(fpr > 0.0 && fpr < 1.0) {
        return Err(Error::Domain(format!(
            "false-positive rate {fpr} outside (0, 1)"
        )));
    }
    if n == 0 || s == 0 || m == 0 {
        return Err(Error::Domain("n, s and m must all be at least 1".into()));
    }
    Ok(-fpr.log2() / (s as f64 * n as f64 / m as f64))
}

/// Closed-form NAE efficiency `-log2(1 - 2^(1-k)) / (n / m)`; independent
/// of `s`.
pub fn efficiency_theory_nae(k: usize, n: usize, m: usize) -> Result<f64> {
    efficiency(fpr_theory_nae(k, 1)?, n, 1, m)
}

/// Clause density at which the closed-form NAE efficiency reaches 1. Above
/// it the expected number of NAE solutions of a random formula vanishes.
pub fn alpha_ceiling(k: usize) -> f64 {
    let per_clause = -(-(0.5f64.powi(k as i32 - 1))).ln_1p() / std::f64::consts::LN_2;
    1.0 / per_clause
}

/// Smallest `s` whose closed-form FPR is at most `target`.
pub fn required_solutions(k: usize, target: f64, nae: bool) -> Result<usize> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target FPR {target} outside (0, 1)")));
    }
    let fpr = |s: usize| {
        if nae {
            fpr_theory_nae(k, s)
        } else {
            fpr_theory_sat(k, s)
        }
    };
    let per = fpr(1)?;
    let mut s = (target.ln() / per.ln()).ceil().max(1.0) as usize;
    while s > 1 && fpr(s - 1)? <= target {
        s -= 1;
    }
    while fpr(s)? > target {
        s += 1;
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FprEstimate {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub stderr: f64,
    /// 95% Wilson score interval.
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl FprEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        let (ci_lo, ci_hi) = wilson_interval(hits, trials, Z_95);
        FprEstimate {
            trials,
            hits,
            estimate: p,
            stderr,
            ci_lo,
            ci_hi,
        }
    }

    pub fn ci_half_width(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / 2.0
    }
}

pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Fraction of `trials` uniform random 64-bit keys (little-endian bytes)
/// outside `members` that `filter` reports as present.
///
/// Trials are split into fixed-size shards with seeds derived from
/// `rng_seed`, so the estimate does not depend on the thread count.
pub fn measure_fpr<Q: MembershipQuery + ?Sized>(
    filter: &Q,
    trials: u64,
    rng_seed: u64,
    members: &HashSet<u64>,
) -> FprEstimate {
    let shards = trials.div_ceil(SHARD_TRIALS);
    let hits: u64 = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = SHARD_TRIALS.min(trials - shard * SHARD_TRIALS);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(rng_seed ^ splitmix64(shard)));
            let mut hits = 0u64;
            for _ in 0..count {
                let key = loop {
                    let k: u64 = rng.gen();
                    if !members.contains(&k) {
                        break k;
                    }
                };
                hits += filter.contains(&key.to_le_bytes()) as u64;
            }
            hits
        })
        .sum();
    FprEstimate::from_counts(hits, trials)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HammingStats {
    pub pairs: usize,
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    /// Mean of `min(d, n - d)`, the distance up to global complement.
    pub folded_mean: f64,
}

/// Pairwise Hamming distances over all unordered pairs.
pub fn hamming_stats(solutions: &[Assignment]) -> Result<HammingStats> {
    if solutions.len() < 2 {
        return Err(Error::Contract("need at least two solutions".into()));
    }
    let n = solutions[0].len();
    if solutions.iter().any(|a| a.len() != n) {
        return Err(Error::Contract("solutions have different lengths".into()));
    }
    let mut pairs = 0usize;
    let mut sum = 0usize;
    let mut folded = 0usize;
    let mut min = usize::MAX;
    let mut max = 0usize;
    for i in 0..solutions.len() {
        for j in 0..i {
            let d = solutions[i].hamming(&solutions[j]);
            pairs += 1;
            sum += d;
            folded += d.min(n - d);
            min = min.min(d);
            max = max.max(d);
        }
    }
    Ok(HammingStats {
        pairs,
        mean: sum as f64 / pairs as f64,
        min,
        max,
        folded_mean: folded as f64 / pairs as f64,
    })
}

/// One line of FPR benchmark output.
#[derive(Clone, Debug, PartialEq)]
pub struct FprRow {
    pub k: usize,
    pub s: usize,
    pub n: usize,
    pub m: usize,
    pub fpr_theory: f64,
    pub measured: FprEstimate,
    /// Efficiency at the measured FPR; NaN when the estimate is 0 or 1.
    pub efficiency: f64,
    pub hash_mode: String,
}

impl FprRow {
    pub fn new(
        k: usize,
        s: usize,
        n: usize,
        m: usize,
        measured: FprEstimate,
        hash_mode: String,
    ) -> Self {
        FprRow {
            k,
            s,
            n,
            m,
            fpr_theory: fpr_theory_nae(k, s).unwrap_or(f64::NAN),
            efficiency: efficiency(measured.estimate, n, s, m).unwrap_or(f64::NAN),
            measured,
            hash_mode,
        }
    }
}

pub const CSV_HEADER: &str = "k,s,n,m,fpr_theory,fpr_measured,ci_lo,ci_hi,efficiency,hash_mode";

/// Formats to 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.5e}", x);
    // normalise through f64 so 2.50000e-1 prints as 0.25
    let v: f64 = s.parse().unwrap();
    format!("{v}")
}

/// Writes a `#` parameter comment line, the header and one row per entry.
pub fn write_fpr_csv<W: Write>(mut w: W, comment: &str, rows: &[FprRow]) -> std::io::Result<()> {
    writeln!(w, "# {comment}")?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.s,
            r.n,
            r.m,
            sig6(r.fpr_theory),
            sig6(r.measured.estimate),
            sig6(r.measured.ci_lo),
            sig6(r.measured.ci_hi),
            sig6(r.efficiency),
            r.hash_mode
        )?;
    }
    Ok(())
}
