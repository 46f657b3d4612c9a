//! Formulas, assignments and their SAT / NAE semantics.
//!
//! Variables are 0-indexed. A [`Cnf`] has one fixed clause width; every
//! filter formula is a uniform k-CNF.

use std::fmt;

use crate::error::{Error, Result};

/// Largest variable count [`brute_force_nae_solutions`] will enumerate.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub const fn new(var: usize, negated: bool) -> Self {
        Literal { var, negated }
    }

    pub const fn pos(var: usize) -> Self {
        Literal::new(var, false)
    }

    pub const fn neg(var: usize) -> Self {
        Literal::new(var, true)
    }

    pub const fn complement(self) -> Self {
        Literal::new(self.var, !self.negated)
    }

    /// Truth value under `a`. Panics if `var` is out of range.
    #[inline]
    pub fn value(self, a: &Assignment) -> bool {
        a.get(self.var) != self.negated
    }

    /// 1-indexed signed DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Inverse of [`Literal::to_dimacs`]; `None` for 0.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 {
            return None;
        }
        Some(Literal::new(lit.unsigned_abs() as usize - 1, lit < 0))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A disjunction of literals over pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Rejects empty clauses and repeated variables (which also covers
    /// complementary pairs).
    pub fn new(lits: Vec<Literal>) -> Result<Self> {
        if lits.is_empty() {
            return Err(Error::Parameter(
                "clause must have at least one literal".into(),
            ));
        }
        for (i, a) in lits.iter().enumerate() {
            if lits[..i].iter().any(|b| b.var == a.var) {
                return Err(Error::Parameter(format!(
                    "variable x{} appears twice in a clause",
                    a.var
                )));
            }
        }
        Ok(Clause { lits })
    }

    /// Callers guarantee non-empty, distinct variables.
    pub(crate) fn from_distinct(lits: Vec<Literal>) -> Self {
        debug_assert!(Clause::new(lits.clone()).is_ok());
        Clause { lits }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn max_var(&self) -> usize {
        self.lits.iter().map(|l| l.var).max().unwrap_or(0)
    }

    /// Every literal negated, order preserved.
    pub fn complement(&self) -> Clause {
        Clause {
            lits: self.lits.iter().map(|l| l.complement()).collect(),
        }
    }

    fn check_range(&self, a: &Assignment) -> Result<()> {
        let max = self.max_var();
        if max >= a.len() {
            return Err(Error::Contract(format!(
                "clause references x{max} but the assignment has {} variables",
                a.len()
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn true_count(&self, a: &Assignment) -> usize {
        self.lits.iter().filter(|l| l.value(a)).count()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A uniform-width CNF formula over `num_vars` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    num_vars: usize,
    width: usize,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: usize, width: usize, clauses: Vec<Clause>) -> Result<Self> {
        if width == 0 {
            return Err(Error::Parameter("clause width must be at least 1".into()));
        }
        for (i, c) in clauses.iter().enumerate() {
            if c.width() != width {
                return Err(Error::Parameter(format!(
                    "clause {i} has width {} but the formula width is {width}",
                    c.width()
                )));
            }
            if c.max_var() >= num_vars {
                return Err(Error::Parameter(format!(
                    "clause {i} references x{} but the formula has {num_vars} variables",
                    c.max_var()
                )));
            }
        }
        Ok(Cnf {
            num_vars,
            width,
            clauses,
        })
    }

    pub fn empty(num_vars: usize, width: usize) -> Result<Self> {
        Cnf::new(num_vars, width, Vec::new())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause-to-variable ratio m/n.
    pub fn alpha(&self) -> f64 {
        self.clauses.len() as f64 / self.num_vars as f64
    }

    fn check_len(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.num_vars {
            return Err(Error::Contract(format!(
                "assignment has {} variables, formula has {}",
                a.len(),
                self.num_vars
            )));
        }
        Ok(())
    }
}

/// A truth assignment, bit-packed. Bit `i` is the value of `x_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    words: Vec<u64>,
    len: usize,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut a = Assignment::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            a.set(i, b);
        }
        a
    }

    /// Low `len` bits of `pattern`; bit `i` of the integer is `x_i`.
    pub fn from_index(pattern: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut a = Assignment::zeros(len);
        if len > 0 {
            a.words[0] = pattern & low_mask(len);
        }
        a
    }

    /// Parses a string of `0`/`1` characters, character `i` being `x_i`.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let mut a = Assignment::zeros(s.len());
        for (i, ch) in s.bytes().enumerate() {
            match ch {
                b'0' => {}
                b'1' => a.set(i, true),
                other => {
                    return Err(Error::Parameter(format!(
                        "invalid character {:?} at position {i} of assignment",
                        other as char
                    )))
                }
            }
        }
        Ok(a)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "variable {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "variable {i} out of range for length {}",
            self.len
        );
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    /// Global bit flip.
    pub fn complement(&self) -> Assignment {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            if !self.len.is_multiple_of(64) {
                *last &= low_mask(self.len % 64);
            }
        }
        Assignment {
            words,
            len: self.len,
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing bits. Panics on length mismatch.
    pub fn hamming(&self, other: &Assignment) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({})", self.to_bit_string())
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// True iff at least one literal of `c` is true under `a`.
pub fn eval_clause_sat(c: &Clause, a: &Assignment) -> Result<bool> {
    c.check_range(a)?;
    Ok(c.lits.iter().any(|l| l.value(a)))
}

/// True iff `c` has at least one true and at least one false literal
/// under `a`. Width-1 clauses are a contract violation.
pub fn eval_clause_nae(c: &Clause, a: &Assignment) -> Result<bool> {
    if c.width() < 2 {
        return Err(Error::Contract(
            "NAE evaluation needs clauses of width at least 2".into(),
        ));
    }
    c.check_range(a)?;
    let t = c.true_count(a);
    Ok(t > 0 && t < c.width())
}

/// Number of clauses of `f` that `a` leaves NAE-unsatisfied.
pub fn cost_nae(f: &Cnf, a: &Assignment) -> Result<usize> {
    f.check_len(a)?;
    if f.clauses.is_empty() {
        return Ok(0);
    }
    if f.width < 2 {
        return Err(Error::Contract(
            "NAE evaluation needs clauses of width at least 2".into(),
        ));
    }
    let k = f.width;
    Ok(f.clauses
        .iter()
        .filter(|c| {
            let t = c.true_count(a);
            t == 0 || t == k
        })
        .count())
}

/// Number of clauses of `f` with no true literal under `a`.
pub fn cost_sat(f: &Cnf, a: &Assignment) -> Result<usize> {
    f.check_len(a)?;
    Ok(f.clauses.iter().filter(|c| c.true_count(a) == 0).count())
}

fn enumerate(f: &Cnf, keep: impl Fn(&Assignment) -> bool) -> Result<Vec<Assignment>> {
    let n = f.num_vars;
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::BruteForceCap {
            n,
            cap: BRUTE_FORCE_MAX_VARS,
        });
    }
    Ok((0..1u64 << n)
        .map(|p| Assignment::from_index(p, n))
        .filter(|a| keep(a))
        .collect())
}

/// Every zero-cost NAE assignment of `f`, in ascending order of the bit
/// pattern read as an integer with `x_0` least significant.
pub fn brute_force_nae_solutions(f: &Cnf) -> Result<Vec<Assignment>> {
    if !f.clauses.is_empty() && f.width < 2 {
        return Err(Error::Contract(
            "NAE evaluation needs clauses of width at least 2".into(),
        ));
    }
    enumerate(f, |a| matches!(cost_nae(f, a), Ok(0)))
}

/// Plain SAT counterpart of [`brute_force_nae_solutions`].
pub fn brute_force_sat_solutions(f: &Cnf) -> Result<Vec<Assignment>> {
    enumerate(f, |a| matches!(cost_sat(f, a), Ok(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clause(lits: &[i64]) -> Clause {
        Clause::new(
            lits.iter()
                .map(|&l| Literal::from_dimacs(l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn bits(s: &str) -> Assignment {
        Assignment::from_bit_str(s).unwrap()
    }

    #[test]
    fn sat_examples() {
        let c = clause(&[1, 2]);
        assert!(eval_clause_sat(&c, &bits("10")).unwrap());
        assert!(!eval_clause_sat(&c, &bits("00")).unwrap());

        // (x3 ∨ x18 ∨ ¬x12 ∨ x5) with x3 = 1
        let c = clause(&[4, 19, -13, 6]);
        let mut a = Assignment::zeros(19);
        a.set(3, true);
        a.set(12, true);
        assert!(eval_clause_sat(&c, &a).unwrap());
    }

    #[test]
    fn nae_examples() {
        let c = clause(&[1, 2]);
        assert!(!eval_clause_nae(&c, &bits("11")).unwrap());
        assert!(eval_clause_nae(&c, &bits("10")).unwrap());
        assert!(!eval_clause_nae(&c, &bits("00")).unwrap());
    }

    #[test]
    fn out_of_range_is_contract_violation() {
        let c = clause(&[1, 3]);
        assert!(matches!(
            eval_clause_sat(&c, &bits("11")),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            eval_clause_nae(&c, &bits("11")),
            Err(Error::Contract(_))
        ));
        let unit = clause(&[1]);
        assert!(matches!(
            eval_clause_nae(&unit, &bits("1")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn cost_examples() {
        let empty = Cnf::empty(3, 3).unwrap();
        assert_eq!(cost_nae(&empty, &bits("101")).unwrap(), 0);

        // clause 1 all-true, clause 2 mixed
        let f = Cnf::new(2, 2, vec![clause(&[1, 2]), clause(&[-1, 2])]).unwrap();
        assert_eq!(cost_nae(&f, &bits("11")).unwrap(), 1);

        let f = Cnf::new(2, 2, vec![clause(&[1, 2])]).unwrap();
        assert_eq!(cost_nae(&f, &bits("01")).unwrap(), 0);
        assert!(matches!(
            cost_nae(&f, &bits("011")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn brute_force_examples() {
        let f = Cnf::new(2, 2, vec![clause(&[1, 2])]).unwrap();
        let sols = brute_force_nae_solutions(&f).unwrap();
        assert_eq!(sols, vec![bits("10"), bits("01")]);

        let f = Cnf::empty(1, 2).unwrap();
        assert_eq!(
            brute_force_nae_solutions(&f).unwrap(),
            vec![bits("0"), bits("1")]
        );

        let f = Cnf::new(3, 3, vec![clause(&[1, 2, 3])]).unwrap();
        let sols = brute_force_nae_solutions(&f).unwrap();
        assert_eq!(sols.len(), 6);
        assert!(!sols.contains(&bits("000")));
        assert!(!sols.contains(&bits("111")));

        let f = Cnf::empty(25, 3).unwrap();
        assert!(matches!(
            brute_force_nae_solutions(&f),
            Err(Error::BruteForceCap { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn construction_rejects_bad_clauses() {
        assert!(Clause::new(vec![]).is_err());
        assert!(Clause::new(vec![Literal::pos(1), Literal::neg(1)]).is_err());
        assert!(Clause::new(vec![Literal::pos(1), Literal::pos(1)]).is_err());
        assert!(Cnf::new(2, 2, vec![clause(&[1, 3])]).is_err());
        assert!(Cnf::new(3, 2, vec![clause(&[1, 2, 3])]).is_err());
    }

    #[test]
    fn complement_clears_padding() {
        let a = Assignment::zeros(70).complement();
        assert_eq!(a.count_ones(), 70);
        assert_eq!(a.words()[1], 0x3f);
        assert_eq!(a.complement(), Assignment::zeros(70));
    }

    fn clause_and_assignment() -> impl Strategy<Value = (Clause, Assignment)> {
        (2usize..40).prop_flat_map(|n| {
            let lits = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=n.min(8))
                .prop_shuffle();
            (
                lits,
                proptest::collection::vec(any::<bool>(), n..=n),
                proptest::collection::vec(any::<bool>(), 8),
            )
                .prop_map(|(vars, a, signs)| {
                    let lits = vars
                        .iter()
                        .zip(signs)
                        .map(|(&v, s)| Literal::new(v, s))
                        .collect();
                    (Clause::new(lits).unwrap(), Assignment::from_bools(&a))
                })
        })
    }

    proptest! {
        #[test]
        fn nae_implies_sat((c, a) in clause_and_assignment()) {
            if eval_clause_nae(&c, &a).unwrap() {
                prop_assert!(eval_clause_sat(&c, &a).unwrap());
            }
        }

        #[test]
        fn nae_is_complement_invariant((c, a) in clause_and_assignment()) {
            prop_assert_eq!(
                eval_clause_nae(&c, &a).unwrap(),
                eval_clause_nae(&c, &a.complement()).unwrap()
            );
        }

        #[test]
        fn brute_force_closed_under_complement(
            n in 3usize..10,
            raw in proptest::collection::vec((0usize..1000, 0usize..1000, 0usize..1000, 0u8..8), 0..12),
        ) {
            let clauses: Vec<Clause> = raw
                .into_iter()
                .filter_map(|(a, b, c, s)| {
                    let vars = [a % n, b % n, c % n];
                    Clause::new(
                        vars.iter()
                            .enumerate()
                            .map(|(i, &v)| Literal::new(v, (s >> i) & 1 == 1))
                            .collect(),
                    )
                    .ok()
                })
                .collect();
            let m = clauses.len();
            let f = Cnf::new(n, 3, clauses).unwrap();
            let sols = brute_force_nae_solutions(&f).unwrap();
            for s in &sols {
                prop_assert!(sols.contains(&s.complement()));
                let cost = cost_nae(&f, s).unwrap();
                prop_assert_eq!(cost, 0);
            }
            let all_zero = Assignment::zeros(n);
            let cost = cost_nae(&f, &all_zero).unwrap();
            prop_assert!(cost <= m);
            let manual = f.clauses().iter().filter(|c| !eval_clause_nae(c, &all_zero).unwrap()).count();
            prop_assert_eq!(cost, manual);
        }
    }
}
