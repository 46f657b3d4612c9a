//! DIMACS CNF text format.
//!
//! Variables are 1-indexed in the text and 0-indexed in [`Cnf`]. Lines
//! starting with `c` are comments. The writer records the clause width in a
//! `c width K` comment so that empty formulas round-trip too; the reader
//! honours it only when the formula has no clauses.

use std::fmt::Write as _;

use crate::cnf::{Clause, Cnf, Literal};
use crate::error::{Error, Result};

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Dimacs {
        line,
        msg: msg.into(),
    }
}

pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut header: Option<(usize, usize)> = None;
    let mut width_hint: Option<usize> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if let Some(w) = rest.trim().strip_prefix("width ") {
                width_hint = w.trim().parse().ok();
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(line_no, format!("malformed problem line {line:?}")));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| err(line_no, format!("invalid variable count {:?}", parts[2])))?;
            let m = parts[3]
                .parse()
                .map_err(|_| err(line_no, format!("invalid clause count {:?}", parts[3])))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(err(line_no, "clause data before the problem line"));
        };
        if line.starts_with('%') {
            // SATLIB trailer
            break;
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(line_no, format!("invalid literal {tok:?}")))?;
            if current.is_empty() {
                clause_start = line_no;
            }
            match Literal::from_dimacs(lit) {
                None => {
                    let lits = std::mem::take(&mut current);
                    let clause = Clause::new(lits).map_err(|e| err(clause_start, e.to_string()))?;
                    clauses.push(clause);
                }
                Some(l) if l.var >= n => {
                    return Err(err(
                        line_no,
                        format!("literal {lit} out of range for {n} variables"),
                    ));
                }
                Some(l) => current.push(l),
            }
        }
    }

    let Some((n, m)) = header else {
        return Err(err(last_line.max(1), "missing problem line"));
    };
    if !current.is_empty() {
        return Err(err(clause_start, "unterminated clause"));
    }
    if clauses.len() != m {
        return Err(err(
            last_line.max(1),
            format!(
                "header declares {m} clauses but {} were read",
                clauses.len()
            ),
        ));
    }
    let width = match clauses.first() {
        Some(c) => c.width(),
        None => width_hint.unwrap_or(1),
    };
    if let Some((i, c)) = clauses.iter().enumerate().find(|(_, c)| c.width() != width) {
        return Err(err(
            last_line.max(1),
            format!(
                "mixed clause widths: clause {i} has {} literals, expected {width}",
                c.width()
            ),
        ));
    }
    Cnf::new(n, width, clauses).map_err(|e| err(last_line.max(1), e.to_string()))
}

pub fn write_dimacs(f: &Cnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "c width {}", f.width());
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        for l in c.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_formula() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.clauses().len(), 1);
        assert_eq!(
            f.clauses()[0].literals(),
            &[Literal::pos(0), Literal::neg(1)]
        );
    }

    #[test]
    fn penalty_pair_round_trips() {
        let text = "c example\np cnf 19 2\n4 19 -13 6 0\n-4 -19 13 -6 0\n";
        let f = parse_dimacs(text).unwrap();
        assert_eq!(parse_dimacs(&write_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse_dimacs("p cnf 3 2\n1 2\n 3 0 -1 -2\n-3 0\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_dimacs("p cnf 1 1\n2 0\n") {
            Err(Error::Dimacs { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_dimacs("c hi\np cnf x 1\n") {
            Err(Error::Dimacs { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_dimacs("p cnf 2 1\n1\n2\n") {
            Err(Error::Dimacs { line: 2, msg }) => assert!(msg.contains("unterminated")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 3 2\n1 2 0\n1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 -1 0\n").is_err());
    }

    #[test]
    fn empty_formula_keeps_width() {
        let f = Cnf::empty(7, 4).unwrap();
        assert_eq!(parse_dimacs(&write_dimacs(&f)).unwrap(), f);
    }

    proptest! {
        #[test]
        fn round_trip_identity(
            n in 5usize..50,
            k in 1usize..5,
            seeds in proptest::collection::vec(any::<u64>(), 0..30),
        ) {
            let clauses = seeds
                .iter()
                .map(|&s| {
                    let mut vars: Vec<usize> = Vec::new();
                    let mut x = s;
                    while vars.len() < k {
                        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        let v = (x >> 33) as usize % n;
                        if !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                    Clause::new(
                        vars.iter().enumerate().map(|(i, &v)| Literal::new(v, (s >> i) & 1 == 1)).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let f = Cnf::new(n, k, clauses).unwrap();
            prop_assert_eq!(parse_dimacs(&write_dimacs(&f)).unwrap(), f);
        }
    }
}
