use std::fmt;

use thiserror::Error;

use crate::cnf::Assignment;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (index out of range,
    /// length mismatch, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A value outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimacs parse error at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    /// Filter file failed validation; the message names the failed check.
    #[error("filter format error: {0}")]
    Format(String),

    #[error("brute force refused: n = {n} exceeds the cap of {cap} variables")]
    BruteForceCap { n: usize, cap: usize },

    #[error("{0}")]
    Solver(Box<PartialCollection>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Diagnostics for a solution collection that ran out of budget.
#[derive(Debug, Clone)]
pub struct PartialCollection {
    pub solutions: Vec<Assignment>,
    pub requested: usize,
    pub attempts: usize,
    pub steps_used: u64,
    pub best_cost: usize,
    pub alpha: f64,
}

impl fmt::Display for PartialCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "solver failure: found {} of {} solutions (alpha = {:.4}, {} solve attempts, {} steps, best cost {})",
            self.solutions.len(),
            self.requested,
            self.alpha,
            self.attempts,
            self.steps_used,
            self.best_cost
        )
    }
}
