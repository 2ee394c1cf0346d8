//! Exact arithmetic in ℚ(ℓ) and exact linear algebra over it.
//!
//! [`PolyL`] is a univariate polynomial with rational coefficients, [`RatFuncL`]
//! a reduced quotient of two of them. Both print and parse in a small text
//! syntax (`(2*l)/3`, `l*(2*l-1)`). [`solve_linear`] solves systems over ℚ(ℓ)
//! by fraction-free elimination in ℚ[ℓ].

mod factor;
mod linsolve;
mod parse;
mod poly;
mod ratfunc;

pub use factor::{factor_with_candidates, is_supported_on, PolyFactor};
pub use linsolve::{solve_linear, solve_sparse, LinearSolution, Outcome, SparseRow};
pub use poly::PolyL;
pub use ratfunc::{rat, RatFuncL};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at l = {value}: denominator factor {factor} vanishes (denominator {denominator})")]
    Pole { value: String, factor: String, denominator: String },
}

/// A syntax error with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    /// Builds an error located at byte offset `offset` of `text`.
    pub fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
        ParseError { line, column, message: message.into() }
    }
}
