//! Relation files: identities between fields written in the expression grammar.
//!
//! One term per line. Lines above a line holding only `=` form the left side,
//! lines below it the right side; without `=` the right side is zero. Blank
//! lines and lines starting with `#` are ignored.

use crate::algebras::Catalog;
use crate::expr::{parse_expression, Expr, ExprKind, Value};
use crate::scalars::{ParseError, RatFuncL};
use crate::vertex::FieldExpr;

/// The weight-8 relation among T, J and U[0,0..5].
pub const WEIGHT8: &str = include_str!("../data/relations/weight8.rel");
/// U[0,1] in terms of the other generators of the charge-zero part of bp ⊗ bc,
/// as printed, with a quartic `:J J J J:` term.
pub const U01_TENSOR: &str = include_str!("../data/relations/u01.rel");
/// The same relation with the quartic term read as `:JE JE JE JE:`.
pub const U01_TENSOR_AMENDED: &str = include_str!("../data/relations/u01_amended.rel");

/// Names accepted by [`builtin`], with the algebra each relation lives in.
pub const BUILTINS: [(&str, &str); 3] = [("weight8", "bp"), ("u01", "bp-bc"), ("u01-amended", "bp-bc")];

/// Looks up a shipped relation by name.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "weight8" => Some(WEIGHT8),
        "u01" => Some(U01_TENSOR),
        "u01-amended" => Some(U01_TENSOR_AMENDED),
        _ => None,
    }
}

/// A term with its source line (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct TermLine {
    pub line: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Relation {
    pub lhs: Vec<TermLine>,
    pub rhs: Vec<TermLine>,
}

impl Relation {
    pub fn parse(text: &str) -> Relation {
        let mut rel = Relation::default();
        let mut right = false;
        for (i, raw) in text.lines().enumerate() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if t == "=" {
                right = true;
                continue;
            }
            let term = TermLine { line: i + 1, text: t.to_string() };
            if right {
                rel.rhs.push(term);
            } else {
                rel.lhs.push(term);
            }
        }
        rel
    }

    /// Terms moved to one side: left terms as written, right terms negated.
    pub fn signed_terms(&self) -> impl Iterator<Item = (&TermLine, bool)> {
        self.lhs.iter().map(|t| (t, false)).chain(self.rhs.iter().map(|t| (t, true)))
    }

    /// Normal form of left side minus right side; zero iff the relation holds.
    pub fn residual(&self, catalog: &Catalog) -> Result<FieldExpr, ParseError> {
        let mut out = FieldExpr::zero();
        for (t, negate) in self.signed_terms() {
            let f = catalog.field(&t.text).map_err(|e| relocate(e, t.line))?;
            out = if negate { &out - &f } else { &out + &f };
        }
        Ok(out)
    }
}

fn relocate(mut e: ParseError, line: usize) -> ParseError {
    e.line = line;
    e
}

/// A term split into its scalar coefficient and the normal form of its field part.
#[derive(Debug, Clone)]
pub struct SplitTerm {
    pub coefficient: RatFuncL,
    pub field: FieldExpr,
}

/// Splits `c*X`, `-X`, `X/c` and nested combinations into (c, normal form of X).
pub fn split_term(catalog: &Catalog, text: &str) -> Result<SplitTerm, ParseError> {
    let ast = parse_expression(text, catalog)?;
    let (c, f) = split(&ast, text, catalog)?;
    Ok(SplitTerm { coefficient: c, field: f })
}

fn split(e: &Expr, text: &str, catalog: &Catalog) -> Result<(RatFuncL, FieldExpr), ParseError> {
    let engine = catalog.engine();
    let eval = |x: &Expr| x.eval(text, engine, catalog);
    match &e.kind {
        ExprKind::Neg(a) => {
            let (c, f) = split(a, text, catalog)?;
            Ok((-c, f))
        }
        ExprKind::Mul(a, b) => match eval(a)? {
            Value::Scalar(s) => {
                let (c, f) = split(b, text, catalog)?;
                Ok((s * c, f))
            }
            Value::Field(_) => {
                let s = match eval(b)? {
                    Value::Scalar(s) => s,
                    Value::Field(f) => return Ok((RatFuncL::one(), f)),
                };
                let (c, f) = split(a, text, catalog)?;
                Ok((c * s, f))
            }
        },
        ExprKind::Div(a, b) => {
            let (c, f) = split(a, text, catalog)?;
            match eval(b)? {
                Value::Scalar(s) if !s.is_zero() => Ok((c / s, f)),
                _ => Err(ParseError::at(text, b.span.0, "expected a nonzero scalar divisor")),
            }
        }
        _ => match eval(e)? {
            Value::Scalar(s) => Ok((s, FieldExpr::vacuum())),
            Value::Field(f) => Ok((RatFuncL::one(), f)),
        },
    }
}

/// One disagreement found by [`diff_terms`].
#[derive(Debug, Clone, PartialEq)]
pub enum TermMismatch {
    /// A listed term whose field matches no expected term.
    Unexpected { line: usize, text: String },
    /// Same field, different coefficient.
    Coefficient { line: usize, text: String, listed: RatFuncL, expected: RatFuncL },
    /// An expected term absent from the list (index into `expected`).
    Missing { index: usize, coefficient: RatFuncL },
}

/// Compares listed terms against expected (coefficient, field) pairs, matching
/// terms by equality of their field parts. An empty result means the two sums
/// agree term by term.
pub fn diff_terms(
    catalog: &Catalog,
    listed: &[(&TermLine, bool)],
    expected: &[(RatFuncL, FieldExpr)],
) -> Result<Vec<TermMismatch>, ParseError> {
    let mut out = Vec::new();
    let mut used = vec![false; expected.len()];
    for (t, negate) in listed {
        let s = split_term(catalog, &t.text).map_err(|e| relocate(e, t.line))?;
        let c = if *negate { -s.coefficient } else { s.coefficient };
        match expected.iter().position(|(_, f)| f == &s.field) {
            Some(k) if !used[k] => {
                used[k] = true;
                if c != expected[k].0 {
                    out.push(TermMismatch::Coefficient {
                        line: t.line,
                        text: t.text.clone(),
                        listed: c,
                        expected: expected[k].0.clone(),
                    });
                }
            }
            _ => out.push(TermMismatch::Unexpected { line: t.line, text: t.text.clone() }),
        }
    }
    for (k, u) in used.iter().enumerate() {
        if !u {
            out.push(TermMismatch::Missing { index: k, coefficient: expected[k].0.clone() });
        }
    }
    Ok(out)
}
