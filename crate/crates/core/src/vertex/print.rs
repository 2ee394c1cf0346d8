use std::fmt;

use super::{AlgebraPresentation, FieldExpr, Letter, Monomial};
use num_traits::Signed;

use crate::scalars::RatFuncL;

/// Formats a field in the expression grammar. Created by [`FieldExpr::display`].
pub struct DisplayField<'a> {
    pub(super) expr: &'a FieldExpr,
    pub(super) alg: &'a AlgebraPresentation,
}

fn write_letter(f: &mut impl fmt::Write, alg: &AlgebraPresentation, l: Letter, inside: bool) -> fmt::Result {
    let name = &alg.generator(l.gen as usize).name;
    match (l.deriv, inside) {
        (0, _) => f.write_str(name),
        (1, false) => write!(f, "d {name}"),
        (1, true) => write!(f, "(d {name})"),
        (k, false) => write!(f, "d^{k} {name}"),
        (k, true) => write!(f, "(d^{k} {name})"),
    }
}

pub(crate) fn write_monomial(f: &mut impl fmt::Write, alg: &AlgebraPresentation, m: &Monomial) -> fmt::Result {
    match m.letters() {
        [] => f.write_str("1"),
        [l] => write_letter(f, alg, *l, false),
        ls => {
            f.write_char(':')?;
            for (i, l) in ls.iter().enumerate() {
                if i > 0 {
                    f.write_char(' ')?;
                }
                write_letter(f, alg, *l, true)?;
            }
            f.write_char(':')
        }
    }
}

/// A `+` or `-` outside parentheses after the first character.
fn coefficient_needs_parens(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if i > 0 && depth == 0 => return true,
            _ => {}
        }
    }
    false
}

/// Writes `c*body` (or just `c` when `body` is `None`) with the sign pulled out;
/// returns whether a sign was pulled out. A bare sum like `-2*l^2+l` keeps its sign.
pub(crate) fn format_term(c: &RatFuncL, body: Option<&str>) -> (bool, String) {
    let neg = c.numer().leading().is_negative();
    let mut s = if neg { (-c).to_string() } else { c.to_string() };
    let Some(body) = body else {
        return if coefficient_needs_parens(&s) { (false, c.to_string()) } else { (neg, s) };
    };
    if coefficient_needs_parens(&s) {
        s = format!("({s})");
    }
    if s == "1" {
        (neg, body.to_string())
    } else {
        (neg, format!("{s}*{body}"))
    }
}

/// Joins signed terms as `a + b - c`; the empty sum is `0`.
pub(crate) fn join_terms(terms: impl IntoIterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (i, (neg, t)) in terms.into_iter().enumerate() {
        match (i, neg) {
            (0, false) => out.push_str(&t),
            (0, true) => {
                out.push('-');
                out.push_str(&t)
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&t)
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&t)
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for DisplayField<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.expr.iter().map(|(m, c)| {
            if m.is_vacuum() {
                format_term(c, None)
            } else {
                let mut body = String::new();
                write_monomial(&mut body, self.alg, m).unwrap();
                format_term(c, Some(&body))
            }
        });
        f.write_str(&join_terms(terms))
    }
}

impl FieldExpr {
    /// Plain-text rendering; shorthand for `format!("{}", self.display(alg))`.
    pub fn to_text(&self, alg: &AlgebraPresentation) -> String {
        self.display(alg).to_string()
    }
}
