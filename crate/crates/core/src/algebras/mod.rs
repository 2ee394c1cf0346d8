//! Concrete presentations and the catalog of named composite fields.
//!
//! Presentations are loaded from `.alg` text files:
//!
//! ```text
//! name bp
//! [gen] T 2 even 0
//! [gen] G+ 3/2 even 1 filtered
//! [ope] J J 1 = (2*l)/3
//! ```
//!
//! Generator lines give name, weight, parity and charge, optionally followed by
//! `filtered`. OPE lines give `A B n = value` with the value written in normal
//! order in the expression grammar; missing entries are zero. Lines starting
//! with `#` are comments. [`to_alg_text`] prints the canonical form, which the
//! shipped files use verbatim.

mod catalog;

pub use catalog::{power_field, Catalog};

use std::fmt::Write as _;

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::parse_field;
use crate::scalars::{ParseError, RatFuncL};
use crate::vertex::{AlgebraPresentation, Engine, FieldExpr, GeneratorInfo, Parity, VertexError};

pub const BP_ALG: &str = include_str!("../../data/bp.alg");
pub const BC_ALG: &str = include_str!("../../data/bc.alg");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, {source}")]
    Expression { line: usize, source: ParseError },
    #[error("line {line}: OPE value of {a} _{n}_ {b} is not written in normal order (normal form: {normal})")]
    NotNormal { line: usize, a: String, b: String, n: u32, normal: String },
    #[error(transparent)]
    Vertex(#[from] VertexError),
}

fn syntax(line: usize, message: impl Into<String>) -> AlgebraError {
    AlgebraError::Syntax { line, message: message.into() }
}

fn parse_rational(s: &str, line: usize) -> Result<BigRational, AlgebraError> {
    s.parse::<BigRational>().map_err(|_| syntax(line, format!("expected a rational number, found '{s}'")))
}

/// Parses an algebra file.
pub fn load_algebra(text: &str) -> Result<AlgebraPresentation, AlgebraError> {
    let mut name = None;
    let mut alg = AlgebraPresentation::new("");
    let mut opes: Vec<(usize, String, String, u32, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(rest) = l.strip_prefix("name ") {
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = l.strip_prefix("[gen]") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() < 4 || f.len() > 5 {
                return Err(syntax(line, "expected: [gen] name weight parity charge [filtered]"));
            }
            let parity = match f[2] {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                p => return Err(syntax(line, format!("parity must be 'even' or 'odd', found '{p}'"))),
            };
            let mut g = GeneratorInfo::new(f[0], parse_rational(f[1], line)?, parity, parse_rational(f[3], line)?);
            match f.get(4) {
                None => {}
                Some(&"filtered") => g = g.filtered(),
                Some(x) => return Err(syntax(line, format!("unexpected '{x}'"))),
            }
            alg.add_generator(g)?;
        } else if let Some(rest) = l.strip_prefix("[ope]") {
            let (lhs, rhs) = rest.split_once('=').ok_or_else(|| syntax(line, "expected '=' in OPE line"))?;
            let f: Vec<&str> = lhs.split_whitespace().collect();
            if f.len() != 3 {
                return Err(syntax(line, "expected: [ope] A B n = value"));
            }
            let n: u32 = f[2].parse().map_err(|_| syntax(line, format!("bad product index '{}'", f[2])))?;
            let offset = raw.find('=').unwrap() + 1;
            opes.push((line, f[0].to_string(), f[1].to_string(), n, rhs.to_string(), offset));
        } else {
            return Err(syntax(line, format!("unrecognized line '{l}'")));
        }
    }
    alg.name = name.ok_or_else(|| syntax(1, "missing 'name' line"))?;

    // Values are evaluated over the bare generators; normal-ordered input needs no OPE data.
    let bare = Engine::new(alg.clone());
    let mut values = Vec::new();
    for (line, a, b, n, rhs, offset) in &opes {
        let ia = alg.generator_index(a)?;
        let ib = alg.generator_index(b)?;
        let v = parse_field(rhs, &bare, &alg).map_err(|e| AlgebraError::Expression {
            line: *line,
            source: ParseError {
                line: *line,
                column: if e.line == 1 { e.column + offset } else { e.column },
                message: e.message,
            },
        })?;
        if alg.ope(ia, ib, *n).is_some() || values.iter().any(|(x, y, m, _, _)| (*x, *y, *m) == (ia, ib, *n)) {
            return Err(syntax(*line, format!("duplicate OPE entry {a} _{n}_ {b}")));
        }
        values.push((ia, ib, *n, v, *line));
    }
    for (ia, ib, n, v, _) in &values {
        alg.set_ope(*ia, *ib, *n, v.clone());
    }
    // Re-evaluate with the full table: values that needed reordering would change.
    let full = Engine::new(alg.clone());
    for ((line, a, b, n, rhs, _), (_, _, _, v, _)) in opes.iter().zip(&values) {
        let again = parse_field(rhs, &full, &alg).expect("parsed once already");
        if &again != v {
            return Err(AlgebraError::NotNormal {
                line: *line,
                a: a.clone(),
                b: b.clone(),
                n: *n,
                normal: again.to_text(&alg),
            });
        }
    }
    Ok(alg)
}

/// Canonical text form: generators in order, then OPE entries by generator pair
/// and descending product index.
pub fn to_alg_text(alg: &AlgebraPresentation) -> String {
    let mut out = String::new();
    writeln!(out, "name {}", alg.name).unwrap();
    for g in alg.generators() {
        let parity = if g.parity.is_odd() { "odd" } else { "even" };
        write!(out, "[gen] {} {} {} {}", g.name, g.weight, parity, g.charge).unwrap();
        if g.filtered {
            out.push_str(" filtered");
        }
        out.push('\n');
    }
    let mut entries: Vec<_> = alg.ope_entries().collect();
    entries.sort_by_key(|x| (x.0 .0, x.0 .1, std::cmp::Reverse(x.0 .2)));
    for (&(a, b, n), v) in entries {
        writeln!(out, "[ope] {} {} {} = {}", alg.generator(a).name, alg.generator(b).name, n, v.to_text(alg)).unwrap();
    }
    out
}

/// The four-generator presentation W^ℓ: T, J, G+, G- with ℓ symbolic.
pub fn bp_algebra() -> AlgebraPresentation {
    load_algebra(BP_ALG).expect("shipped bp.alg is valid")
}

/// The bc-system: odd b, c of weight 1/2 with b _0_ c = 1.
pub fn bc_system() -> AlgebraPresentation {
    load_algebra(BC_ALG).expect("shipped bc.alg is valid")
}

/// Tensor product of two presentations; generator names must be disjoint.
pub fn tensor(a: &AlgebraPresentation, b: &AlgebraPresentation) -> Result<AlgebraPresentation, VertexError> {
    a.tensor(b)
}

/// W^ℓ ⊗ bc, with the W^ℓ generators first.
pub fn bp_bc_algebra() -> AlgebraPresentation {
    tensor(&bp_algebra(), &bc_system()).expect("generator names are disjoint")
}

/// The presentation with every structure constant evaluated at ℓ = `value`.
pub fn specialize_algebra(alg: &AlgebraPresentation, value: &BigRational) -> Result<AlgebraPresentation, AlgebraError> {
    alg.specialize(value).map_err(|e| AlgebraError::Vertex(VertexError::Scalar(e)))
}

/// The scalar `c/2` read off from `T _3_ T` for a Virasoro field `t`.
pub fn half_central_charge(engine: &Engine, t: &FieldExpr) -> RatFuncL {
    engine.nth_product(t, t, 3).vacuum_coefficient()
}
