//! Randomized engine invariants, run through proptest's `TestRunner` with a fixed seed.
//!
//! The same checks back the property test suite and the `selftest` command.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde::Serialize;

use crate::algebras::bp_algebra;
use crate::expr::parse_field;
use crate::scalars::{PolyL, RatFuncL};
use crate::vertex::{weight_basis_all_charges, Engine, FieldExpr, Letter, Monomial};

/// The shared engine for W^ℓ with symbolic ℓ.
pub fn bp_engine() -> Arc<Engine> {
    static ENGINE: OnceLock<Arc<Engine>> = OnceLock::new();
    ENGINE.get_or_init(|| bp_algebra().engine()).clone()
}

/// All normal monomials of W^ℓ with weight at most `max_half / 2`.
pub fn monomials_up_to(max_half: i64) -> Vec<Monomial> {
    let alg = bp_algebra();
    (0..=max_half).flat_map(|h| weight_basis_all_charges(&alg, &BigRational::new(h.into(), 2.into()))).collect()
}

pub fn monomial(max_half: i64) -> impl Strategy<Value = Monomial> {
    prop::sample::select(monomials_up_to(max_half))
}

/// Small rational functions (a + bℓ + cℓ²)/(ℓ + k)^e.
pub fn coefficient() -> impl Strategy<Value = RatFuncL> {
    (-4i64..=4, -3i64..=3, -2i64..=2, 1i64..=4, 0u32..=1).prop_filter_map("zero", |(a, b, c, k, e)| {
        let num = PolyL::from_ints(&[a, b, c]);
        let den = PolyL::from_ints(&[k, 1]).pow(e);
        let r = RatFuncL::new(num, den).ok()?;
        (!r.is_zero()).then_some(r)
    })
}

/// Combinations of up to four monomials, not necessarily homogeneous.
pub fn field(max_half: i64) -> impl Strategy<Value = FieldExpr> {
    prop::collection::vec((monomial(max_half), coefficient()), 1..=4).prop_map(|terms| {
        let mut f = FieldExpr::zero();
        for (m, c) in terms {
            f.add_term(m, &c);
        }
        f
    })
}

/// Letter words in arbitrary order: J, T, G+, G− with up to two derivatives.
pub fn letter_word() -> impl Strategy<Value = Vec<Letter>> {
    let n = bp_algebra().generators().len();
    prop::collection::vec((0..n, 0usize..=2), 1..=4).prop_map(|v| v.into_iter().map(|(g, d)| Letter::new(g, d)).collect())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn show(e: &Engine, f: &FieldExpr) -> String {
    f.display(e.algebra()).to_string()
}

pub fn check_grading(e: &Engine, a: &Monomial, b: &Monomial, n: i64) -> Result<(), TestCaseError> {
    let alg = e.algebra();
    let p = e.nth_product(&FieldExpr::monomial(a.clone()), &FieldExpr::monomial(b.clone()), n);
    let w = a.weight(alg) + b.weight(alg) - BigRational::from_integer((n + 1).into());
    let q = a.charge(alg) + b.charge(alg);
    ensure(p.terms().keys().all(|m| m.weight(alg) == w && m.charge(alg) == q), || {
        format!("product of weight/charge other than {w}/{q}: {}", show(e, &p))
    })
}

pub fn check_vacuum(e: &Engine, a: &FieldExpr, n: i64) -> Result<(), TestCaseError> {
    let one = FieldExpr::vacuum();
    ensure(&e.nth_product(a, &one, -1) == a, || "a∘_{-1}1 ≠ a".into())?;
    ensure(&e.nth_product(&one, a, -1) == a, || "1∘_{-1}a ≠ a".into())?;
    ensure(e.nth_product(a, &one, n).is_zero(), || format!("a∘_{n}1 ≠ 0"))
}

pub fn check_leibniz(e: &Engine, a: &FieldExpr, b: &FieldExpr, n: i64) -> Result<(), TestCaseError> {
    let lhs = e.derivative(&e.nth_product(a, b, n));
    let rhs = &e.nth_product(&e.derivative(a), b, n) + &e.nth_product(a, &e.derivative(b), n);
    ensure(lhs == rhs, || format!("∂(a∘_{n}b) = {} but ∂a∘b + a∘∂b = {}", show(e, &lhs), show(e, &rhs)))
}

pub fn check_weak_filtration(e: &Engine, a: &FieldExpr, b: &FieldExpr, n: i64) -> Result<(), TestCaseError> {
    let alg = e.algebra();
    let p = e.nth_product(a, b, n);
    ensure(p.degree(alg) <= a.degree(alg) + b.degree(alg), || {
        format!("degree {} > {} + {}", p.degree(alg), a.degree(alg), b.degree(alg))
    })
}

pub fn check_idempotence(e: &Engine, word: &[Letter]) -> Result<(), TestCaseError> {
    let f = e.normalize_letters(word);
    for m in f.terms().keys() {
        let again = e.normalize_letters(m.letters());
        ensure(again == FieldExpr::monomial(m.clone()), || format!("renormalizing {} changed it", show(e, &again)))?;
    }
    // Normalizing the normal form as a whole.
    let mut g = FieldExpr::zero();
    for (m, c) in f.terms() {
        g.add_scaled(&e.normalize_letters(m.letters()), c);
    }
    ensure(g == f, || "normal form not fixed".into())
}

pub fn check_round_trip(e: &Engine, f: &FieldExpr) -> Result<(), TestCaseError> {
    let alg = e.algebra();
    let text = show(e, f);
    let back = parse_field(&text, e, alg).map_err(|err| TestCaseError::fail(format!("'{text}' does not parse: {err}")))?;
    ensure(&back == f, || format!("'{text}' parses to {}", show(e, &back)))?;
    ensure(show(e, &back) == text, || "printing is not canonical".into())
}

/// The randomized engine properties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    Grading,
    Vacuum,
    Leibniz,
    WeakFiltration,
    Idempotence,
    RoundTrip,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Grading,
        Property::Vacuum,
        Property::Leibniz,
        Property::WeakFiltration,
        Property::Idempotence,
        Property::RoundTrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Grading => "grading",
            Property::Vacuum => "vacuum",
            Property::Leibniz => "leibniz",
            Property::WeakFiltration => "weak-filtration",
            Property::Idempotence => "idempotence",
            Property::RoundTrip => "round-trip",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyOutcome {
    pub property: Property,
    pub cases: u32,
    pub passed: bool,
    /// Minimal failing input and message.
    pub failure: Option<String>,
    pub seconds: f64,
}

fn check<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&s, f).map_err(|err| err.to_string())
}

/// Runs one property for `cases` deterministic random cases.
pub fn run_property(p: Property, cases: u32) -> PropertyOutcome {
    let e = bp_engine();
    let start = Instant::now();
    let result = match p {
        Property::Grading => check(cases, (monomial(8), monomial(8), -2i64..=4), |(a, b, n)| check_grading(&e, &a, &b, n)),
        Property::Vacuum => check(cases, (field(8), 0i64..=4), |(a, n)| check_vacuum(&e, &a, n)),
        Property::Leibniz => check(cases, (field(6), field(6), -1i64..=3), |(a, b, n)| check_leibniz(&e, &a, &b, n)),
        Property::WeakFiltration => {
            check(cases, (field(8), field(8), -1i64..=4), |(a, b, n)| check_weak_filtration(&e, &a, &b, n))
        }
        Property::Idempotence => check(cases, letter_word(), |w| check_idempotence(&e, &w)),
        Property::RoundTrip => check(cases, field(10), |f| check_round_trip(&e, &f)),
    };
    PropertyOutcome {
        property: p,
        cases,
        passed: result.is_ok(),
        failure: result.err(),
        seconds: start.elapsed().as_secs_f64(),
    }
}
