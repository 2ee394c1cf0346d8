use std::sync::Arc;

use num_rational::BigRational;
use voa_engine::algebras::{bp_algebra, Catalog};
use voa_engine::scalars::{rat, RatFuncL};
use voa_engine::vertex::{
    mode_bracket, skew_transform, weight_basis, weight_basis_bounded, Engine, FieldExpr, IndexPoly, ModeConvention,
};

fn setup() -> (Arc<Engine>, Catalog) {
    let e = bp_algebra().engine();
    let c = Catalog::new(e.clone());
    (e, c)
}

fn r(s: &str) -> RatFuncL {
    RatFuncL::parse(s).unwrap()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[test]
fn generator_products() {
    let (e, c) = setup();
    let f = |s: &str| c.field(s).unwrap();
    assert_eq!(e.nth_product(&f("J"), &f("J"), 1), FieldExpr::scalar(r("2*l/3")));
    for n in 0..4 {
        assert!(e.nth_product(&f("G+"), &f("G+"), n).is_zero());
        assert!(e.nth_product(&f("G-"), &f("G-"), n).is_zero());
    }
    assert_eq!(e.nth_product(&f("G+"), &f("G-"), 0), f("3*:J J: + 3/4*(2*l-1)*d J - (l+3/2)*T"));
    assert_eq!(e.nth_product(&f("G+"), &f("G-"), 2), FieldExpr::scalar(r("l*(2*l-1)")));
}

#[test]
fn j_on_jj_by_commutator_formula() {
    // J∘_1 :JJ: = Σ_j binom(1,j) (J∘_j J)∘_{-j} J + J∘_{-1}(J∘_1 J)
    //           = (J∘_0 J)∘_0 J + (J∘_1 J)∘_{-1} J + :J (J∘_1 J):, with J∘_0 J = 0, J∘_1 J = 2l/3.
    let (e, c) = setup();
    let j = c.field("J").unwrap();
    let k = r("2*l/3");
    let oracle = &j.scale(&k) + &j.scale(&k);
    assert_eq!(e.nth_product(&j, &c.field(":J J:").unwrap(), 1), oracle);
    assert_eq!(oracle, j.scale(&r("4*l/3")));
}

#[test]
fn wick_of_composite_with_generator() {
    // (:JJ:)∘_{-1} J = Σ_j J∘_{-1-j}(J∘_{-1+j} J) + Σ_j J∘_{-2-j}(J∘_j J)
    // The surviving terms are :JJJ:, J∘_{-3}(2l/3) from the first sum and J∘_{-3}(2l/3) from the second.
    let (e, c) = setup();
    let j = c.field("J").unwrap();
    let jj = e.wick(&j, &j);
    let d2j = e.derivative_k(&j, 2);
    let mut oracle = e.wick(&j, &jj);
    oracle.add_scaled(&d2j, &r("l/3"));
    oracle.add_scaled(&d2j, &r("l/3"));
    let direct = e.wick(&jj, &j);
    assert_eq!(direct, oracle);
    assert_eq!(direct, skew_transform(&e, &j, &jj, -1));
}

#[test]
fn wick_in_reverse_order() {
    // G-∘_{-1}G+ = :G+G-: − ∂(G+∘_0G-) + ½∂²(G+∘_1G-) − ⅙∂³(G+∘_2G-)
    let (e, c) = setup();
    let (gp, gm) = (c.field("G+").unwrap(), c.field("G-").unwrap());
    let mut oracle = c.u(0, 0);
    oracle.add_scaled(&e.derivative(&e.nth_product(&gp, &gm, 0)), &RatFuncL::from_int(-1));
    oracle.add_scaled(&e.derivative_k(&e.nth_product(&gp, &gm, 1), 2), &RatFuncL::frac(1, 2));
    oracle.add_scaled(&e.derivative_k(&e.nth_product(&gp, &gm, 2), 3), &RatFuncL::frac(-1, 6));
    let direct = e.wick(&gm, &gp);
    assert_eq!(direct, oracle);
    assert_ne!(direct, c.u(0, 0));
}

#[test]
fn derivative_examples() {
    let (e, c) = setup();
    assert!(e.derivative(&FieldExpr::vacuum()).is_zero());
    assert_eq!(e.derivative(&c.field("J").unwrap()), c.field("d J").unwrap());
    assert_eq!(e.derivative(&c.u(0, 0)), &c.u(1, 0) + &c.u(0, 1));
}

#[test]
fn weight_bases() {
    let (e, c) = setup();
    let alg = e.algebra();
    let set = |w: i64, ch: i64| -> Vec<FieldExpr> {
        weight_basis(alg, &q(w), &q(ch)).into_iter().map(FieldExpr::monomial).collect()
    };
    let expect = |xs: &[&str]| -> Vec<FieldExpr> {
        let mut v: Vec<FieldExpr> = xs.iter().map(|s| c.field(s).unwrap()).collect();
        v.sort_by(|a, b| a.terms().keys().cmp(b.terms().keys()));
        v
    };
    let mut w2 = set(2, 0);
    w2.sort_by(|a, b| a.terms().keys().cmp(b.terms().keys()));
    assert_eq!(w2, expect(&["T", "d J", ":J J:"]));
    let mut w3 = set(3, 0);
    w3.sort_by(|a, b| a.terms().keys().cmp(b.terms().keys()));
    assert_eq!(w3, expect(&["d T", "d^2 J", ":T J:", ":(d J) J:", ":J J J:", ":G+ G-:"]));
    assert!(set(1, 2).is_empty());
    assert_eq!(set(3, 2), expect(&[":G+ G+:"]));
    // Degree bound: the weight-3 charge-0 space without G-letters.
    assert_eq!(weight_basis_bounded(alg, &q(3), &q(0), 0).len(), 5);
}

#[test]
fn mode_brackets() {
    let (e, c) = setup();
    let f = |s: &str| c.field(s).unwrap();
    let m = IndexPoly::m();
    for (g, sign) in [("G+", 1), ("G-", -1)] {
        let b = mode_bracket(&e, &f("J"), &f(g), ModeConvention::Standard).unwrap();
        let mono = f(g).terms().keys().next().unwrap().clone();
        assert_eq!(b.terms.len(), 1);
        assert_eq!(b.coefficient(&mono), IndexPoly::constant(RatFuncL::from_int(sign)));
        assert!(b.central.is_zero());
    }
    let jj = mode_bracket(&e, &f("J"), &f("J"), ModeConvention::Standard).unwrap();
    assert!(jj.terms.is_empty());
    assert_eq!(jj.central, m.scale(&r("2*l/3")));

    // binom(m + 1/2, 2)·l(2l−1) = (l(2l−1)/2)(m² − 1/4)
    let std = mode_bracket(&e, &f("G+"), &f("G-"), ModeConvention::Standard).unwrap();
    let m2 = &m * &m;
    let quarter = IndexPoly::rational(rat(-1, 4));
    assert_eq!(std.central, (&m2 + &quarter).scale(&r("l*(2*l-1)/2")));
    // Shifted labels: l(l − 1/2) m (m + 1)
    let sh = mode_bracket(&e, &f("G+"), &f("G-"), ModeConvention::Shifted).unwrap();
    assert_eq!(sh.central, (&m2 + &m).scale(&r("l*(l-1/2)")));
}

#[test]
fn filtration_drops_on_contraction() {
    let (e, c) = setup();
    let alg = e.algebra();
    let (gp, gm) = (c.field("G+").unwrap(), c.field("G-").unwrap());
    for n in 0..3 {
        assert_eq!(e.nth_product(&gp, &gm, n).degree(alg), 0);
    }
}
