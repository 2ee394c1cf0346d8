use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::engine::inv_fact;
use super::{AlgebraPresentation, Engine, FieldExpr};
use crate::scalars::RatFuncL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyFailure {
    pub check: &'static str,
    pub fields: Vec<String>,
    pub indices: Vec<i64>,
    /// Printed difference of the two sides.
    pub defect: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub skew_checks: usize,
    pub commutator_checks: usize,
    pub grading_checks: usize,
    pub failures: Vec<ConsistencyFailure>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Right side of skew-symmetry: (−1)^{|a||b|} Σ_{j≥0} (−1)^{n+j+1} (1/j!) ∂^j (a∘_{n+j} b), i.e. b∘_n a.
pub fn skew_transform(engine: &Engine, a: &FieldExpr, b: &FieldExpr, n: i64) -> FieldExpr {
    let alg = engine.algebra();
    let wa = a.homogeneous_weight(alg).unwrap_or_else(BigRational::zero);
    let wb = b.homogeneous_weight(alg).unwrap_or_else(BigRational::zero);
    let top: i64 = (wa + wb).floor().to_integer().try_into().unwrap_or(0);
    let koszul = a.is_odd(alg) && b.is_odd(alg);
    let mut out = FieldExpr::zero();
    for j in 0..=(top - n).max(0) as usize {
        let p = engine.nth_product(a, b, n + j as i64);
        if p.is_zero() {
            continue;
        }
        let d = engine.derivative_k(&p, j);
        let neg = ((n + j as i64 + 1) % 2 != 0) ^ koszul;
        let mut c = RatFuncL::from_rational(inv_fact(j));
        if neg {
            c = -c;
        }
        out.add_scaled(&d, &c);
    }
    out
}

/// Σ_{j=0}^{m} binom(m,j) (a∘_j b)∘_{m+n−j} c
pub fn commutator_rhs(engine: &Engine, a: &FieldExpr, b: &FieldExpr, c: &FieldExpr, m: i64, n: i64) -> FieldExpr {
    let mut out = FieldExpr::zero();
    let mut binom = num_bigint::BigInt::from(1);
    for j in 0..=m {
        let ab = engine.nth_product(a, b, j);
        if !ab.is_zero() {
            let t = engine.nth_product(&ab, c, m + n - j);
            out.add_scaled(&t, &RatFuncL::from_rational(BigRational::from_integer(binom.clone())));
        }
        binom = binom * (m - j) / (j + 1);
    }
    out
}

/// a∘_m(b∘_n c) − (−1)^{|a||b|} b∘_n(a∘_m c)
pub fn commutator_lhs(engine: &Engine, a: &FieldExpr, b: &FieldExpr, c: &FieldExpr, m: i64, n: i64) -> FieldExpr {
    let alg = engine.algebra();
    let left = engine.nth_product(a, &engine.nth_product(b, c, n), m);
    let right = engine.nth_product(b, &engine.nth_product(a, c, m), n);
    if a.is_odd(alg) && b.is_odd(alg) {
        &left + &right
    } else {
        &left - &right
    }
}

fn max_pole(alg: &AlgebraPresentation, a: usize, b: usize) -> i64 {
    let w = &alg.generator(a).weight + &alg.generator(b).weight;
    w.ceil().to_integer().try_into().unwrap_or(0)
}

/// Checks the stored OPE table: grading of every entry, skew-symmetry on all
/// generator pairs, and the commutator identity on all generator triples.
pub fn check_consistency(engine: &Engine) -> ConsistencyReport {
    use rayon::prelude::*;
    let alg = engine.algebra();
    let ng = alg.generators().len();
    let gens: Vec<FieldExpr> = (0..ng).map(|i| FieldExpr::generator(i, 0)).collect();
    let name = |i: usize| alg.generator(i).name.clone();
    let mut report = ConsistencyReport::default();

    for (&(a, b, n), v) in alg.ope_entries() {
        report.grading_checks += 1;
        let w = &alg.generator(a).weight + &alg.generator(b).weight - BigRational::from_integer((n as i64 + 1).into());
        let q = &alg.generator(a).charge + &alg.generator(b).charge;
        let ok = v.iter().all(|(m, _)| m.weight(alg) == w && m.charge(alg) == q)
            && v.is_odd(alg) == (alg.generator(a).parity.is_odd() ^ alg.generator(b).parity.is_odd());
        if !ok || (n as i64) >= max_pole(alg, a, b) {
            report.failures.push(ConsistencyFailure {
                check: "grading",
                fields: vec![name(a), name(b)],
                indices: vec![n as i64],
                defect: v.to_text(alg),
            });
        }
    }

    let pairs: Vec<(usize, usize, i64)> = (0..ng)
        .flat_map(|a| (0..ng).flat_map(move |b| (0..max_pole(alg, a, b)).map(move |n| (a, b, n))))
        .collect();
    let skew: Vec<_> = pairs
        .par_iter()
        .filter_map(|&(a, b, n)| {
            let direct = engine.nth_product(&gens[b], &gens[a], n);
            let via = skew_transform(engine, &gens[a], &gens[b], n);
            let d = &direct - &via;
            (!d.is_zero()).then(|| ConsistencyFailure {
                check: "skew-symmetry",
                fields: vec![name(b), name(a)],
                indices: vec![n],
                defect: d.to_text(alg),
            })
        })
        .collect();
    report.skew_checks = pairs.len();
    report.failures.extend(skew);

    let mut triples = Vec::new();
    for a in 0..ng {
        for b in 0..ng {
            for c in 0..ng {
                for m in 0..max_pole(alg, a, b).max(max_pole(alg, a, c)) {
                    for n in 0..max_pole(alg, b, c).max(max_pole(alg, b, a)) {
                        triples.push((a, b, c, m, n));
                    }
                }
            }
        }
    }
    let comm: Vec<_> = triples
        .par_iter()
        .filter_map(|&(a, b, c, m, n)| {
            let l = commutator_lhs(engine, &gens[a], &gens[b], &gens[c], m, n);
            let r = commutator_rhs(engine, &gens[a], &gens[b], &gens[c], m, n);
            let d = &l - &r;
            (!d.is_zero()).then(|| ConsistencyFailure {
                check: "commutator",
                fields: vec![name(a), name(b), name(c)],
                indices: vec![m, n],
                defect: d.to_text(alg),
            })
        })
        .collect();
    report.commutator_checks = triples.len();
    report.failures.extend(comm);
    report
}
