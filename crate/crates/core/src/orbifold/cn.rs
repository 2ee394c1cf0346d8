use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::OrbifoldError;
use crate::algebras::Catalog;
use crate::scalars::RatFuncL;
use crate::vertex::{AlgebraPresentation, FieldExpr, Letter, Monomial};

/// The coefficients C_{n,i}(ω) of :(∂^i G+)(∂^{n+4−i} G-): and their alternating sum C_n(ω).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnTable {
    pub n: usize,
    pub entries: Vec<RatFuncL>,
    pub value: RatFuncL,
}

fn pm_indices(alg: &AlgebraPresentation) -> Result<(usize, usize), OrbifoldError> {
    let p = alg.generator_index("G+").map_err(|_| OrbifoldError::MissingGenerator("G+".into()))?;
    let m = alg.generator_index("G-").map_err(|_| OrbifoldError::MissingGenerator("G-".into()))?;
    Ok((p, m))
}

/// Reads the table off a field without checking weight or degree.
pub(crate) fn table_of(alg: &AlgebraPresentation, omega: &FieldExpr, n: usize) -> Result<CnTable, OrbifoldError> {
    let (p, m) = pm_indices(alg)?;
    let entries: Vec<RatFuncL> = (0..=n + 4)
        .map(|i| omega.coefficient(&Monomial::from_sorted(&[Letter::new(p, i), Letter::new(m, n + 4 - i)])))
        .collect();
    let mut value = RatFuncL::zero();
    for (i, c) in entries.iter().enumerate() {
        if i % 2 == 0 {
            value += c;
        } else {
            value -= c;
        }
    }
    Ok(CnTable { n, entries, value })
}

/// C_{n,i}(ω) for i = 0..n+4 and C_n(ω) = Σ (−1)^i C_{n,i}(ω).
///
/// `omega` must have charge 0, weight n+7 and filtration degree at most 2.
pub fn cn_coefficients(alg: &AlgebraPresentation, omega: &FieldExpr, n: usize) -> Result<CnTable, OrbifoldError> {
    let expected = BigRational::from_integer((n as i64 + 7).into());
    for (mono, _) in omega.iter() {
        let w = mono.weight(alg);
        if w != expected {
            return Err(OrbifoldError::WrongWeight { expected, found: w });
        }
        let q = mono.charge(alg);
        if !q.is_zero() {
            return Err(OrbifoldError::WrongCharge(q));
        }
    }
    let d = omega.degree(alg);
    if d > 2 {
        return Err(OrbifoldError::DegreeTooHigh { found: d, max: 2 });
    }
    table_of(alg, omega, n)
}

/// The four reordering differences whose sum is :U_{0,0} U_{1,n}: − :U_{0,n} U_{1,0}:.
#[derive(Debug, Clone)]
pub struct Telescoping {
    pub n: usize,
    /// The differences in order; all have filtration degree at most 2.
    pub terms: [FieldExpr; 4],
    /// :G+ G- (∂^n G-)(∂G+): − :G+ (∂^n G-) G- (∂G+):, which vanishes.
    pub swap: FieldExpr,
    /// :U_{0,0} U_{1,n}: − :U_{0,n} U_{1,0}:
    pub total: FieldExpr,
}

impl Telescoping {
    /// C^k_{n,j} for k = 1..4 (index k−1), j = 0..n+4.
    pub fn tables(&self, alg: &AlgebraPresentation) -> Result<Vec<CnTable>, OrbifoldError> {
        self.terms.iter().map(|t| table_of(alg, t, self.n)).collect()
    }
}

/// Splits :U_{0,0} U_{1,n}: − :U_{0,n} U_{1,0}: into reassociation and reordering differences:
///
/// ```text
/// :(:G+ G-:)(:(d G+) d^n G-:): − :G+ G- (d G+) d^n G-:
/// :G+ G- (d G+) d^n G-:        − :G+ G- (d^n G-) (d G+):
/// :G+ (d^n G-) G- (d G+):      − :G+ (d^n G-) (d G+) G-:
/// :G+ (d^n G-) (d G+) G-:      − :(:G+ d^n G-:)(:(d G+) G-:):
/// ```
///
/// with all products right-nested.
pub fn telescoping_terms(catalog: &Catalog, n: usize) -> Result<Telescoping, OrbifoldError> {
    let e = catalog.engine();
    let alg = e.algebra();
    let (p, m) = pm_indices(alg)?;
    let g = |gen: usize, k: usize| FieldExpr::generator(gen, k);
    let (gp, gm, dgp, dngm) = (g(p, 0), g(m, 0), g(p, 1), g(m, n));
    let w = |xs: &[&FieldExpr]| e.wick_word(&xs.iter().map(|x| (*x).clone()).collect::<Vec<_>>());

    let a0 = e.wick(&catalog.u(0, 0), &catalog.u(1, n));
    let a1 = w(&[&gp, &gm, &dgp, &dngm]);
    let a2 = w(&[&gp, &gm, &dngm, &dgp]);
    let a3 = w(&[&gp, &dngm, &gm, &dgp]);
    let a4 = w(&[&gp, &dngm, &dgp, &gm]);
    let a5 = e.wick(&catalog.u(0, n), &catalog.u(1, 0));
    Ok(Telescoping {
        n,
        terms: [&a0 - &a1, &a1 - &a2, &a3 - &a4, &a4 - &a5],
        swap: &a2 - &a3,
        total: &a0 - &a5,
    })
}
