use std::collections::HashMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::OrbifoldError;
use crate::algebras::Catalog;
use crate::scalars::{factor_with_candidates, solve_sparse, PolyFactor, PolyL, RatFuncL, SparseRow};
use crate::vertex::{weight_basis_bounded, Engine, FieldExpr, Letter, Monomial};

/// U^C_i = U_{0,i} + ω_i, primary for T^C and annihilated by J.
#[derive(Debug, Clone, Serialize)]
pub struct Correction {
    pub i: usize,
    #[serde(skip)]
    pub omega: FieldExpr,
    #[serde(skip)]
    pub u_c: FieldExpr,
    /// Monic factors of the lcm of all coefficient denominators of ω_i.
    pub denominators: Vec<PolyFactor>,
    /// Number of unknown coefficients (all monomials of the weight space).
    pub unknowns: usize,
    /// Number of scalar equations.
    pub equations: usize,
    /// Dimension of the solution space of the homogeneous system.
    pub nullity: usize,
}

/// The quadratics 60x²−104x−51, 28x²−104x−107, 4x²−20x−23, 24x²−22x+9,
/// 84x²−220x−183, 6x²−29x−33, 60x²−52x+27, 132x²−832x−1017.
pub fn correction_quadratics() -> Vec<PolyL> {
    [
        [-51, -104, 60],
        [-107, -104, 28],
        [-23, -20, 4],
        [9, -22, 24],
        [-183, -220, 84],
        [-33, -29, 6],
        [27, -52, 60],
        [-1017, -832, 132],
    ]
    .iter()
    .map(|c| PolyL::from_ints(c))
    .collect()
}

/// The conditions imposed on a weight-w field X: J∘_n X = 0 (n ≥ 0),
/// T^C∘_1 X = w·X and T^C∘_n X = 0 (n ≥ 2).
fn conditions(engine: &Engine, j: &FieldExpr, tc: &FieldExpr, x: &FieldExpr, w: usize) -> Vec<FieldExpr> {
    let mut out = Vec::new();
    for n in 0..=w as i64 {
        out.push(engine.nth_product(j, x, n));
    }
    let mut t1 = engine.nth_product(tc, x, 1);
    t1.add_scaled(x, &RatFuncL::from_int(-(w as i64)));
    out.push(t1);
    for n in 2..=w as i64 + 1 {
        out.push(engine.nth_product(tc, x, n));
    }
    out
}

/// Solves for the correction ω_i: U^C_i = U_{0,i} + ω_i ranges over charge-0
/// fields of weight i+3 and filtration degree at most 2, and ω_i has no
/// U_{0,i} component when written in the words of T, J, U_{0,m}.
///
/// Since U_{a,b} = Σ_r (−1)^{a+r} binom(a,r) ∂^r U_{0,a+b−r}, the U_{0,i} word
/// coefficient of a field is Σ_a (−1)^a times its :(∂^a G+)(∂^{i−a} G-):
/// coefficient; that sum is fixed to 1. The commutant and primary conditions
/// and this normalization form one linear system over ℚ(ℓ).
pub fn solve_correction(catalog: &Catalog, i: usize) -> Result<Correction, OrbifoldError> {
    let engine = catalog.engine();
    let alg = engine.algebra();
    let p = alg.generator_index("G+").map_err(|_| OrbifoldError::MissingGenerator("G+".into()))?;
    let m = alg.generator_index("G-").map_err(|_| OrbifoldError::MissingGenerator("G-".into()))?;
    let j = alg.gen("J").map_err(|_| OrbifoldError::MissingGenerator("J".into()))?;
    let tc = catalog.t_c();
    let w = i + 3;
    let basis = weight_basis_bounded(alg, &BigRational::from_integer(w.into()), &BigRational::default(), 2);

    let images: Vec<Vec<FieldExpr>> =
        basis.par_iter().map(|b| conditions(engine, &j, &tc, &FieldExpr::monomial(b.clone()), w)).collect();

    let mut row_of: HashMap<(usize, &Monomial), usize> = HashMap::new();
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut rhs: Vec<RatFuncL> = Vec::new();
    for (col, conds) in images.iter().enumerate() {
        for (k, img) in conds.iter().enumerate() {
            for (mono, c) in img.iter() {
                let r = *row_of.entry((k, mono)).or_insert_with(|| {
                    rows.push(Vec::new());
                    rhs.push(RatFuncL::zero());
                    rows.len() - 1
                });
                rows[r].push((col, c.clone()));
            }
        }
    }
    let normalization: SparseRow = (0..=i)
        .filter_map(|a| {
            let mono = Monomial::from_sorted(&[Letter::new(p, a), Letter::new(m, i - a)]);
            let col = basis.iter().position(|b| b == &mono)?;
            Some((col, RatFuncL::from_int(if a % 2 == 0 { 1 } else { -1 })))
        })
        .collect();
    rows.push(normalization);
    rhs.push(RatFuncL::one());
    let sol = solve_sparse(basis.len(), &rows, &rhs);
    let x = sol.particular().ok_or_else(|| {
        OrbifoldError::Unsolvable(format!("no commuting primary correction of U[0,{i}] exists over Q(l)"))
    })?;
    let mut u_c = FieldExpr::zero();
    for (b, c) in basis.iter().zip(x) {
        u_c.add_term(b.clone(), c);
    }
    let omega = &u_c - &catalog.u(0, i);

    let mut den = PolyL::one();
    for (_, c) in omega.iter() {
        let d = c.denom();
        den = &den * &d.div_exact(&PolyL::gcd(&den, d));
    }
    let mut candidates = vec![PolyL::ell()];
    candidates.extend(correction_quadratics());
    Ok(Correction {
        i,
        omega,
        u_c,
        denominators: factor_with_candidates(&den, &candidates),
        unknowns: basis.len(),
        equations: rows.len(),
        nullity: sol.nullspace().len(),
    })
}
