use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use super::{weight_basis, Engine, FieldExpr, Monomial};
use crate::scalars::{solve_linear, RatFuncL};

/// Fields of the given weight and charge annihilated by every positive-weight
/// lowering mode X∘n (n ≥ h_X, i.e. X_{(n−h_X+1)} with positive mode index)
/// of every generator X. Each vector is scaled so its first nonzero
/// coefficient is 1.
///
/// For a specialized algebra these span the singular vectors of the vacuum
/// module at that weight; generically there are none.
pub fn singular_vectors(engine: &Engine, weight: &BigRational, charge: &BigRational) -> Vec<FieldExpr> {
    let alg = engine.algebra();
    let basis = weight_basis(alg, weight, charge);
    if basis.is_empty() {
        return Vec::new();
    }
    let images: Vec<FieldExpr> = basis.iter().map(|m| FieldExpr::monomial(m.clone())).collect();
    // Row key: (generator, n, monomial of the image).
    let mut rows: BTreeMap<(usize, i64, Monomial), Vec<RatFuncL>> = BTreeMap::new();
    let top = weight.ceil().to_integer();
    let top: i64 = top.try_into().expect("weight too large");
    for (g, info) in alg.generators().iter().enumerate() {
        let x = FieldExpr::generator(g, 0);
        // X∘n lowers weight by n − h + 1; modes that lower by more than the weight vanish.
        let first = (info.weight.clone() - BigRational::one()).floor().to_integer();
        let first: i64 = first.try_into().expect("weight too large");
        for n in (first + 1).max(0)..=top + first + 1 {
            for (j, b) in images.iter().enumerate() {
                let img = engine.nth_product(&x, b, n);
                for (m, c) in img.iter() {
                    let row = rows.entry((g, n, m.clone())).or_insert_with(|| vec![RatFuncL::zero(); basis.len()]);
                    row[j] = c.clone();
                }
            }
        }
    }
    let matrix: Vec<Vec<RatFuncL>> = rows.into_values().collect();
    let rhs = vec![RatFuncL::zero(); matrix.len()];
    let null = if matrix.is_empty() {
        (0..basis.len())
            .map(|i| (0..basis.len()).map(|j| if i == j { RatFuncL::one() } else { RatFuncL::zero() }).collect())
            .collect()
    } else {
        solve_linear(&matrix, &rhs).nullspace().to_vec()
    };
    null.into_iter()
        .map(|v| {
            let lead = v.iter().find(|c| !c.is_zero()).cloned().unwrap_or_else(RatFuncL::one);
            let inv = RatFuncL::one() / lead;
            let mut f = FieldExpr::zero();
            for (m, c) in basis.iter().zip(&v) {
                if !c.is_zero() {
                    f.add_term(m.clone(), &(c * &inv));
                }
            }
            f
        })
        .collect()
}
