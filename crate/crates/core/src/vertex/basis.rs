use num_rational::BigRational;

use super::{AlgebraPresentation, Letter, Monomial};

/// Normal monomials of the given weight and charge, in monomial order.
pub fn weight_basis(alg: &AlgebraPresentation, weight: &BigRational, charge: &BigRational) -> Vec<Monomial> {
    enumerate(alg, weight, None).into_iter().filter(|m| &m.charge(alg) == charge).collect()
}

/// Normal monomials of the given weight, any charge.
pub fn weight_basis_all_charges(alg: &AlgebraPresentation, weight: &BigRational) -> Vec<Monomial> {
    enumerate(alg, weight, None)
}

/// Normal monomials of the given weight and charge with filtration degree at most `max_degree`.
pub fn weight_basis_bounded(
    alg: &AlgebraPresentation,
    weight: &BigRational,
    charge: &BigRational,
    max_degree: usize,
) -> Vec<Monomial> {
    enumerate(alg, weight, Some(max_degree)).into_iter().filter(|m| &m.charge(alg) == charge).collect()
}

fn enumerate(alg: &AlgebraPresentation, weight: &BigRational, max_degree: Option<usize>) -> Vec<Monomial> {
    let d = alg.weight_denominator();
    let scaled = weight * BigRational::from_integer(d.into());
    if !scaled.is_integer() {
        return Vec::new();
    }
    let target: i64 = scaled.to_integer().try_into().expect("weight too large");
    if target < 0 {
        return Vec::new();
    }
    let mut letters = Vec::new();
    for g in 0..alg.generators().len() {
        let w = alg.scaled_weight(&Monomial::letter(Letter::new(g, 0)));
        let mut k = 0;
        while w + k * d <= target {
            letters.push((Letter::new(g, k as usize), w + k * d));
            k += 1;
        }
    }
    letters.sort();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(alg, &letters, 0, target, max_degree, &mut cur, &mut out);
    out.sort();
    out
}

fn rec(
    alg: &AlgebraPresentation,
    letters: &[(Letter, i64)],
    start: usize,
    remaining: i64,
    max_degree: Option<usize>,
    cur: &mut Vec<Letter>,
    out: &mut Vec<Monomial>,
) {
    if remaining == 0 {
        out.push(Monomial::from_sorted(cur));
        return;
    }
    for i in start..letters.len() {
        let (l, w) = letters[i];
        if w > remaining {
            continue;
        }
        let filtered = alg.generator(l.gen as usize).filtered;
        if filtered {
            if let Some(m) = max_degree {
                if cur.iter().filter(|x| alg.generator(x.gen as usize).filtered).count() >= m {
                    continue;
                }
            }
        }
        cur.push(l);
        let next = if alg.letter_is_odd(l) { i + 1 } else { i };
        rec(alg, letters, next, remaining - w, max_degree, cur, out);
        cur.pop();
    }
}
