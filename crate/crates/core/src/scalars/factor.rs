use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::PolyL;

/// A monic factor of a polynomial with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyFactor {
    pub factor: PolyL,
    pub multiplicity: usize,
    /// True when irreducibility over ℚ was established (degree ≤ 2, or a cubic
    /// whose rational-root search was exhaustive).
    pub irreducible: bool,
}

const DIVISOR_BOUND: u64 = 100_000;

fn small_divisors(n: &BigInt) -> (Vec<BigInt>, bool) {
    let n = n.abs();
    let complete = n.to_u64().is_some_and(|v| v <= DIVISOR_BOUND);
    let limit = n.to_u64().map_or(DIVISOR_BOUND, |v| v.min(DIVISOR_BOUND));
    let ds = (1..=limit).map(BigInt::from).filter(|d| (&n % d).is_zero()).collect();
    (ds, complete)
}

/// Rational roots of a primitive integer polynomial, found among ±p/q with p | a_0, q | a_n
/// (divisors searched up to a bound). The flag reports whether the search was exhaustive.
fn rational_roots(p: &PolyL) -> (Vec<BigRational>, bool) {
    let (ints, _) = p.primitive_integer();
    if ints.len() < 2 {
        return (Vec::new(), true);
    }
    if ints[0].is_zero() {
        return (vec![BigRational::zero()], true);
    }
    let (ps, c1) = small_divisors(&ints[0]);
    let (qs, c2) = small_divisors(ints.last().unwrap());
    let mut roots = Vec::new();
    for q in &qs {
        for a in &ps {
            if !a.gcd(q).is_one() {
                continue;
            }
            for s in [a.clone(), -a.clone()] {
                let r = BigRational::new(s, q.clone());
                if p.eval(&r).is_zero() {
                    roots.push(r);
                }
            }
        }
    }
    (roots, c1 && c2)
}

fn linear(root: &BigRational) -> PolyL {
    PolyL::from_coeffs(vec![-root.clone(), BigRational::one()])
}

/// Splits `p` into monic factors: first the given candidates (each tried to
/// exhaustion), then linear factors from rational roots, then quadratics by
/// their discriminant. Whatever remains is reported as one factor, marked
/// irreducible only when that is certain.
pub fn factor_with_candidates(p: &PolyL, candidates: &[PolyL]) -> Vec<PolyFactor> {
    let mut rest = p.monic();
    let mut out: Vec<PolyFactor> = Vec::new();
    let push = |f: PolyL, irreducible: bool, out: &mut Vec<PolyFactor>| {
        if let Some(x) = out.iter_mut().find(|x| x.factor == f) {
            x.multiplicity += 1;
        } else {
            out.push(PolyFactor { factor: f, multiplicity: 1, irreducible });
        }
    };
    for c in candidates {
        let c = c.monic();
        if c.is_constant() {
            continue;
        }
        while rest.is_divisible_by(&c) && !rest.is_constant() {
            rest = rest.div_exact(&c);
            let irr = c.degree() == Some(1) || (c.degree() == Some(2) && !has_rational_root_quadratic(&c));
            push(c.clone(), irr, &mut out);
        }
    }
    loop {
        if rest.is_constant() {
            break;
        }
        let (roots, complete) = rational_roots(&rest);
        if roots.is_empty() {
            match rest.degree() {
                Some(1) => push(rest.clone(), true, &mut out),
                Some(2) => push(rest.clone(), !has_rational_root_quadratic(&rest), &mut out),
                Some(3) => push(rest.clone(), complete, &mut out),
                _ => push(rest.clone(), false, &mut out),
            }
            break;
        }
        for r in roots {
            let f = linear(&r);
            while rest.is_divisible_by(&f) && !rest.is_constant() {
                rest = rest.div_exact(&f);
                push(f.clone(), true, &mut out);
            }
        }
    }
    out.sort_by(|a, b| a.factor.cmp(&b.factor));
    out
}

fn has_rational_root_quadratic(q: &PolyL) -> bool {
    let (c, _) = q.primitive_integer();
    let disc: BigInt = &c[1] * &c[1] - BigInt::from(4) * &c[0] * &c[2];
    !disc.is_negative() && disc.sqrt().pow(2) == disc
}

/// Whether every irreducible factor of `p` divides the product of `allowed`.
pub fn is_supported_on(p: &PolyL, allowed: &[PolyL]) -> bool {
    let prod = allowed.iter().fold(PolyL::one(), |acc, f| &acc * f);
    let mut rest = p.monic();
    loop {
        if rest.is_constant() {
            return true;
        }
        let g = PolyL::gcd(&rest, &prod);
        if g.is_constant() {
            return false;
        }
        rest = rest.div_exact(&g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_candidates_and_roots() {
        let q = PolyL::from_ints(&[-51, -104, 60]);
        let l = PolyL::ell();
        let two_l_minus_1 = PolyL::from_ints(&[-1, 2]);
        let p = &(&(&q * &q) * &l) * &two_l_minus_1;
        let f = factor_with_candidates(&p, std::slice::from_ref(&q));
        assert_eq!(f.len(), 3);
        assert!(f.iter().all(|x| x.irreducible));
        assert_eq!(f.iter().find(|x| x.factor == q.monic()).unwrap().multiplicity, 2);
        assert!(is_supported_on(&p, &[l.clone(), q.clone(), two_l_minus_1]));
        assert!(!is_supported_on(&p, &[l, q]));
    }
}
