use std::collections::BTreeMap;
use std::sync::Arc;

use super::{express_in_generators, Factor, GenPolynomial, GeneratorSet, Node, OrbifoldError, WordOrder};
use crate::algebras::Catalog;
use crate::scalars::RatFuncL;
use crate::vertex::FieldExpr;

/// source = leading_coefficient · target + remainder, and target = reduced.
#[derive(Debug, Clone)]
pub struct DecouplingResult {
    pub n: usize,
    /// Normal form of :U_{0,0} U_{1,n}: − :U_{0,n} U_{1,0}:.
    pub source: FieldExpr,
    /// Name of the decoupled field, `U[0,n+4]`.
    pub target: String,
    pub leading_coefficient: RatFuncL,
    /// Degree-2 polynomial in T, J, U[0,0..n+3].
    pub remainder: GenPolynomial,
    /// The target as a polynomial in T, J, U[0,0..4] only.
    pub reduced: Arc<GenPolynomial>,
}

/// Computes decoupling relations for increasing n, reusing earlier ones.
pub struct Decoupler<'a> {
    catalog: &'a Catalog,
    set: GeneratorSet,
    done: BTreeMap<usize, DecouplingResult>,
}

/// Index of U[0,m] in [`GeneratorSet::standard`].
fn u_index(m: usize) -> usize {
    m + 2
}

impl<'a> Decoupler<'a> {
    pub fn new(catalog: &'a Catalog) -> Self {
        Decoupler { catalog, set: GeneratorSet::new(), done: BTreeMap::new() }
    }

    /// The generator set T, J, U[0,0..] used by every polynomial returned so far.
    pub fn generators(&self) -> &GeneratorSet {
        &self.set
    }

    /// The relation decoupling U[0,n+4] (n ≥ 1).
    pub fn relation(&mut self, n: usize) -> Result<&DecouplingResult, OrbifoldError> {
        assert!(n >= 1, "decoupling relations start at n = 1");
        for k in 1..=n {
            if !self.done.contains_key(&k) {
                let r = self.compute(k)?;
                self.done.insert(k, r);
            }
        }
        Ok(&self.done[&n])
    }

    fn compute(&mut self, n: usize) -> Result<DecouplingResult, OrbifoldError> {
        let target = n + 4;
        let c = self.catalog;
        let engine = c.engine().clone();
        let source = &engine.wick(&c.u(0, 0), &c.u(1, n)) - &engine.wick(&c.u(0, n), &c.u(1, 0));
        let set = GeneratorSet::standard(c, target)?;
        let expressed = express_in_generators(&engine, &source, &set, 2, WordOrder::Forward).map_err(|e| {
            OrbifoldError::Unsolvable(format!("U[0,0]U[1,{n}] relation not expressible ({} candidate words)", e.words))
        })?;
        if set.len() > self.set.len() {
            self.set = set;
        }
        let t = u_index(target);
        let leading = expressed.polynomial.linear_coefficient(t);
        if leading.is_zero() {
            let ell = engine.algebra().specialized_at().cloned().unwrap_or_default();
            return Err(OrbifoldError::NoDecoupling { target, ell });
        }
        let remainder = expressed.polynomial.without_linear(t);

        // U[0,target] = (source − remainder) / leading, with U[1,k] = ∂U[0,k] − U[0,k+1].
        let u1 = |k: usize| {
            Arc::new(GenPolynomial {
                terms: vec![
                    (RatFuncL::one(), vec![Factor { deriv: 1, node: Node::Gen(u_index(k)) }]),
                    (RatFuncL::from_int(-1), vec![Factor { deriv: 0, node: Node::Gen(u_index(k + 1)) }]),
                ],
            })
        };
        let gen = |k: usize| Factor { deriv: 0, node: Node::Gen(u_index(k)) };
        let nested = |p: Arc<GenPolynomial>| Factor { deriv: 0, node: Node::Poly(p) };
        let source_poly = GenPolynomial {
            terms: vec![
                (RatFuncL::one(), vec![gen(0), nested(u1(n))]),
                (RatFuncL::from_int(-1), vec![gen(n), nested(u1(0))]),
            ],
        };
        let inv = RatFuncL::one() / leading.clone();
        let mut reduced = source_poly.scale(&inv);
        reduced.extend(&remainder, &-inv);
        for m in (5..target).rev() {
            if reduced.members_used().contains(&u_index(m)) {
                reduced = reduced.substitute(u_index(m), &self.done[&(m - 4)].reduced);
            }
        }
        Ok(DecouplingResult {
            n,
            source,
            target: format!("U[0,{target}]"),
            leading_coefficient: leading,
            remainder,
            reduced: Arc::new(reduced),
        })
    }
}

/// The decoupling relation for U[0,n+4], with all lower relations applied to its reduced form.
pub fn solve_decoupling(catalog: &Catalog, n: usize) -> Result<DecouplingResult, OrbifoldError> {
    Decoupler::new(catalog).relation(n).cloned()
}
