//! Normal forms in freely generated vertex superalgebras.
//!
//! A field is a [`FieldExpr`]: a finite ℚ(ℓ)-combination of [`Monomial`]s, each
//! a right-nested Wick product of generator derivatives sorted by the
//! algebra's generator order (and by non-increasing derivative order within a
//! generator). [`Engine`] computes every n-th product, Wick product and
//! derivative in this basis from the singular OPE table of an
//! [`AlgebraPresentation`].

mod basis;
mod consistency;
mod engine;
mod modes;
mod print;
mod singular;

pub use basis::{weight_basis, weight_basis_all_charges, weight_basis_bounded};
pub use consistency::{check_consistency, commutator_lhs, commutator_rhs, skew_transform, ConsistencyFailure, ConsistencyReport};
pub use engine::Engine;
pub use singular::singular_vectors;
pub(crate) use print::{format_term, join_terms};
pub use modes::{jacobi_check, mode_bracket, IndexPoly, JacobiDefect, ModeBracket, ModeConvention};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use thiserror::Error;

use crate::scalars::{RatFuncL, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VertexError {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("duplicate generator name '{0}'")]
    DuplicateGenerator(String),
    #[error("field is not homogeneous in weight")]
    NotHomogeneous,
    #[error("generator weight must be positive, got {0} for '{1}'")]
    BadWeight(String, String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorInfo {
    pub name: String,
    pub weight: BigRational,
    pub parity: Parity,
    pub charge: BigRational,
    /// Counts toward the filtration degree of a monomial.
    pub filtered: bool,
}

impl GeneratorInfo {
    pub fn new(name: &str, weight: BigRational, parity: Parity, charge: BigRational) -> Self {
        GeneratorInfo { name: name.to_string(), weight, parity, charge, filtered: false }
    }

    pub fn filtered(mut self) -> Self {
        self.filtered = true;
        self
    }
}

/// One factor ∂^deriv(gen) of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: u16,
    pub deriv: u16,
}

impl Letter {
    pub fn new(gen: usize, deriv: usize) -> Self {
        Letter { gen: gen as u16, deriv: deriv as u16 }
    }

    pub fn derived(self, k: usize) -> Self {
        Letter { gen: self.gen, deriv: self.deriv + k as u16 }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    /// Normal order: generator order first, then higher derivatives first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gen.cmp(&other.gen).then(other.deriv.cmp(&self.deriv))
    }
}

/// A normally ordered monomial; the empty monomial is the vacuum 𝟙.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub(crate) SmallVec<[Letter; 4]>);

impl Monomial {
    pub fn vacuum() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn letter(l: Letter) -> Self {
        let mut v = SmallVec::new();
        v.push(l);
        Monomial(v)
    }

    /// Builds a monomial from letters that must already be in normal order.
    pub fn from_sorted(letters: &[Letter]) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] <= w[1]));
        Monomial(letters.iter().copied().collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn tail(&self) -> Monomial {
        Monomial(self.0[1..].iter().copied().collect())
    }

    pub(crate) fn prepend(&self, l: Letter) -> Monomial {
        let mut v: SmallVec<[Letter; 4]> = SmallVec::with_capacity(self.0.len() + 1);
        v.push(l);
        v.extend_from_slice(&self.0);
        Monomial(v)
    }

    pub fn weight(&self, alg: &AlgebraPresentation) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, l| {
            acc + &alg.generators[l.gen as usize].weight + BigRational::from_integer(l.deriv.into())
        })
    }

    pub fn charge(&self, alg: &AlgebraPresentation) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, l| acc + &alg.generators[l.gen as usize].charge)
    }

    pub fn is_odd(&self, alg: &AlgebraPresentation) -> bool {
        self.0.iter().filter(|l| alg.generators[l.gen as usize].parity.is_odd()).count() % 2 == 1
    }

    pub fn degree(&self, alg: &AlgebraPresentation) -> usize {
        self.0.iter().filter(|l| alg.generators[l.gen as usize].filtered).count()
    }

    /// Whether the letters are in normal order with no repeated odd letter.
    pub fn is_normal(letters: &[Letter], alg: &AlgebraPresentation) -> bool {
        letters.windows(2).all(|w| {
            w[0] < w[1] || (w[0] == w[1] && !alg.generators[w[0].gen as usize].parity.is_odd())
        })
    }
}

/// A finite ℚ(ℓ)-linear combination of normal monomials with no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldExpr {
    terms: BTreeMap<Monomial, RatFuncL>,
}

impl FieldExpr {
    pub fn zero() -> Self {
        FieldExpr { terms: BTreeMap::new() }
    }

    pub fn vacuum() -> Self {
        Self::monomial(Monomial::vacuum())
    }

    pub fn scalar(c: RatFuncL) -> Self {
        Self::term(Monomial::vacuum(), c)
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, RatFuncL::one())
    }

    pub fn term(m: Monomial, c: RatFuncL) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        FieldExpr { terms }
    }

    /// The generator with index `gen`, differentiated `deriv` times.
    pub fn generator(gen: usize, deriv: usize) -> Self {
        Self::monomial(Monomial::letter(Letter::new(gen, deriv)))
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, RatFuncL> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &RatFuncL)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> RatFuncL {
        self.terms.get(m).cloned().unwrap_or_else(RatFuncL::zero)
    }

    /// The coefficient of the vacuum.
    pub fn vacuum_coefficient(&self) -> RatFuncL {
        self.coefficient(&Monomial::vacuum())
    }

    pub fn add_term(&mut self, m: Monomial, c: &RatFuncL) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// self += c · other
    pub fn add_scaled(&mut self, other: &FieldExpr, c: &RatFuncL) {
        if c.is_zero() {
            return;
        }
        let unit = c.is_one();
        for (m, v) in &other.terms {
            if unit {
                self.add_term(m.clone(), v);
            } else {
                self.add_term(m.clone(), &(v * c));
            }
        }
    }

    pub fn scale(&self, c: &RatFuncL) -> FieldExpr {
        if c.is_zero() {
            return FieldExpr::zero();
        }
        FieldExpr { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn scale_rational(&self, c: &BigRational) -> FieldExpr {
        if c.is_zero() {
            return FieldExpr::zero();
        }
        FieldExpr { terms: self.terms.iter().map(|(m, v)| (m.clone(), v.scale(c))).collect() }
    }

    /// Keeps the terms of the given weight.
    pub fn weight_component(&self, alg: &AlgebraPresentation, w: &BigRational) -> FieldExpr {
        FieldExpr {
            terms: self.terms.iter().filter(|(m, _)| &m.weight(alg) == w).map(|(m, v)| (m.clone(), v.clone())).collect(),
        }
    }

    /// Keeps the terms of the given charge.
    pub fn charge_component(&self, alg: &AlgebraPresentation, q: &BigRational) -> FieldExpr {
        FieldExpr {
            terms: self.terms.iter().filter(|(m, _)| &m.charge(alg) == q).map(|(m, v)| (m.clone(), v.clone())).collect(),
        }
    }

    /// The common weight of all terms, if there is exactly one (zero has none).
    pub fn homogeneous_weight(&self, alg: &AlgebraPresentation) -> Option<BigRational> {
        let mut it = self.terms.keys().map(|m| m.weight(alg));
        let w = it.next()?;
        it.all(|x| x == w).then_some(w)
    }

    pub fn homogeneous_charge(&self, alg: &AlgebraPresentation) -> Option<BigRational> {
        let mut it = self.terms.keys().map(|m| m.charge(alg));
        let q = it.next()?;
        it.all(|x| x == q).then_some(q)
    }

    /// Maximal filtration degree among the terms (0 for zero).
    pub fn degree(&self, alg: &AlgebraPresentation) -> usize {
        self.terms.keys().map(|m| m.degree(alg)).max().unwrap_or(0)
    }

    /// Whether every term has odd parity (false for zero).
    pub fn is_odd(&self, alg: &AlgebraPresentation) -> bool {
        self.terms.keys().next().is_some_and(|m| m.is_odd(alg))
    }

    /// Evaluates all coefficients at ℓ = `value`.
    pub fn specialize(&self, value: &BigRational) -> Result<FieldExpr, ScalarError> {
        let mut out = FieldExpr::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), &v.specialize_to_const(value)?);
        }
        Ok(out)
    }

    /// Renders in the expression grammar, using the generator names of `alg`.
    pub fn display<'a>(&'a self, alg: &'a AlgebraPresentation) -> print::DisplayField<'a> {
        print::DisplayField { expr: self, alg }
    }

    /// Renames generators through an index map (used when embedding into tensor products).
    pub fn reindex(&self, map: &[usize]) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (m, v) in &self.terms {
            let mut letters: Vec<Letter> =
                m.0.iter().map(|l| Letter { gen: map[l.gen as usize] as u16, deriv: l.deriv }).collect();
            letters.sort();
            out.add_term(Monomial(letters.into_iter().collect()), v);
        }
        out
    }
}

impl std::ops::Add for &FieldExpr {
    type Output = FieldExpr;
    fn add(self, rhs: &FieldExpr) -> FieldExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &RatFuncL::one());
        out
    }
}

impl std::ops::Sub for &FieldExpr {
    type Output = FieldExpr;
    fn sub(self, rhs: &FieldExpr) -> FieldExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &RatFuncL::from_int(-1));
        out
    }
}

impl std::ops::Neg for &FieldExpr {
    type Output = FieldExpr;
    fn neg(self) -> FieldExpr {
        self.scale(&RatFuncL::from_int(-1))
    }
}

impl std::ops::Add for FieldExpr {
    type Output = FieldExpr;
    fn add(mut self, rhs: FieldExpr) -> FieldExpr {
        self.add_scaled(&rhs, &RatFuncL::one());
        self
    }
}

impl std::ops::Sub for FieldExpr {
    type Output = FieldExpr;
    fn sub(mut self, rhs: FieldExpr) -> FieldExpr {
        self.add_scaled(&rhs, &RatFuncL::from_int(-1));
        self
    }
}

impl fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Generators plus the singular part of their OPEs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPresentation {
    pub name: String,
    generators: Vec<GeneratorInfo>,
    ope: BTreeMap<(usize, usize, u32), FieldExpr>,
    /// Set when all structure constants have been evaluated at a fixed ℓ.
    specialized_at: Option<BigRational>,
    weight_denominator: i64,
    scaled_weights: Vec<i64>,
}

impl AlgebraPresentation {
    pub fn new(name: &str) -> Self {
        AlgebraPresentation {
            name: name.to_string(),
            generators: Vec::new(),
            ope: BTreeMap::new(),
            specialized_at: None,
            weight_denominator: 1,
            scaled_weights: Vec::new(),
        }
    }

    pub fn add_generator(&mut self, g: GeneratorInfo) -> Result<usize, VertexError> {
        if self.generators.iter().any(|x| x.name == g.name) {
            return Err(VertexError::DuplicateGenerator(g.name));
        }
        if !g.weight.is_positive() {
            return Err(VertexError::BadWeight(g.weight.to_string(), g.name));
        }
        self.generators.push(g);
        self.rescale();
        Ok(self.generators.len() - 1)
    }

    fn rescale(&mut self) {
        let mut d = BigInt::one();
        for g in &self.generators {
            d = d.lcm(g.weight.denom());
        }
        let dd: i64 = d.clone().try_into().expect("weight denominator too large");
        self.weight_denominator = dd;
        self.scaled_weights = self
            .generators
            .iter()
            .map(|g| (g.weight.numer() * (&d / g.weight.denom())).try_into().expect("weight too large"))
            .collect();
    }

    /// Sets generator∘_n generator. Zero entries are removed.
    pub fn set_ope(&mut self, a: usize, b: usize, n: u32, value: FieldExpr) {
        if value.is_zero() {
            self.ope.remove(&(a, b, n));
        } else {
            self.ope.insert((a, b, n), value);
        }
    }

    pub fn ope(&self, a: usize, b: usize, n: u32) -> Option<&FieldExpr> {
        self.ope.get(&(a, b, n))
    }

    pub fn ope_entries(&self) -> impl Iterator<Item = (&(usize, usize, u32), &FieldExpr)> {
        self.ope.iter()
    }

    pub fn generators(&self) -> &[GeneratorInfo] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &GeneratorInfo {
        &self.generators[i]
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, VertexError> {
        self.generators.iter().position(|g| g.name == name).ok_or_else(|| VertexError::UnknownGenerator(name.into()))
    }

    /// The generator as a field, e.g. `alg.gen("J")`.
    pub fn gen(&self, name: &str) -> Result<FieldExpr, VertexError> {
        Ok(FieldExpr::generator(self.generator_index(name)?, 0))
    }

    pub fn specialized_at(&self) -> Option<&BigRational> {
        self.specialized_at.as_ref()
    }

    /// Evaluates every structure constant at ℓ = `value`.
    pub fn specialize(&self, value: &BigRational) -> Result<AlgebraPresentation, ScalarError> {
        let mut out = self.clone();
        for v in out.ope.values_mut() {
            *v = v.specialize(value)?;
        }
        out.ope.retain(|_, v| !v.is_zero());
        out.specialized_at = Some(value.clone());
        Ok(out)
    }

    pub(crate) fn weight_denominator(&self) -> i64 {
        self.weight_denominator
    }

    /// Weight of a monomial times the common weight denominator.
    pub(crate) fn scaled_weight(&self, m: &Monomial) -> i64 {
        m.0.iter().map(|l| self.scaled_weights[l.gen as usize] + l.deriv as i64 * self.weight_denominator).sum()
    }

    pub(crate) fn letter_is_odd(&self, l: Letter) -> bool {
        self.generators[l.gen as usize].parity.is_odd()
    }

    /// A shared engine over this presentation.
    pub fn engine(self) -> Arc<Engine> {
        Arc::new(Engine::new(self))
    }

    /// Tensor product: generators of `self` then `other`, cross OPEs zero.
    pub fn tensor(&self, other: &AlgebraPresentation) -> Result<AlgebraPresentation, VertexError> {
        let mut out = self.clone();
        out.name = format!("{}*{}", self.name, other.name);
        let offset = self.generators.len();
        for g in &other.generators {
            out.add_generator(g.clone())?;
        }
        let map: Vec<usize> = (0..other.generators.len()).map(|i| i + offset).collect();
        for (&(a, b, n), v) in &other.ope {
            out.set_ope(a + offset, b + offset, n, v.reindex(&map));
        }
        if self.specialized_at != other.specialized_at {
            out.specialized_at = None;
        }
        Ok(out)
    }
}
