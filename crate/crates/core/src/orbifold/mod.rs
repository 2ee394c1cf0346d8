//! The charge-zero subalgebra of W^ℓ: normally ordered polynomials in chosen
//! generators, the C_n invariant, decoupling relations and commutant
//! corrections.

mod cn;
mod correction;
mod decoupling;
mod express;

pub use cn::{cn_coefficients, telescoping_terms, CnTable, Telescoping};
pub use correction::{correction_quadratics, solve_correction, Correction};
pub use decoupling::{solve_decoupling, Decoupler, DecouplingResult};
pub use express::{express_in_generators, Expressed, NotExpressible, WordOrder};

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::algebras::Catalog;
use crate::scalars::RatFuncL;
use crate::vertex::{format_term, join_terms, AlgebraPresentation, Engine, FieldExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbifoldError {
    #[error("{0} is not homogeneous in weight")]
    NotHomogeneous(String),
    #[error("expected weight {expected}, found {found}")]
    WrongWeight { expected: BigRational, found: BigRational },
    #[error("expected charge 0, found a term of charge {0}")]
    WrongCharge(BigRational),
    #[error("filtration degree {found} exceeds {max}")]
    DegreeTooHigh { found: usize, max: usize },
    #[error("generator '{0}' is missing from the presentation")]
    MissingGenerator(String),
    #[error("no decoupling relation for U[0,{target}]: the leading coefficient vanishes at l = {ell}")]
    NoDecoupling { target: usize, ell: BigRational },
    #[error("{0}")]
    Unsolvable(String),
}

/// One member of a [`GeneratorSet`].
#[derive(Debug, Clone)]
pub struct SetMember {
    pub name: String,
    pub field: FieldExpr,
    pub weight: BigRational,
    /// Filtration degree of the field.
    pub degree: usize,
    pub odd: bool,
}

/// Named homogeneous charge-zero fields used as letters of normally ordered polynomials.
#[derive(Debug, Clone, Default)]
pub struct GeneratorSet {
    members: Vec<SetMember>,
}

impl GeneratorSet {
    pub fn new() -> Self {
        GeneratorSet::default()
    }

    /// Appends a member; the order of insertion is the letter order of words.
    pub fn push(&mut self, alg: &AlgebraPresentation, name: &str, field: FieldExpr) -> Result<usize, OrbifoldError> {
        let weight = field.homogeneous_weight(alg).ok_or_else(|| OrbifoldError::NotHomogeneous(name.to_string()))?;
        if let Some((m, _)) = field.iter().find(|(m, _)| !m.charge(alg).is_zero()) {
            return Err(OrbifoldError::WrongCharge(m.charge(alg)));
        }
        let degree = field.degree(alg);
        let odd = field.is_odd(alg);
        self.members.push(SetMember { name: name.to_string(), field, weight, degree, odd });
        Ok(self.members.len() - 1)
    }

    /// `T, J, U[0,0], …, U[0,max_u]` in that order.
    pub fn standard(catalog: &Catalog, max_u: usize) -> Result<Self, OrbifoldError> {
        let mut s = GeneratorSet::new();
        let alg = catalog.engine().algebra();
        for g in ["T", "J"] {
            let f = alg.gen(g).map_err(|_| OrbifoldError::MissingGenerator(g.to_string()))?;
            s.push(alg, g, f)?;
        }
        for g in ["G+", "G-"] {
            alg.generator_index(g).map_err(|_| OrbifoldError::MissingGenerator(g.to_string()))?;
        }
        for m in 0..=max_u {
            s.push(alg, &format!("U[0,{m}]"), catalog.u(0, m))?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &SetMember {
        &self.members[i]
    }

    pub fn members(&self) -> &[SetMember] {
        &self.members
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name == name)
    }
}

/// A letter ∂^deriv(member) of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordLetter {
    pub gen: usize,
    pub deriv: usize,
}

impl Ord for WordLetter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gen.cmp(&other.gen).then(other.deriv.cmp(&self.deriv))
    }
}

impl PartialOrd for WordLetter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A sorted multiset of letters; denotes their right-nested Wick product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<WordLetter>);

impl Word {
    pub fn degree(&self, set: &GeneratorSet) -> usize {
        self.0.iter().map(|l| set.member(l.gen).degree).sum()
    }

    pub fn weight(&self, set: &GeneratorSet) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, l| acc + &set.member(l.gen).weight + BigRational::from_integer(l.deriv.into()))
    }
}

/// A factor of a term: the k-th derivative of a set member or of a nested polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub deriv: usize,
    pub node: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Gen(usize),
    Poly(Arc<GenPolynomial>),
}

/// Σ c · :f_1 f_2 … f_k: with right-nested Wick products of factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenPolynomial {
    pub terms: Vec<(RatFuncL, Vec<Factor>)>,
}

impl GenPolynomial {
    pub fn from_words(words: impl IntoIterator<Item = (Word, RatFuncL)>) -> Self {
        let terms = words
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| (c, w.0.iter().map(|l| Factor { deriv: l.deriv, node: Node::Gen(l.gen) }).collect()))
            .collect();
        GenPolynomial { terms }
    }

    /// The polynomial consisting of the single member `gen`.
    pub fn generator(gen: usize) -> Self {
        GenPolynomial { terms: vec![(RatFuncL::one(), vec![Factor { deriv: 0, node: Node::Gen(gen) }])] }
    }

    pub fn scale(&self, c: &RatFuncL) -> Self {
        GenPolynomial { terms: self.terms.iter().map(|(x, f)| (x * c, f.clone())).filter(|(x, _)| !x.is_zero()).collect() }
    }

    pub fn extend(&mut self, other: &GenPolynomial, c: &RatFuncL) {
        for (x, f) in &other.terms {
            let v = x * c;
            if !v.is_zero() {
                self.terms.push((v, f.clone()));
            }
        }
    }

    /// Coefficient of the term consisting of the bare member `gen` (no derivative).
    pub fn linear_coefficient(&self, gen: usize) -> RatFuncL {
        let mut c = RatFuncL::zero();
        for (x, f) in &self.terms {
            if let [Factor { deriv: 0, node: Node::Gen(g) }] = f.as_slice() {
                if *g == gen {
                    c += x;
                }
            }
        }
        c
    }

    /// Removes every term consisting of the bare member `gen`.
    pub fn without_linear(&self, gen: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, f)| !matches!(f.as_slice(), [Factor { deriv: 0, node: Node::Gen(g) }] if *g == gen))
            .cloned()
            .collect();
        GenPolynomial { terms }
    }

    /// Set members appearing anywhere, including inside nested polynomials.
    pub fn members_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_members(&mut out);
        out
    }

    fn collect_members(&self, out: &mut BTreeSet<usize>) {
        for (_, fs) in &self.terms {
            for f in fs {
                match &f.node {
                    Node::Gen(g) => {
                        out.insert(*g);
                    }
                    Node::Poly(p) => p.collect_members(out),
                }
            }
        }
    }

    /// Replaces every occurrence of member `gen` by `value`.
    pub fn substitute(&self, gen: usize, value: &Arc<GenPolynomial>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, fs)| {
                let fs = fs
                    .iter()
                    .map(|f| Factor {
                        deriv: f.deriv,
                        node: match &f.node {
                            Node::Gen(g) if *g == gen => Node::Poly(value.clone()),
                            Node::Gen(g) => Node::Gen(*g),
                            Node::Poly(p) => Node::Poly(Arc::new(p.substitute(gen, value))),
                        },
                    })
                    .collect();
                (c.clone(), fs)
            })
            .collect();
        GenPolynomial { terms }
    }

    /// The field denoted by the polynomial.
    pub fn eval(&self, engine: &Engine, set: &GeneratorSet) -> FieldExpr {
        let mut memo = HashMap::new();
        self.eval_memo(engine, set, &mut memo)
    }

    fn eval_memo(&self, engine: &Engine, set: &GeneratorSet, memo: &mut HashMap<(usize, usize), FieldExpr>) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (c, fs) in &self.terms {
            let items: Vec<FieldExpr> = fs
                .iter()
                .map(|f| match &f.node {
                    Node::Gen(g) => engine.derivative_k(&set.member(*g).field, f.deriv),
                    Node::Poly(p) => {
                        let key = (Arc::as_ptr(p) as usize, f.deriv);
                        if let Some(v) = memo.get(&key) {
                            return v.clone();
                        }
                        let v = engine.derivative_k(&p.eval_memo(engine, set, memo), f.deriv);
                        memo.insert(key, v.clone());
                        v
                    }
                })
                .collect();
            out.add_scaled(&engine.wick_word(&items), c);
        }
        out
    }

    /// Renders in the expression grammar using the member names.
    pub fn to_text(&self, set: &GeneratorSet) -> String {
        join_terms(self.terms.iter().map(|(c, fs)| {
            let body = match fs.as_slice() {
                [] => None,
                [f] => Some(factor_text(f, set, false)),
                fs => {
                    let inner: Vec<String> = fs.iter().map(|f| factor_text(f, set, true)).collect();
                    Some(format!(":{}:", inner.join(" ")))
                }
            };
            format_term(c, body.as_deref())
        }))
    }
}

fn factor_text(f: &Factor, set: &GeneratorSet, inside: bool) -> String {
    let base = match &f.node {
        Node::Gen(g) => set.member(*g).name.clone(),
        Node::Poly(p) => format!("({})", p.to_text(set)),
    };
    let mut s = String::new();
    match f.deriv {
        0 => s.push_str(&base),
        1 => write!(s, "d {base}").unwrap(),
        k => write!(s, "d^{k} {base}").unwrap(),
    }
    if inside && f.deriv > 0 {
        format!("({s})")
    } else {
        s
    }
}

/// Whether h∘_n v = 0 for every n ≥ 0 (checked up to the grading bound).
pub fn commutant_check(engine: &Engine, v: &FieldExpr, h: &FieldExpr) -> bool {
    let alg = engine.algebra();
    let top = |f: &FieldExpr| f.iter().map(|(m, _)| m.weight(alg)).max().unwrap_or_else(BigRational::zero);
    let bound: i64 = (top(v) + top(h)).ceil().to_integer().try_into().unwrap_or(0);
    (0..=bound).all(|n| engine.nth_product(h, v, n).is_zero())
}
