use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use super::{GenPolynomial, GeneratorSet, Word, WordLetter};
use crate::scalars::{solve_sparse, RatFuncL, SparseRow};
use crate::vertex::{Engine, FieldExpr, Monomial};

/// How a word is turned into a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WordOrder {
    /// Letters nested in word order: `:T (:J U:)`.
    #[default]
    Forward,
    /// Letters nested in reverse word order: `:U (:J T:)`.
    Reverse,
}

/// A successful representation of a field over a generator set.
#[derive(Debug, Clone)]
pub struct Expressed {
    pub polynomial: GenPolynomial,
    /// Number of candidate words.
    pub words: usize,
    /// Dimension of the space of representations (0 when unique).
    pub nullity: usize,
}

/// The field is not in the span of the candidate words.
#[derive(Debug, Clone)]
pub struct NotExpressible {
    /// Remainder after reducing against the span of all candidate words.
    pub residual: FieldExpr,
    pub words: usize,
    pub rank: usize,
}

/// All words of the given weight with filtration degree at most `max_degree`,
/// ordered by (degree, word).
pub fn candidate_words(set: &GeneratorSet, weight: &BigRational, max_degree: usize) -> Vec<Word> {
    let mut letters: Vec<(WordLetter, BigRational)> = Vec::new();
    for (g, m) in set.members().iter().enumerate() {
        let mut k = 0usize;
        loop {
            let w = &m.weight + BigRational::from_integer(k.into());
            if &w > weight || (m.weight.is_zero() && k > 0) {
                break;
            }
            if w > BigRational::zero() {
                letters.push((WordLetter { gen: g, deriv: k }, w));
            }
            k += 1;
        }
    }
    letters.sort_by_key(|a| a.0);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(set, &letters, 0, weight.clone(), max_degree, &mut cur, &mut out);
    out.sort_by_cached_key(|w| (w.degree(set), w.clone()));
    out
}

fn rec(
    set: &GeneratorSet,
    letters: &[(WordLetter, BigRational)],
    start: usize,
    remaining: BigRational,
    budget: usize,
    cur: &mut Vec<WordLetter>,
    out: &mut Vec<Word>,
) {
    if remaining.is_zero() {
        if !cur.is_empty() {
            out.push(Word(cur.clone()));
        }
        return;
    }
    for i in start..letters.len() {
        let (l, w) = &letters[i];
        let d = set.member(l.gen).degree;
        if w > &remaining || d > budget {
            continue;
        }
        cur.push(*l);
        let next = if set.member(l.gen).odd { i + 1 } else { i };
        rec(set, letters, next, &remaining - w, budget - d, cur, out);
        cur.pop();
    }
}

/// The normal form of a word under the given nesting order.
pub fn word_field(engine: &Engine, set: &GeneratorSet, word: &Word, order: WordOrder) -> FieldExpr {
    let mut items: Vec<FieldExpr> = word.0.iter().map(|l| engine.derivative_k(&set.member(l.gen).field, l.deriv)).collect();
    if order == WordOrder::Reverse {
        items.reverse();
    }
    engine.wick_word(&items)
}

/// Writes `omega` as a normally ordered polynomial in the members of `set`
/// using words of filtration degree at most `max_degree`.
///
/// The candidate words are normalized and the linear system over ℚ(ℓ) is
/// solved exactly; free variables are set to zero, so the result is
/// deterministic. On failure the residual of `omega` modulo the span of all
/// candidate words is returned.
pub fn express_in_generators(
    engine: &Engine,
    omega: &FieldExpr,
    set: &GeneratorSet,
    max_degree: usize,
    order: WordOrder,
) -> Result<Expressed, NotExpressible> {
    let alg = engine.algebra();
    if omega.is_zero() {
        return Ok(Expressed { polynomial: GenPolynomial::default(), words: 0, nullity: 0 });
    }
    let fail = |words: usize| NotExpressible { residual: omega.clone(), words, rank: 0 };
    let Some(weight) = omega.homogeneous_weight(alg) else { return Err(fail(0)) };
    if omega.iter().any(|(m, _)| !m.charge(alg).is_zero()) {
        return Err(fail(0));
    }
    let words = candidate_words(set, &weight, max_degree);
    let vectors: Vec<FieldExpr> = words.par_iter().map(|w| word_field(engine, set, w, order)).collect();

    let mut row_of: HashMap<&Monomial, usize> = HashMap::new();
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut rhs: Vec<RatFuncL> = Vec::new();
    for (j, v) in vectors.iter().enumerate() {
        for (m, c) in v.iter() {
            let r = *row_of.entry(m).or_insert_with(|| {
                rows.push(Vec::new());
                rhs.push(RatFuncL::zero());
                rows.len() - 1
            });
            rows[r].push((j, c.clone()));
        }
    }
    for (m, c) in omega.iter() {
        match row_of.get(m) {
            Some(&r) => rhs[r] = c.clone(),
            None => {
                rows.push(Vec::new());
                rhs.push(c.clone());
            }
        }
    }
    let sol = solve_sparse(words.len(), &rows, &rhs);
    match sol.particular() {
        Some(x) => {
            let polynomial = GenPolynomial::from_words(words.iter().cloned().zip(x.iter().cloned()));
            Ok(Expressed { polynomial, words: words.len(), nullity: sol.nullspace().len() })
        }
        None => Err(NotExpressible { residual: reduce(&vectors, omega), words: words.len(), rank: sol.rank }),
    }
}

/// `target` reduced modulo the span of `vectors` by echelon elimination on leading monomials.
fn reduce(vectors: &[FieldExpr], target: &FieldExpr) -> FieldExpr {
    let mut basis: BTreeMap<Monomial, FieldExpr> = BTreeMap::new();
    for v in vectors {
        let mut v = v.clone();
        loop {
            let Some((lead, c)) = v.terms().iter().next_back().map(|(m, c)| (m.clone(), c.clone())) else { break };
            match basis.get(&lead) {
                Some(b) => v.add_scaled(b, &-c),
                None => {
                    let inv = RatFuncL::one() / c;
                    basis.insert(lead, v.scale(&inv));
                    break;
                }
            }
        }
    }
    let mut r = target.clone();
    let keys: Vec<Monomial> = r.terms().keys().rev().cloned().collect();
    let mut pending = keys;
    while let Some(m) = pending.first().cloned() {
        pending.remove(0);
        let c = r.coefficient(&m);
        if c.is_zero() {
            continue;
        }
        if let Some(b) = basis.get(&m) {
            r.add_scaled(b, &-c);
            pending = r.terms().keys().rev().filter(|k| *k < &m).cloned().collect();
        }
    }
    r
}
