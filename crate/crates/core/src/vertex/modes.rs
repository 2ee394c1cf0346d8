use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{basis, AlgebraPresentation, Engine, FieldExpr, Monomial, VertexError};
use crate::scalars::{solve_sparse, RatFuncL, SparseRow};

const VARS: [&str; 3] = ["m", "n", "p"];

/// A polynomial in up to three mode indices m, n, p over ℚ(ℓ).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct IndexPoly {
    terms: BTreeMap<[u32; 3], RatFuncL>,
}

impl IndexPoly {
    pub fn zero() -> Self {
        IndexPoly::default()
    }

    pub fn constant(c: RatFuncL) -> Self {
        let mut p = IndexPoly::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    pub fn rational(c: BigRational) -> Self {
        Self::constant(RatFuncL::from_rational(c))
    }

    /// The index variable with position `i` (0 = m, 1 = n, 2 = p).
    pub fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        let mut p = IndexPoly::zero();
        p.add_term(e, RatFuncL::one());
        p
    }

    pub fn m() -> Self {
        Self::var(0)
    }

    pub fn n() -> Self {
        Self::var(1)
    }

    pub fn p() -> Self {
        Self::var(2)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &RatFuncL)> {
        self.terms.iter()
    }

    fn add_term(&mut self, e: [u32; 3], c: RatFuncL) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(RatFuncL::zero);
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &RatFuncL) -> IndexPoly {
        let mut out = IndexPoly::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    /// Generalized binomial coefficient x(x−1)…(x−j+1)/j!.
    pub fn binom(x: &IndexPoly, j: usize) -> IndexPoly {
        let mut acc = IndexPoly::rational(BigRational::one());
        for i in 0..j {
            let f = x - &IndexPoly::rational(BigRational::from_integer(BigInt::from(i)));
            acc = &acc * &f;
        }
        acc.scale(&RatFuncL::from_rational(super::engine::inv_fact(j)))
    }

    /// Substitutes each variable by a polynomial.
    pub fn substitute(&self, vals: &[IndexPoly; 3]) -> IndexPoly {
        let mut out = IndexPoly::zero();
        for (e, c) in &self.terms {
            let mut t = IndexPoly::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = &t * &vals[i];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Evaluates at rational indices.
    pub fn eval(&self, at: [&BigRational; 3]) -> RatFuncL {
        let mut out = RatFuncL::zero();
        for (e, c) in &self.terms {
            let mut f = BigRational::one();
            for i in 0..3 {
                for _ in 0..e[i] {
                    f *= at[i];
                }
            }
            out += &c.scale(&f);
        }
        out
    }
}

impl std::ops::Add for &IndexPoly {
    type Output = IndexPoly;
    fn add(self, rhs: &IndexPoly) -> IndexPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &IndexPoly {
    type Output = IndexPoly;
    fn sub(self, rhs: &IndexPoly) -> IndexPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl std::ops::Mul for &IndexPoly {
    type Output = IndexPoly;
    fn mul(self, rhs: &IndexPoly) -> IndexPoly {
        let mut out = IndexPoly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], x * y);
            }
        }
        out
    }
}

impl fmt::Display for IndexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.numer().leading().is_negative();
            let c = if neg { -c } else { c.clone() };
            let mut s = c.to_string();
            if s.contains(['+', '-']) {
                s = format!("({s})");
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { VARS[i].to_string() } else { format!("{}^{k}", VARS[i]) })
                .collect();
            let body = match (vars.is_empty(), s.as_str()) {
                (true, _) => s,
                (false, "1") => vars.join("*"),
                (false, _) => format!("{s}*{}", vars.join("*")),
            };
            match (k, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IndexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// How mode indices of half-integer-weight fields are labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeConvention {
    /// a(z) = Σ a_n z^{−n−Δ}; half-integer fields have half-integer modes.
    Standard,
    /// Half-integer-weight fields of positive charge are expanded as Σ a_n z^{−n−Δ−1/2},
    /// those of negative charge as Σ a_n z^{−n−Δ+1/2}; all indices are integers.
    Shifted,
}

impl ModeConvention {
    /// Standard index minus labelled index for a field of the given weight and charge.
    pub fn shift(self, weight: &BigRational, charge: &BigRational) -> BigRational {
        if self == ModeConvention::Standard || weight.is_integer() {
            return BigRational::zero();
        }
        let half = BigRational::new(1.into(), 2.into());
        if charge.is_negative() {
            -half
        } else if charge.is_positive() {
            half
        } else {
            BigRational::zero()
        }
    }
}

/// The commutator [a_m, b_n] = Σ_φ P_φ(m, n) φ_{m+n+offset} + C(m) δ_{m+n+offset,0}.
///
/// Each φ is a monomial that is not a total derivative in the chosen complement;
/// derivative fields have been rewritten via (∂φ)_k = −(k + Δ_φ) φ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBracket {
    pub convention: ModeConvention,
    pub terms: BTreeMap<Monomial, IndexPoly>,
    /// Coefficient of δ, as a polynomial in m (n eliminated through the δ constraint).
    pub central: IndexPoly,
    pub index_offset: BigRational,
}

impl ModeBracket {
    pub fn coefficient(&self, m: &Monomial) -> IndexPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn to_text(&self, alg: &AlgebraPresentation) -> String {
        let mut parts = Vec::new();
        let idx = if self.index_offset.is_zero() { "m+n".to_string() } else { format!("m+n+({})", self.index_offset) };
        for (m, p) in &self.terms {
            let mut name = String::new();
            super::print::write_monomial(&mut name, alg, m).unwrap();
            parts.push(format!("({p})*({name})_{{{idx}}}"));
        }
        if !self.central.is_zero() {
            parts.push(format!("({})*delta({idx},0)", self.central));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Splits fields into derivatives plus a fixed complement of ∂V, weight by weight.
struct DerivReducer<'a> {
    engine: &'a Engine,
    /// weight → (basis of V_{w-1}, complement monomials of V_w)
    blocks: HashMap<BigRational, (Vec<Monomial>, Vec<Monomial>, Vec<FieldExpr>)>,
}

impl<'a> DerivReducer<'a> {
    fn new(engine: &'a Engine) -> Self {
        DerivReducer { engine, blocks: HashMap::new() }
    }

    fn block(&mut self, w: &BigRational) -> &(Vec<Monomial>, Vec<Monomial>, Vec<FieldExpr>) {
        if !self.blocks.contains_key(w) {
            let alg = self.engine.algebra();
            let lower_w = w - BigRational::one();
            let lower = if lower_w.is_positive() { basis::weight_basis_all_charges(alg, &lower_w) } else { Vec::new() };
            let images: Vec<FieldExpr> =
                lower.iter().map(|y| self.engine.derivative(&FieldExpr::monomial(y.clone()))).collect();
            let mut upper = basis::weight_basis_all_charges(alg, w);
            let derivs = |m: &Monomial| m.letters().iter().map(|l| l.deriv as usize).sum::<usize>();
            upper.sort_by(|a, b| (derivs(a), a).cmp(&(derivs(b), b)));
            let mut comp: Vec<Monomial> = Vec::new();
            for z in &upper {
                let mut cols = images.clone();
                cols.extend(comp.iter().map(|c| FieldExpr::monomial(c.clone())));
                if !in_span(&cols, &FieldExpr::monomial(z.clone())) {
                    comp.push(z.clone());
                }
            }
            self.blocks.insert(w.clone(), (lower, comp, images));
        }
        &self.blocks[w]
    }

    /// Rewrites Σ c_X X_k (all X of weight w, mode index k) in complement fields.
    fn reduce(&mut self, x: &FieldExpr, w: &BigRational, k: &IndexPoly, out: &mut BTreeMap<Monomial, IndexPoly>) {
        if x.is_zero() {
            return;
        }
        if w.is_zero() {
            let c = x.vacuum_coefficient();
            add_into(out, Monomial::vacuum(), IndexPoly::constant(c));
            return;
        }
        let (lower, comp, images) = self.block(w).clone();
        let mut cols = images.clone();
        cols.extend(comp.iter().map(|c| FieldExpr::monomial(c.clone())));
        let sol = solve_columns(&cols, x).expect("derivatives and complement span the weight space");
        let lower_w = w - BigRational::one();
        // (∂y)_k = −(k + Δ_y) y_k
        let factor = &IndexPoly::rational(-BigRational::one())
            * &(k + &IndexPoly::rational(lower_w.clone()));
        let mut y = FieldExpr::zero();
        for (i, m) in lower.iter().enumerate() {
            y.add_term(m.clone(), &sol[i]);
        }
        for (i, m) in comp.iter().enumerate() {
            add_into(out, m.clone(), IndexPoly::constant(sol[lower.len() + i].clone()));
        }
        if !y.is_zero() {
            let mut sub = BTreeMap::new();
            self.reduce(&y, &lower_w, k, &mut sub);
            for (m, p) in sub {
                add_into(out, m, &p * &factor);
            }
        }
    }
}

fn add_into(out: &mut BTreeMap<Monomial, IndexPoly>, m: Monomial, p: IndexPoly) {
    let slot = out.entry(m.clone()).or_default();
    *slot = &*slot + &p;
    if slot.is_zero() {
        out.remove(&m);
    }
}

fn columns_to_rows(cols: &[FieldExpr], target: &FieldExpr) -> (Vec<SparseRow>, Vec<RatFuncL>) {
    let mut index: BTreeMap<&Monomial, usize> = BTreeMap::new();
    for c in cols.iter().chain(std::iter::once(target)) {
        for m in c.terms().keys() {
            let n = index.len();
            index.entry(m).or_insert(n);
        }
    }
    let mut rows: Vec<SparseRow> = vec![Vec::new(); index.len()];
    for (j, c) in cols.iter().enumerate() {
        for (m, v) in c.iter() {
            rows[index[m]].push((j, v.clone()));
        }
    }
    let mut rhs = vec![RatFuncL::zero(); index.len()];
    for (m, v) in target.iter() {
        rhs[index[m]] = v.clone();
    }
    (rows, rhs)
}

fn in_span(cols: &[FieldExpr], target: &FieldExpr) -> bool {
    let (rows, rhs) = columns_to_rows(cols, target);
    solve_sparse(cols.len(), &rows, &rhs).is_consistent()
}

fn solve_columns(cols: &[FieldExpr], target: &FieldExpr) -> Option<Vec<RatFuncL>> {
    let (rows, rhs) = columns_to_rows(cols, target);
    solve_sparse(cols.len(), &rows, &rhs).particular().map(|p| p.to_vec())
}

fn weight_of(alg: &AlgebraPresentation, a: &FieldExpr) -> Result<BigRational, VertexError> {
    if a.is_zero() {
        return Ok(BigRational::zero());
    }
    a.homogeneous_weight(alg).ok_or(VertexError::NotHomogeneous)
}

fn charge_of(alg: &AlgebraPresentation, a: &FieldExpr) -> BigRational {
    a.homogeneous_charge(alg).unwrap_or_else(BigRational::zero)
}

/// Σ_j binom(k + Δ_a − 1, j) (a∘_j b), as field-valued polynomials; k is a's standard index.
fn commutator_terms(
    engine: &Engine,
    a: &FieldExpr,
    b: &FieldExpr,
    k: &IndexPoly,
) -> Result<Vec<(IndexPoly, FieldExpr)>, VertexError> {
    let alg = engine.algebra();
    let wa = weight_of(alg, a)?;
    let wb = weight_of(alg, b)?;
    let arg = k + &IndexPoly::rational(&wa - BigRational::one());
    let top = (&wa + &wb).floor().to_integer();
    let top: i64 = top.try_into().unwrap_or(0);
    let mut out = Vec::new();
    for j in 0..top.max(0) {
        let prod = engine.nth_product(a, b, j);
        if !prod.is_zero() {
            out.push((IndexPoly::binom(&arg, j as usize), prod));
        }
    }
    Ok(out)
}

/// [a_m, b_n] for homogeneous a, b.
pub fn mode_bracket(
    engine: &Engine,
    a: &FieldExpr,
    b: &FieldExpr,
    convention: ModeConvention,
) -> Result<ModeBracket, VertexError> {
    let alg = engine.algebra();
    let wa = weight_of(alg, a)?;
    let wb = weight_of(alg, b)?;
    let sa = convention.shift(&wa, &charge_of(alg, a));
    let sb = convention.shift(&wb, &charge_of(alg, b));
    let m_std = &IndexPoly::m() + &IndexPoly::rational(sa.clone());
    let n_std = &IndexPoly::n() + &IndexPoly::rational(sb.clone());
    let p_std = &m_std + &n_std;
    let wr = &wa + &wb;
    let qr = charge_of(alg, a) + charge_of(alg, b);
    let mut reducer = DerivReducer::new(engine);
    let mut fields: BTreeMap<Monomial, IndexPoly> = BTreeMap::new();
    for (coef, prod) in commutator_terms(engine, a, b, &m_std)? {
        let w = prod.homogeneous_weight(alg).unwrap_or_else(BigRational::zero);
        let mut part = BTreeMap::new();
        reducer.reduce(&prod, &w, &p_std, &mut part);
        for (m, p) in part {
            add_into(&mut fields, m, &p * &coef);
        }
    }
    let result_weight = fields.keys().next().map(|m| m.weight(alg)).unwrap_or_else(|| wr.clone());
    let sr = convention.shift(&result_weight, &qr);
    let offset = &sa + &sb - &sr;
    let mut central = IndexPoly::zero();
    if let Some(c) = fields.remove(&Monomial::vacuum()) {
        // δ_{m+n+sa+sb,0}: eliminate n.
        let n_val = &IndexPoly::rational(-(&sa + &sb)) - &IndexPoly::m();
        central = c.substitute(&[IndexPoly::m(), n_val, IndexPoly::p()]);
    }
    Ok(ModeBracket { convention, terms: fields, central, index_offset: offset })
}

/// Result of [`jacobi_check`]: the defect polynomial per complement field.
#[derive(Debug, Clone)]
pub struct JacobiDefect {
    pub defect: BTreeMap<Monomial, IndexPoly>,
}

impl JacobiDefect {
    pub fn holds(&self) -> bool {
        self.defect.is_empty()
    }
}

/// Checks [a_m, [b_n, c_p]] = [[a_m, b_n], c_p] + (−1)^{|a||b|} [b_n, [a_m, c_p]]
/// as an identity of polynomials in m, n, p (standard convention).
pub fn jacobi_check(engine: &Engine, a: &FieldExpr, b: &FieldExpr, c: &FieldExpr) -> Result<JacobiDefect, VertexError> {
    let alg = engine.algebra();
    let (m, n, p) = (IndexPoly::m(), IndexPoly::n(), IndexPoly::p());
    let total = &(&m + &n) + &p;
    let mut acc: BTreeMap<Monomial, IndexPoly> = BTreeMap::new();
    let mut reducer = DerivReducer::new(engine);
    let mut push = |acc: &mut BTreeMap<Monomial, IndexPoly>, coef: &IndexPoly, f: &FieldExpr, sign: i64| {
        if f.is_zero() {
            return;
        }
        let w = f.homogeneous_weight(alg).unwrap_or_else(BigRational::zero);
        let mut part = BTreeMap::new();
        reducer.reduce(f, &w, &total, &mut part);
        let s = IndexPoly::rational(BigRational::from_integer(sign.into()));
        for (mono, q) in part {
            add_into(acc, mono, &(&q * coef) * &s);
        }
    };
    // [a_m, [b_n, c_p]]
    for (cj, bc) in commutator_terms(engine, b, c, &n)? {
        for (ci, abc) in commutator_terms(engine, a, &bc, &m)? {
            push(&mut acc, &(&cj * &ci), &abc, 1);
        }
    }
    // [[a_m, b_n], c_p]
    for (cj, ab) in commutator_terms(engine, a, b, &m)? {
        let mn = &m + &n;
        for (ci, abc) in commutator_terms(engine, &ab, c, &mn)? {
            push(&mut acc, &(&cj * &ci), &abc, -1);
        }
    }
    // ± [b_n, [a_m, c_p]]
    let s = if a.is_odd(alg) && b.is_odd(alg) { 1 } else { -1 };
    for (cj, ac) in commutator_terms(engine, a, c, &m)? {
        for (ci, bac) in commutator_terms(engine, b, &ac, &n)? {
            push(&mut acc, &(&cj * &ci), &bac, s);
        }
    }
    Ok(JacobiDefect { defect: acc })
}
