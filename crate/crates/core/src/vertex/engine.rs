use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use parking_lot::RwLock;
use rustc_hash::FxHashMap;

use super::{AlgebraPresentation, FieldExpr, Letter, Monomial};
use crate::scalars::RatFuncL;

type Key = (Monomial, Monomial, i32);

/// Memoized normal-ordering engine over one presentation.
///
/// All products are computed on monomials and cached by `(a, b, n)`, with
/// `n = -1` for the Wick product. The cache is shared between threads behind
/// a read/write lock; results never depend on what is cached.
pub struct Engine {
    alg: AlgebraPresentation,
    products: RwLock<FxHashMap<Key, Arc<FieldExpr>>>,
    derivs: RwLock<FxHashMap<Monomial, Arc<FieldExpr>>>,
    caching: bool,
    zero: Arc<FieldExpr>,
}

pub(crate) fn inv_fact(k: usize) -> BigRational {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= i;
    }
    BigRational::new(BigInt::one(), f)
}

fn binom_int(n: usize, k: usize) -> BigRational {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    BigRational::from_integer(r)
}

fn falling(n: i32, k: usize) -> BigRational {
    let mut r = BigInt::one();
    for i in 0..k as i32 {
        r *= n - i;
    }
    BigRational::from_integer(r)
}

fn sign(neg: bool) -> BigRational {
    BigRational::from_integer(if neg { -BigInt::one() } else { BigInt::one() })
}

fn add_scaled_q(out: &mut FieldExpr, src: &FieldExpr, c: &RatFuncL, q: &BigRational) {
    if q.is_one() {
        out.add_scaled(src, c);
    } else {
        out.add_scaled(src, &c.scale(q));
    }
}

impl Engine {
    pub fn new(alg: AlgebraPresentation) -> Self {
        Engine {
            alg,
            products: RwLock::new(FxHashMap::default()),
            derivs: RwLock::new(FxHashMap::default()),
            caching: true,
            zero: Arc::new(FieldExpr::zero()),
        }
    }

    /// An engine that recomputes every subproduct; used to test cache independence.
    pub fn without_cache(alg: AlgebraPresentation) -> Self {
        Engine { caching: false, ..Engine::new(alg) }
    }

    pub fn algebra(&self) -> &AlgebraPresentation {
        &self.alg
    }

    pub fn cache_len(&self) -> usize {
        self.products.read().len()
    }

    pub fn clear_cache(&self) {
        self.products.write().clear();
        self.derivs.write().clear();
    }

    /// Snapshot of the product cache, sorted for reproducible serialization.
    pub fn cache_entries(&self) -> Vec<(Monomial, Monomial, i32, FieldExpr)> {
        let mut v: Vec<_> =
            self.products.read().iter().map(|((a, b, n), e)| (a.clone(), b.clone(), *n, (**e).clone())).collect();
        v.sort_by(|x, y| (&x.0, &x.1, x.2).cmp(&(&y.0, &y.1, y.2)));
        v
    }

    /// Inserts previously computed products.
    pub fn preload(&self, entries: impl IntoIterator<Item = (Monomial, Monomial, i32, FieldExpr)>) {
        let mut w = self.products.write();
        for (a, b, n, e) in entries {
            w.insert((a, b, n), Arc::new(e));
        }
    }

    /// a∘_n b for any integer n.
    pub fn nth_product(&self, a: &FieldExpr, b: &FieldExpr, n: i64) -> FieldExpr {
        let n = i32::try_from(n).expect("product index out of range");
        let mut out = FieldExpr::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                let p = self.prod_mono(ma, mb, n);
                if !p.is_zero() {
                    out.add_scaled(&p, &(ca * cb));
                }
            }
        }
        out
    }

    /// :ab: = a∘_{-1} b.
    pub fn wick(&self, a: &FieldExpr, b: &FieldExpr) -> FieldExpr {
        self.nth_product(a, b, -1)
    }

    /// Right-nested Wick product :x_1 x_2 … x_k: of arbitrary fields.
    pub fn wick_word(&self, items: &[FieldExpr]) -> FieldExpr {
        let Some((last, rest)) = items.split_last() else {
            return FieldExpr::vacuum();
        };
        let mut acc = last.clone();
        for x in rest.iter().rev() {
            acc = self.wick(x, &acc);
        }
        acc
    }

    /// The m-fold right-nested Wick power of `a` (m ≥ 1; m = 0 gives 𝟙).
    pub fn wick_power(&self, a: &FieldExpr, m: usize) -> FieldExpr {
        let items = vec![a.clone(); m];
        self.wick_word(&items)
    }

    pub fn derivative(&self, a: &FieldExpr) -> FieldExpr {
        let mut out = FieldExpr::zero();
        for (m, c) in a.iter() {
            let d = self.deriv_mono(m);
            out.add_scaled(&d, c);
        }
        out
    }

    pub fn derivative_k(&self, a: &FieldExpr, k: usize) -> FieldExpr {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.derivative(&x);
        }
        x
    }

    /// Normal form of the right-nested Wick product of the given letters in the given order.
    pub fn normalize_letters(&self, letters: &[Letter]) -> FieldExpr {
        if Monomial::is_normal(letters, &self.alg) {
            return FieldExpr::monomial(Monomial(letters.iter().copied().collect()));
        }
        let items: Vec<FieldExpr> = letters.iter().map(|l| FieldExpr::monomial(Monomial::letter(*l))).collect();
        self.wick_word(&items)
    }

    fn max_index(&self, a: &Monomial, b: &Monomial) -> i32 {
        let d = self.alg.weight_denominator();
        let w = self.alg.scaled_weight(a) + self.alg.scaled_weight(b);
        (w.div_euclid(d) - 1) as i32
    }

    fn koszul(&self, a: &Monomial, b: &Monomial) -> bool {
        a.is_odd(&self.alg) && b.is_odd(&self.alg)
    }

    fn lookup(&self, key: &Key) -> Option<Arc<FieldExpr>> {
        if !self.caching {
            return None;
        }
        self.products.read().get(key).cloned()
    }

    fn store(&self, key: Key, value: FieldExpr) -> Arc<FieldExpr> {
        let v = Arc::new(value);
        if self.caching {
            self.products.write().insert(key, v.clone());
        }
        v
    }

    /// The product a∘_n b of two normal monomials, in normal form.
    pub(crate) fn prod_mono(&self, a: &Monomial, b: &Monomial, n: i32) -> Arc<FieldExpr> {
        if n < -1 {
            let k = (-1 - n) as usize;
            if a.is_vacuum() {
                return self.zero.clone();
            }
            if b.is_vacuum() {
                return Arc::new(self.deriv_mono_k(a, k).scale_rational(&inv_fact(k)));
            }
            let key = (a.clone(), b.clone(), n);
            if let Some(v) = self.lookup(&key) {
                return v;
            }
            let da = self.deriv_mono_k(a, k);
            let q = inv_fact(k);
            let mut out = FieldExpr::zero();
            for (m, c) in da.iter() {
                let w = self.prod_mono(m, b, -1);
                add_scaled_q(&mut out, &w, c, &q);
            }
            return self.store(key, out);
        }
        if a.is_vacuum() {
            return if n == -1 { Arc::new(FieldExpr::monomial(b.clone())) } else { self.zero.clone() };
        }
        if b.is_vacuum() {
            return if n == -1 { Arc::new(FieldExpr::monomial(a.clone())) } else { self.zero.clone() };
        }
        if n >= 0 && n > self.max_index(a, b) {
            return self.zero.clone();
        }
        if n == -1 && a.len() == 1 {
            let (x, y) = (a.0[0], b.0[0]);
            if x < y || (x == y && !self.alg.letter_is_odd(x)) {
                return Arc::new(FieldExpr::monomial(b.prepend(x)));
            }
        }
        let key = (a.clone(), b.clone(), n);
        if let Some(v) = self.lookup(&key) {
            return v;
        }
        let out = if n == -1 { self.wick_impl(a, b) } else { self.positive_impl(a, b, n) };
        self.store(key, out)
    }

    fn wick_impl(&self, a: &Monomial, b: &Monomial) -> FieldExpr {
        let mut out = FieldExpr::zero();
        if a.len() == 1 {
            let x = a.0[0];
            let y = b.0[0];
            let xm = a;
            let bt = b.tail();
            if x == y {
                // Odd letter meeting itself: 2:x:xB':: = Σ_j (−1)^j (x∘_j x)∘_{−2−j} B'.
                for j in 0..=self.max_index(xm, xm).max(-1) {
                    let p = self.prod_mono(xm, xm, j);
                    let q = sign(j % 2 == 1) * BigRational::new(1.into(), 2.into());
                    for (m, c) in p.iter() {
                        let w = self.prod_mono(m, &bt, -2 - j);
                        add_scaled_q(&mut out, &w, c, &q);
                    }
                }
                return out;
            }
            // :x:yB':: = ±:y:xB':: + Σ_j (−1)^j (x∘_j y)∘_{−2−j} B'
            let ym = Monomial::letter(y);
            let s = sign(self.koszul(xm, &ym));
            let inner = self.prod_mono(xm, &bt, -1);
            for (m, c) in inner.iter() {
                let w = self.prod_mono(&ym, m, -1);
                add_scaled_q(&mut out, &w, c, &s);
            }
            for j in 0..=self.max_index(xm, &ym) {
                let p = self.prod_mono(xm, &ym, j);
                let q = sign(j % 2 == 1);
                for (m, c) in p.iter() {
                    let w = self.prod_mono(m, &bt, -2 - j);
                    add_scaled_q(&mut out, &w, c, &q);
                }
            }
            return out;
        }
        // :(:x A':) b: = Σ_{j≥0} x∘_{−1−j}(A'∘_{j−1} b) + ± Σ_{j≥0} A'∘_{−2−j}(x∘_j b)
        let xm = Monomial::letter(a.0[0]);
        let at = a.tail();
        let one = BigRational::one();
        let first = self.prod_mono(&at, b, -1);
        for (m, c) in first.iter() {
            let w = self.prod_mono(&xm, m, -1);
            add_scaled_q(&mut out, &w, c, &one);
        }
        for j in 1..=(self.max_index(&at, b) + 1) {
            let p = self.prod_mono(&at, b, j - 1);
            for (m, c) in p.iter() {
                let w = self.prod_mono(&xm, m, -1 - j);
                add_scaled_q(&mut out, &w, c, &one);
            }
        }
        let s = sign(self.koszul(&xm, &at));
        for j in 0..=self.max_index(&xm, b) {
            let p = self.prod_mono(&xm, b, j);
            for (m, c) in p.iter() {
                let w = self.prod_mono(&at, m, -2 - j);
                add_scaled_q(&mut out, &w, c, &s);
            }
        }
        out
    }

    fn positive_impl(&self, a: &Monomial, b: &Monomial, n: i32) -> FieldExpr {
        let mut out = FieldExpr::zero();
        if a.len() == 1 {
            let x = a.0[0];
            if x.deriv > 0 {
                // (∂^d g)∘_n b = (−1)^d n(n−1)…(n−d+1) g∘_{n−d} b
                let d = x.deriv as i32;
                if d > n {
                    return out;
                }
                let q = sign(d % 2 == 1) * falling(n, d as usize);
                let g = Monomial::letter(Letter { gen: x.gen, deriv: 0 });
                return self.prod_mono(&g, b, n - d).scale_rational(&q);
            }
            return self.gen_positive(x.gen as usize, a, b, n);
        }
        // (:x A':)∘_n b = Σ_{j≥0} x∘_{−1−j}(A'∘_{n+j} b) + ± Σ_{j≥0} A'∘_{n−1−j}(x∘_j b)
        let xm = Monomial::letter(a.0[0]);
        let at = a.tail();
        let one = BigRational::one();
        for j in 0..=(self.max_index(&at, b) - n).max(-1) {
            let p = self.prod_mono(&at, b, n + j);
            for (m, c) in p.iter() {
                let w = self.prod_mono(&xm, m, -1 - j);
                add_scaled_q(&mut out, &w, c, &one);
            }
        }
        let s = sign(self.koszul(&xm, &at));
        for j in 0..=self.max_index(&xm, b) {
            let p = self.prod_mono(&xm, b, j);
            for (m, c) in p.iter() {
                let w = self.prod_mono(&at, m, n - 1 - j);
                add_scaled_q(&mut out, &w, c, &s);
            }
        }
        out
    }

    /// g∘_n b for an underived generator g and n ≥ 0.
    fn gen_positive(&self, g: usize, gm: &Monomial, b: &Monomial, n: i32) -> FieldExpr {
        let mut out = FieldExpr::zero();
        if b.len() == 1 {
            // g∘_n ∂^e h = Σ_i binom(e,i) n(n−1)…(n−i+1) ∂^{e−i}(g∘_{n−i} h)
            let y = b.0[0];
            let e = y.deriv as usize;
            for i in 0..=e.min(n as usize) {
                let Some(entry) = self.alg.ope(g, y.gen as usize, (n - i as i32) as u32) else {
                    continue;
                };
                let q = binom_int(e, i) * falling(n, i);
                let d = self.derivative_k(entry, e - i);
                out.add_scaled(&d, &RatFuncL::from_rational(q));
            }
            return out;
        }
        // g∘_n :y B': = Σ_{j=0}^{n} binom(n,j) (g∘_j y)∘_{n−1−j} B' + ± :y (g∘_n B'):
        let ym = Monomial::letter(b.0[0]);
        let bt = b.tail();
        for j in 0..=n {
            let p = self.prod_mono(gm, &ym, j);
            let q = binom_int(n as usize, j as usize);
            for (m, c) in p.iter() {
                let w = self.prod_mono(m, &bt, n - 1 - j);
                add_scaled_q(&mut out, &w, c, &q);
            }
        }
        let s = sign(self.koszul(gm, &ym));
        let inner = self.prod_mono(gm, &bt, n);
        for (m, c) in inner.iter() {
            let w = self.prod_mono(&ym, m, -1);
            add_scaled_q(&mut out, &w, c, &s);
        }
        out
    }

    fn deriv_mono_k(&self, a: &Monomial, k: usize) -> FieldExpr {
        if k == 0 {
            return FieldExpr::monomial(a.clone());
        }
        let mut x = (*self.deriv_mono(a)).clone();
        for _ in 1..k {
            x = self.derivative(&x);
        }
        x
    }

    fn deriv_mono(&self, a: &Monomial) -> Arc<FieldExpr> {
        if a.is_vacuum() {
            return self.zero.clone();
        }
        if self.caching {
            if let Some(v) = self.derivs.read().get(a) {
                return v.clone();
            }
        }
        let mut out = FieldExpr::zero();
        let one = RatFuncL::one();
        for i in 0..a.len() {
            let mut letters: Vec<Letter> = a.0.to_vec();
            letters[i] = letters[i].derived(1);
            if Monomial::is_normal(&letters, &self.alg) {
                out.add_term(Monomial(letters.into_iter().collect()), &one);
                continue;
            }
            let suffix = Monomial(a.0[i + 1..].iter().copied().collect());
            let mut acc = (*self.prod_mono(&Monomial::letter(letters[i]), &suffix, -1)).clone();
            for k in (0..i).rev() {
                let xm = Monomial::letter(letters[k]);
                let mut next = FieldExpr::zero();
                for (m, c) in acc.iter() {
                    next.add_scaled(&self.prod_mono(&xm, m, -1), c);
                }
                acc = next;
            }
            out.add_scaled(&acc, &one);
        }
        let v = Arc::new(out);
        if self.caching {
            self.derivs.write().insert(a.clone(), v.clone());
        }
        v
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("algebra", &self.alg.name).field("cached", &self.cache_len()).finish()
    }
}

#[allow(dead_code)]
fn _assert_sync() {
    fn is_sync<T: Sync + Send>() {}
    is_sync::<Engine>();
    let _ = BigRational::zero();
}
