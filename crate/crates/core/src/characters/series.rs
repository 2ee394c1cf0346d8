use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use parking_lot::Mutex;

/// Exponents of q are exact rationals.
pub type Exp = Rational64;

/// Coefficient rings for truncated series.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn c_zero() -> Self;
    fn c_one() -> Self;
    fn c_is_zero(&self) -> bool;
    fn c_add(&self, other: &Self) -> Self;
    fn c_mul(&self, other: &Self) -> Self;
    fn c_neg(&self) -> Self;
    /// Multiplicative inverse when it exists in the ring. Series inversion only needs unit
    /// leading terms, so Laurent polynomials invert monomials and cyclotomics invert rationals.
    fn c_inv(&self) -> Option<Self>;
    fn from_rational(r: &BigRational) -> Self;
}

impl Coeff for BigRational {
    fn c_zero() -> Self {
        Zero::zero()
    }
    fn c_one() -> Self {
        One::one()
    }
    fn c_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn c_add(&self, other: &Self) -> Self {
        self + other
    }
    fn c_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn c_neg(&self) -> Self {
        -self
    }
    fn c_inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Laurent polynomials in z with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LaurentZ(BTreeMap<i64, BigRational>);

impl LaurentZ {
    pub fn monomial(k: i64, c: BigRational) -> LaurentZ {
        let mut m = BTreeMap::new();
        if !Zero::is_zero(&c) {
            m.insert(k, c);
        }
        LaurentZ(m)
    }

    pub fn z(k: i64) -> LaurentZ {
        LaurentZ::monomial(k, One::one())
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigRational> {
        &self.0
    }

    pub fn coefficient(&self, k: i64) -> BigRational {
        self.0.get(&k).cloned().unwrap_or_else(Zero::zero)
    }

    /// Replaces z by z^{-1}.
    pub fn invert_z(&self) -> LaurentZ {
        LaurentZ(self.0.iter().map(|(k, c)| (-k, c.clone())).collect())
    }

    pub fn at_one(&self) -> BigRational {
        self.0.values().fold(<BigRational as Zero>::zero(), |a, c| a + c)
    }

    /// Substitutes z = ζ_m^k.
    pub fn at_root(&self, m: u32, k: i64) -> Cyclotomic {
        let mut out = Cyclotomic::c_zero();
        for (e, c) in &self.0 {
            out = Coeff::c_add(&out, &Cyclotomic::root(m, e * k).scale(c));
        }
        out
    }

    fn insert_add(&mut self, k: i64, c: BigRational) {
        let slot = self.0.entry(k).or_insert_with(<BigRational as Zero>::zero);
        *slot += c;
        if Zero::is_zero(slot) {
            self.0.remove(&k);
        }
    }
}

impl Coeff for LaurentZ {
    fn c_zero() -> Self {
        LaurentZ::default()
    }
    fn c_one() -> Self {
        LaurentZ::z(0)
    }
    fn c_is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn c_add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.insert_add(*k, c.clone());
        }
        out
    }
    fn c_mul(&self, other: &Self) -> Self {
        let mut out = LaurentZ::default();
        for (a, x) in &self.0 {
            for (b, y) in &other.0 {
                out.insert_add(a + b, x * y);
            }
        }
        out
    }
    fn c_neg(&self) -> Self {
        LaurentZ(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }
    fn c_inv(&self) -> Option<Self> {
        match self.0.iter().next() {
            Some((k, c)) if self.0.len() == 1 => Some(LaurentZ::monomial(-k, c.recip())),
            _ => None,
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        LaurentZ::monomial(0, r.clone())
    }
}

impl fmt::Display for LaurentZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, c)| match *k {
                0 => c.to_string(),
                _ => {
                    let z = if *k == 1 { "z".to_string() } else { format!("z^{k}") };
                    if c.is_one() {
                        z
                    } else if *c == -<BigRational as One>::one() {
                        format!("-{z}")
                    } else {
                        format!("{c}*{z}")
                    }
                }
            })
            .collect();
        write!(f, "{}", join_signed(&parts))
    }
}

/// Elements of Q(ζ_m), ζ_m = e^{2πi/m}, kept reduced modulo the m-th cyclotomic polynomial.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    m: u32,
    c: Vec<BigRational>,
}

fn poly_divide_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic.
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![BigInt::zero(); rem.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn].clone();
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= &c * d;
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(|x| x.is_zero()));
    q
}

/// Coefficients of Φ_m, lowest degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); m as usize + 1];
    p[0] = -BigInt::one();
    p[m as usize] = BigInt::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = poly_divide_exact(&p, &cyclotomic_polynomial(d));
        }
    }
    p
}

fn cached_cyclotomic(m: u32) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    cache.lock().entry(m).or_insert_with(|| Arc::new(cyclotomic_polynomial(m))).clone()
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Cyclotomic {
    /// ζ_m^k.
    pub fn root(m: u32, k: i64) -> Cyclotomic {
        let k = k.rem_euclid(m as i64) as usize;
        let mut c = vec![<BigRational as Zero>::zero(); m as usize];
        c[k] = One::one();
        Cyclotomic::reduce(m, c)
    }

    pub fn rational(r: BigRational) -> Cyclotomic {
        Cyclotomic { m: 1, c: if Zero::is_zero(&r) { vec![] } else { vec![r] } }
    }

    /// The value when it is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        (self.m == 1).then(|| self.c.first().cloned().unwrap_or_else(Zero::zero))
    }

    pub fn scale(&self, r: &BigRational) -> Cyclotomic {
        if Zero::is_zero(r) {
            return Cyclotomic::c_zero();
        }
        Cyclotomic { m: self.m, c: self.c.iter().map(|x| x * r).collect() }
    }

    /// Reduces modulo Φ_m; values with no irrational part are stored with m = 1.
    fn reduce(m: u32, mut c: Vec<BigRational>) -> Cyclotomic {
        if m == 1 {
            let s = c.into_iter().fold(<BigRational as Zero>::zero(), |a, x| a + x);
            return Cyclotomic::rational(s);
        }
        let phi = cached_cyclotomic(m);
        let d = phi.len() - 1;
        for i in (d..c.len()).rev() {
            let lead = c[i].clone();
            if Zero::is_zero(&lead) {
                continue;
            }
            for (j, p) in phi.iter().enumerate() {
                c[i - d + j] -= &lead * BigRational::from_integer(p.clone());
            }
        }
        c.truncate(d);
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        if c.len() <= 1 {
            return Cyclotomic::rational(c.pop().unwrap_or_else(Zero::zero));
        }
        Cyclotomic { m, c }
    }

    /// The same value written over Q(ζ_n), m | n, reduced modulo Φ_n.
    fn lift(&self, n: u32) -> Cyclotomic {
        if self.m == n {
            return self.clone();
        }
        let step = (n / self.m) as usize;
        let mut c = vec![<BigRational as Zero>::zero(); n as usize];
        for (i, x) in self.c.iter().enumerate() {
            c[i * step] += x;
        }
        Cyclotomic::reduce(n, c)
    }

    fn common(&self, other: &Cyclotomic) -> u32 {
        self.m / gcd(self.m, other.m) * other.m
    }
}

fn lift_coeff(c: &[BigRational], i: usize) -> BigRational {
    c.get(i).cloned().unwrap_or_else(Zero::zero)
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        Coeff::c_add(self, &Coeff::c_neg(other)).c_is_zero()
    }
}

impl Eq for Cyclotomic {}

impl Coeff for Cyclotomic {
    fn c_zero() -> Self {
        Cyclotomic { m: 1, c: vec![] }
    }
    fn c_one() -> Self {
        Cyclotomic::rational(One::one())
    }
    fn c_is_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn c_add(&self, other: &Self) -> Self {
        if self.m == 1 && other.m == 1 {
            return Cyclotomic::rational(lift_coeff(&self.c, 0) + lift_coeff(&other.c, 0));
        }
        let n = self.common(other);
        let (a, b) = (self.lift(n), other.lift(n));
        let len = a.c.len().max(b.c.len());
        let c = (0..len).map(|i| lift_coeff(&a.c, i) + lift_coeff(&b.c, i)).collect();
        Cyclotomic::reduce(n, c)
    }
    fn c_mul(&self, other: &Self) -> Self {
        if self.m == 1 {
            return other.scale(&lift_coeff(&self.c, 0));
        }
        if other.m == 1 {
            return self.scale(&lift_coeff(&other.c, 0));
        }
        let n = self.common(other);
        let (a, b) = (self.lift(n), other.lift(n));
        let mut c = vec![<BigRational as Zero>::zero(); a.c.len() + b.c.len()];
        for (i, x) in a.c.iter().enumerate() {
            for (j, y) in b.c.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Cyclotomic::reduce(n, c)
    }
    fn c_neg(&self) -> Self {
        Cyclotomic { m: self.m, c: self.c.iter().map(|x| -x).collect() }
    }
    fn c_inv(&self) -> Option<Self> {
        self.as_rational().and_then(|r| Coeff::c_inv(&r)).map(Cyclotomic::rational)
    }
    fn from_rational(r: &BigRational) -> Self {
        Cyclotomic::rational(r.clone())
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let w = format!("ζ{}", self.m);
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, x)| !Zero::is_zero(*x))
            .map(|(i, x)| {
                let p = if i == 1 { w.clone() } else { format!("{w}^{i}") };
                match i {
                    0 => x.to_string(),
                    _ if x.is_one() => p,
                    _ if *x == -<BigRational as One>::one() => format!("-{p}"),
                    _ => format!("{x}*{p}"),
                }
            })
            .collect();
        write!(f, "{}", join_signed(&parts))
    }
}

fn join_signed(parts: &[String]) -> String {
    let mut s = String::new();
    for (i, p) in parts.iter().enumerate() {
        if i == 0 {
            s.push_str(p);
        } else if let Some(rest) = p.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(p);
        }
    }
    s
}

/// A q-series known exactly below `order`: Σ c_e q^e with every listed e < order.
#[derive(Clone, PartialEq, Debug)]
pub struct QSeries<C: Coeff = BigRational> {
    order: Exp,
    terms: BTreeMap<Exp, C>,
}

/// Two-variable series: q-series with Laurent polynomials in z as coefficients.
pub type JacobiSeries = QSeries<LaurentZ>;

impl<C: Coeff> QSeries<C> {
    pub fn zero(order: Exp) -> Self {
        QSeries { order, terms: BTreeMap::new() }
    }

    pub fn one(order: Exp) -> Self {
        QSeries::monomial(Exp::zero(), C::c_one(), order)
    }

    pub fn monomial(e: Exp, c: C, order: Exp) -> Self {
        QSeries::from_terms([(e, c)], order)
    }

    /// Sums the given terms, dropping those at or above `order`.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exp, C)>, order: Exp) -> Self {
        let mut s = QSeries::zero(order);
        for (e, c) in terms {
            s.add_term(e, &c);
        }
        s
    }

    fn add_term(&mut self, e: Exp, c: &C) {
        if e >= self.order || c.c_is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => {
                *slot = slot.c_add(c);
                if slot.c_is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn order(&self) -> Exp {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Exp, C> {
        &self.terms
    }

    pub fn coefficient(&self, e: Exp) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::c_zero)
    }

    /// Smallest exponent with a nonzero coefficient, or the order for a series that vanishes to that order.
    pub fn valuation(&self) -> Exp {
        self.terms.keys().next().copied().unwrap_or(self.order)
    }

    pub fn leading(&self) -> Option<(Exp, &C)> {
        self.terms.iter().next().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncate(&self, order: Exp) -> Self {
        let order = order.min(self.order);
        QSeries { order, terms: self.terms.range(..order).map(|(e, c)| (*e, c.clone())).collect() }
    }

    /// Multiplies by q^e.
    pub fn shift(&self, e: Exp) -> Self {
        QSeries { order: self.order + e, terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        QSeries::from_terms(self.terms.iter().map(|(e, x)| (*e, x.c_mul(c))), self.order)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))), self.order)
    }

    /// 1/self; needs an invertible leading coefficient. Known to order − 2·valuation.
    pub fn inverse(&self) -> Option<Self> {
        let (v, c) = self.leading()?;
        let ci = c.c_inv()?;
        let rel = self.order - v;
        let x = &self.shift(-v).scale(&ci) - &QSeries::one(rel);
        let minus_x = -&x;
        let mut result = QSeries::one(rel);
        let mut power = QSeries::one(rel);
        loop {
            power = (&power * &minus_x).truncate(rel);
            if power.is_zero() {
                break;
            }
            result = &result + &power;
        }
        Some(result.truncate(rel).scale(&ci).shift(-v))
    }

    /// ∏ (1 − c q^e) over the given factors, e > 0.
    pub fn product_one_minus(factors: &[(C, Exp)], order: Exp) -> Self {
        let mut out = QSeries::one(order);
        for (c, e) in factors {
            if *e >= order {
                continue;
            }
            let f = QSeries::from_terms([(Exp::zero(), C::c_one()), (*e, c.c_neg())], order);
            out = &out * &f;
        }
        out
    }

    /// ∏ 1/(1 − c q^e) over the given factors, e > 0, expanded as geometric series.
    pub fn geometric_product(factors: &[(C, Exp)], order: Exp) -> Self {
        let mut out: QSeries<C> = QSeries::one(order);
        for (c, e) in factors {
            assert!(*e > Exp::zero(), "geometric factor needs a positive exponent");
            if *e >= order {
                continue;
            }
            // out ← out/(1 − c q^e): next[x] = out[x] + c·next[x − e], filled in increasing x.
            let mut next: BTreeMap<Exp, C> = BTreeMap::new();
            let mut pending = std::mem::take(&mut out.terms);
            while let Some((x, v)) = pending.pop_first() {
                let y = x + e;
                if y < order {
                    let add = v.c_mul(c);
                    if !add.c_is_zero() {
                        let p = pending.entry(y).or_insert_with(C::c_zero);
                        *p = p.c_add(&add);
                    }
                }
                next.insert(x, v);
            }
            next.retain(|_, v| !v.c_is_zero());
            out.terms = next;
        }
        out
    }

    /// First exponent below the common order where the two series differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<Exp> {
        let order = self.order.min(other.order);
        let a = self.truncate(order);
        let b = other.truncate(order);
        let keys = a.terms.keys().chain(b.terms.keys()).copied().filter(|e| a.coefficient(*e) != b.coefficient(*e));
        keys.min()
    }
}

impl JacobiSeries {
    /// The coefficient of z^k as a q-series.
    pub fn z_component(&self, k: i64) -> QSeries {
        QSeries::from_terms(self.terms.iter().map(|(e, c)| (*e, c.coefficient(k))), self.order)
    }

    pub fn at_z_one(&self) -> QSeries {
        self.map(LaurentZ::at_one)
    }

    /// Substitutes z = ζ_m^k.
    pub fn at_root(&self, m: u32, k: i64) -> QSeries<Cyclotomic> {
        self.map(|c| c.at_root(m, k))
    }

    pub fn invert_z(&self) -> JacobiSeries {
        self.map(LaurentZ::invert_z)
    }
}

impl QSeries<BigRational> {
    pub fn to_jacobi(&self) -> JacobiSeries {
        self.map(|c| LaurentZ::monomial(0, c.clone()))
    }
}

impl<'a, C: Coeff> Add<&'a QSeries<C>> for &'a QSeries<C> {
    type Output = QSeries<C>;
    fn add(self, rhs: &QSeries<C>) -> QSeries<C> {
        let mut out = self.truncate(rhs.order);
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl<C: Coeff> Neg for &QSeries<C> {
    type Output = QSeries<C>;
    fn neg(self) -> QSeries<C> {
        QSeries { order: self.order, terms: self.terms.iter().map(|(e, c)| (*e, c.c_neg())).collect() }
    }
}

impl<'a, C: Coeff> Sub<&'a QSeries<C>> for &'a QSeries<C> {
    type Output = QSeries<C>;
    fn sub(self, rhs: &QSeries<C>) -> QSeries<C> {
        self + &(-rhs)
    }
}

impl<'a, C: Coeff> Mul<&'a QSeries<C>> for &'a QSeries<C> {
    type Output = QSeries<C>;
    fn mul(self, rhs: &QSeries<C>) -> QSeries<C> {
        let order = (self.order + rhs.valuation()).min(rhs.order + self.valuation());
        let mut acc: BTreeMap<Exp, C> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea + eb;
                if e >= order {
                    break;
                }
                let slot = acc.entry(e).or_insert_with(C::c_zero);
                *slot = slot.c_add(&ca.c_mul(cb));
            }
        }
        acc.retain(|_, c| !c.c_is_zero());
        QSeries { order, terms: acc }
    }
}

fn exp_text(e: &Exp) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("({e})")
    }
}

impl<C: Coeff> fmt::Display for QSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in &self.terms {
            let cs = c.to_string();
            let simple = !cs[1..].contains([' ', '+', '-']);
            let q = if e.is_zero() {
                None
            } else if e.is_one() {
                Some("q".to_string())
            } else {
                Some(format!("q^{}", exp_text(e)))
            };
            parts.push(match q {
                None => cs,
                Some(q) if cs == "1" => q,
                Some(q) if cs == "-1" => format!("-{q}"),
                Some(q) if simple => format!("{cs}*{q}"),
                Some(q) if cs.starts_with('-') && !cs[1..].contains([' ', '+']) => format!("{cs}*{q}"),
                Some(q) => format!("({cs})*{q}"),
            });
        }
        parts.push(format!("O(q^{})", exp_text(&self.order)));
        write!(f, "{}", join_signed(&parts))
    }
}

/// Rational exponent helper.
pub fn exp(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

pub(crate) fn big(r: &Exp) -> BigRational {
    BigRational::new((*r.numer()).into(), (*r.denom()).into())
}

pub(crate) fn small(r: &BigRational) -> Exp {
    use num_traits::ToPrimitive;
    Exp::new(r.numer().to_i64().expect("exponent fits"), r.denom().to_i64().expect("exponent fits"))
}

