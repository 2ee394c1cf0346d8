use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A polynomial in the level parameter ℓ with exact rational coefficients.
///
/// Coefficients are stored by ascending degree with no trailing zeros, so the
/// zero polynomial has an empty coefficient vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyL {
    coeffs: Vec<BigRational>,
}

impl PolyL {
    pub fn zero() -> Self {
        PolyL { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The indeterminate ℓ.
    pub fn ell() -> Self {
        PolyL { coeffs: vec![BigRational::zero(), BigRational::one()] }
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            PolyL { coeffs: vec![c] }
        }
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyL { coeffs }
    }

    /// Convenience constructor from small integer coefficients, ascending degree.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PolyL { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => Self::zero(),
            Some(lc) if lc.is_one() => self.clone(),
            Some(lc) => {
                let inv = lc.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Evaluates at an exact rational point (Horner).
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Euclidean division: returns (q, r) with self = q·d + r and deg r < deg d.
    ///
    /// # Panics
    /// Panics if `d` is zero.
    pub fn div_rem(&self, d: &PolyL) -> (PolyL, PolyL) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let lc_inv = d.leading().recip();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &lc_inv;
            if !c.is_zero() {
                for (i, di) in d.coeffs.iter().enumerate() {
                    let t = &c * di;
                    r[k + i] -= t;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (PolyL::from_coeffs(q), PolyL::from_coeffs(r))
    }

    /// Exact division; panics if `d` does not divide `self`.
    pub fn div_exact(&self, d: &PolyL) -> PolyL {
        if d.is_constant() {
            return self.scale(&d.leading().recip());
        }
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(a: &PolyL, b: &PolyL) -> PolyL {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Self::one();
        }
        let (mut x, mut y) = if a.coeffs.len() >= b.coeffs.len() {
            (a.monic(), b.monic())
        } else {
            (b.monic(), a.monic())
        };
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x
    }

    /// Returns the integer polynomial obtained by clearing denominators, together
    /// with the positive rational factor f such that self = f · result.
    /// The integer polynomial is primitive with positive leading coefficient.
    pub fn primitive_integer(&self) -> (Vec<BigInt>, BigRational) {
        if self.is_zero() {
            return (Vec::new(), BigRational::one());
        }
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = l.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| c.numer() * (&l / c.denom())).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim = ints.iter().map(|c| c / &g).collect();
        (prim, BigRational::new(g, l))
    }

    /// Formal derivative d/dℓ.
    pub fn derivative(&self) -> PolyL {
        PolyL::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Whether `d` divides `self` exactly.
    pub fn is_divisible_by(&self, d: &PolyL) -> bool {
        if d.is_constant() {
            return !d.is_zero();
        }
        self.div_rem(d).1.is_zero()
    }
}

impl PartialOrd for PolyL {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PolyL {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl Add for &PolyL {
    type Output = PolyL;
    fn add(self, rhs: &PolyL) -> PolyL {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() { (self, rhs) } else { (rhs, self) };
        let mut c = long.coeffs.clone();
        for (i, b) in short.coeffs.iter().enumerate() {
            c[i] += b;
        }
        PolyL::from_coeffs(c)
    }
}

impl Sub for &PolyL {
    type Output = PolyL;
    fn sub(self, rhs: &PolyL) -> PolyL {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut c = self.coeffs.clone();
        c.resize(n, BigRational::zero());
        for (i, b) in rhs.coeffs.iter().enumerate() {
            c[i] -= b;
        }
        PolyL::from_coeffs(c)
    }
}

impl Mul for &PolyL {
    type Output = PolyL;
    fn mul(self, rhs: &PolyL) -> PolyL {
        if self.is_zero() || rhs.is_zero() {
            return PolyL::zero();
        }
        if self.coeffs.len() == 1 {
            return rhs.scale(&self.coeffs[0]);
        }
        if rhs.coeffs.len() == 1 {
            return self.scale(&rhs.coeffs[0]);
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyL::from_coeffs(c)
    }
}

impl Neg for &PolyL {
    type Output = PolyL;
    fn neg(self) -> PolyL {
        PolyL { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PolyL {
            type Output = PolyL;
            fn $m(self, rhs: PolyL) -> PolyL {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PolyL {
    type Output = PolyL;
    fn neg(self) -> PolyL {
        -&self
    }
}

pub(crate) fn write_int_poly(f: &mut fmt::Formatter<'_>, c: &[BigInt]) -> fmt::Result {
    let mut first = true;
    for (i, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let mag = a.abs();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { "-" } else { "+" })?;
        }
        first = false;
        match i {
            0 => write!(f, "{mag}")?,
            _ => {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                if i == 1 {
                    f.write_str("l")?;
                } else {
                    write!(f, "l^{i}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for PolyL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&super::RatFuncL::from(self.clone()), f)
    }
}

impl serde::Serialize for PolyL {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Debug for PolyL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyL({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_of_shared_factor() {
        let a = PolyL::from_ints(&[0, -1, 2]); // l(2l-1)
        let b = PolyL::from_ints(&[-1, 2]);
        assert_eq!(PolyL::gcd(&a, &b), PolyL::from_coeffs(vec![
            BigRational::new((-1).into(), 2.into()),
            BigRational::one()
        ]));
    }

    #[test]
    fn division_with_remainder() {
        let a = PolyL::from_ints(&[1, 0, 1]);
        let d = PolyL::from_ints(&[1, 1]);
        let (q, r) = a.div_rem(&d);
        assert_eq!(&(&q * &d) + &r, a);
        assert_eq!(r, PolyL::from_int(2));
    }
}
