use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{write_int_poly, PolyL};
use super::ScalarError;

/// An element of ℚ(ℓ), kept reduced with a monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFuncL {
    num: PolyL,
    den: PolyL,
}

impl RatFuncL {
    pub fn zero() -> Self {
        RatFuncL { num: PolyL::zero(), den: PolyL::one() }
    }

    pub fn one() -> Self {
        RatFuncL { num: PolyL::one(), den: PolyL::one() }
    }

    pub fn ell() -> Self {
        PolyL::ell().into()
    }

    pub fn from_int(c: i64) -> Self {
        PolyL::from_int(c).into()
    }

    pub fn from_rational(c: BigRational) -> Self {
        PolyL::constant(c).into()
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_rational(BigRational::new(n.into(), d.into()))
    }

    /// Builds n/d, reducing and normalizing the denominator to be monic.
    pub fn new(num: PolyL, den: PolyL) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: PolyL, den: PolyL) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let c = den.leading();
            return RatFuncL { num: if c.is_one() { num } else { num.scale(&c.recip()) }, den: PolyL::one() };
        }
        let g = PolyL::gcd(&num, &den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_exact(&g), den.div_exact(&g)) };
        let lc = den.leading();
        if lc.is_one() {
            RatFuncL { num, den }
        } else {
            let inv = lc.recip();
            RatFuncL { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn numer(&self) -> &PolyL {
        &self.num
    }

    pub fn denom(&self) -> &PolyL {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the value does not depend on ℓ.
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The value as an exact rational if it is constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_constant().then(|| self.num.constant_term())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFuncL { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn pow(&self, e: i32) -> Result<Self, ScalarError> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        let e = e as u32;
        Ok(RatFuncL { num: self.num.pow(e), den: self.den.pow(e) })
    }

    /// Evaluates at ℓ = `value`.
    ///
    /// Fails when `value` is a pole; the error names the denominator factor
    /// (ℓ − value) together with the full denominator.
    pub fn specialize(&self, value: &BigRational) -> Result<BigRational, ScalarError> {
        let d = self.den.eval(value);
        if d.is_zero() {
            return Err(ScalarError::Pole {
                value: value.to_string(),
                factor: RatFuncL::from(&PolyL::ell() - &PolyL::constant(value.clone())).to_string(),
                denominator: RatFuncL::from(self.den.clone()).to_string(),
            });
        }
        Ok(self.num.eval(value) / d)
    }

    /// Specializes and returns the constant rational function.
    pub fn specialize_to_const(&self, value: &BigRational) -> Result<Self, ScalarError> {
        self.specialize(value).map(Self::from_rational)
    }

    /// Sum of numerator and denominator degrees, used for pivot selection.
    pub fn total_degree(&self) -> usize {
        self.num.degree().unwrap_or(0) + self.den.degree().unwrap_or(0)
    }

    pub fn parse(text: &str) -> Result<Self, super::ParseError> {
        super::parse::parse_ratfunc(text)
    }

    /// Whether the printed form needs parentheses when used as a factor.
    pub fn needs_parens(&self) -> bool {
        let s = self.to_string();
        s[1..].contains(['+', '-', '/'])
    }
}

impl From<PolyL> for RatFuncL {
    fn from(p: PolyL) -> Self {
        RatFuncL { num: p, den: PolyL::one() }
    }
}

impl From<i64> for RatFuncL {
    fn from(c: i64) -> Self {
        Self::from_int(c)
    }
}

impl From<BigRational> for RatFuncL {
    fn from(c: BigRational) -> Self {
        Self::from_rational(c)
    }
}

impl Default for RatFuncL {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for &RatFuncL {
    type Output = RatFuncL;
    fn add(self, rhs: &RatFuncL) -> RatFuncL {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFuncL { num, den: PolyL::one() };
            }
            return RatFuncL::reduce(num, self.den.clone());
        }
        if self.den.is_one() {
            return RatFuncL::reduce(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone());
        }
        if rhs.den.is_one() {
            return RatFuncL::reduce(&self.num + &(&rhs.num * &self.den), self.den.clone());
        }
        let g = PolyL::gcd(&self.den, &rhs.den);
        let a = self.den.div_exact(&g);
        let b = rhs.den.div_exact(&g);
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        RatFuncL::reduce(num, &self.den * &b)
    }
}

impl Neg for &RatFuncL {
    type Output = RatFuncL;
    fn neg(self) -> RatFuncL {
        RatFuncL { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub for &RatFuncL {
    type Output = RatFuncL;
    fn sub(self, rhs: &RatFuncL) -> RatFuncL {
        self + &(-rhs)
    }
}

impl Mul for &RatFuncL {
    type Output = RatFuncL;
    fn mul(self, rhs: &RatFuncL) -> RatFuncL {
        if self.is_zero() || rhs.is_zero() {
            return RatFuncL::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFuncL { num: &self.num * &rhs.num, den: PolyL::one() };
        }
        if self.is_constant() {
            return rhs.scale(&self.num.constant_term());
        }
        if rhs.is_constant() {
            return self.scale(&rhs.num.constant_term());
        }
        let g1 = PolyL::gcd(&self.num, &rhs.den);
        let g2 = PolyL::gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1);
        let d2 = rhs.den.div_exact(&g1);
        let n2 = rhs.num.div_exact(&g2);
        let d1 = self.den.div_exact(&g2);
        // Both factors were reduced and the cross gcds removed, so the product is reduced.
        RatFuncL { num: &n1 * &n2, den: &d1 * &d2 }
    }
}

impl Div for &RatFuncL {
    type Output = RatFuncL;
    /// # Panics
    /// Panics on division by zero; use [`RatFuncL::checked_div`] to get an error instead.
    fn div(self, rhs: &RatFuncL) -> RatFuncL {
        self.checked_div(rhs).expect("division by zero in Q(l)")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFuncL {
            type Output = RatFuncL;
            fn $m(self, rhs: RatFuncL) -> RatFuncL {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RatFuncL> for RatFuncL {
            type Output = RatFuncL;
            fn $m(self, rhs: &RatFuncL) -> RatFuncL {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFuncL {
    type Output = RatFuncL;
    fn neg(self) -> RatFuncL {
        RatFuncL { num: -self.num, den: self.den }
    }
}

impl AddAssign<&RatFuncL> for RatFuncL {
    fn add_assign(&mut self, rhs: &RatFuncL) {
        if self.den.is_one() && rhs.den.is_one() {
            self.num = &self.num + &rhs.num;
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&RatFuncL> for RatFuncL {
    fn sub_assign(&mut self, rhs: &RatFuncL) {
        *self = &*self - rhs;
    }
}

impl fmt::Display for RatFuncL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, nf) = self.num.primitive_integer();
        let (d, df) = self.den.primitive_integer();
        // self = (nf/df) · n/d; fold the rational factor into integer numerator/denominator.
        let r = nf / df;
        let (rn, rd) = (r.numer().clone(), r.denom().clone());
        let n: Vec<BigInt> = n.iter().map(|c| c * &rn).collect();
        let d: Vec<BigInt> = d.iter().map(|c| c * &rd).collect();
        if self.num.is_zero() {
            return f.write_str("0");
        }
        let den_is_one = d.len() == 1 && d[0].is_one();
        if den_is_one {
            return write_int_poly(f, &n);
        }
        let den_atomic = d.len() == 1 || (d.last().unwrap().is_one() && d[..d.len() - 1].iter().all(|c| c.is_zero()));
        let bare_power = n.last().is_some_and(|c| c.abs().is_one()) && n[..n.len() - 1].iter().all(|c| c.is_zero());
        if n.len() == 1 || bare_power {
            write_int_poly(f, &n)?;
        } else {
            f.write_str("(")?;
            write_int_poly(f, &n)?;
            f.write_str(")")?;
        }
        f.write_str("/")?;
        if den_atomic {
            write_int_poly(f, &d)
        } else {
            f.write_str("(")?;
            write_int_poly(f, &d)?;
            f.write_str(")")
        }
    }
}

impl fmt::Debug for RatFuncL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for RatFuncL {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for RatFuncL {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        RatFuncL::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for a small rational constant.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> RatFuncL {
        RatFuncL::parse(s).unwrap()
    }

    #[test]
    fn cancellation() {
        assert_eq!(p("l*(2*l-1)") / p("2*l-1"), RatFuncL::ell());
        assert_eq!(p("2*l/3") + p("2*l/3"), p("4*l/3"));
    }

    #[test]
    fn central_charge_shift() {
        let c = p("-2*l*(6*l-7)/(2*l+3)");
        assert_eq!(c - RatFuncL::one(), p("-3*(2*l-1)^2/(2*l+3)"));
    }

    #[test]
    fn printing_forms() {
        assert_eq!(p("2*l/3").to_string(), "(2*l)/3");
        assert_eq!(p("l*(2*l-1)").to_string(), "2*l^2-l");
        assert_eq!(p("-l*(6*l-7)/(2*l+3)").to_string(), "(-6*l^2+7*l)/(2*l+3)");
        assert_eq!(p("-1/2").to_string(), "-1/2");
        assert_eq!(p("1/l").to_string(), "1/l");
        assert_eq!(p("-l/3").to_string(), "-l/3");
        assert_eq!(p("l^2/(2*l+3)").to_string(), "l^2/(2*l+3)");
        assert_eq!(p("3/(4*l)").to_string(), "3/(4*l)");
    }

    #[test]
    fn specialize_and_poles() {
        assert_eq!(p("2*l/3").specialize(&rat(1, 1)).unwrap(), rat(2, 3));
        assert_eq!(p("(2*l+1)^2/2").specialize(&rat(1, 1)).unwrap(), rat(9, 2));
        let err = p("1/l").specialize(&rat(0, 1)).unwrap_err();
        assert!(err.to_string().contains("factor l"), "{err}");
    }
}
