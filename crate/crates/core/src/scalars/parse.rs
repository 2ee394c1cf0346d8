use num_bigint::BigInt;
use num_traits::Zero;

use super::{ParseError, PolyL, RatFuncL};

/// Recursive-descent parser for the scalar syntax: integers, `l`, `+ - * / ^ ( )`.
pub(crate) struct ScalarParser<'a> {
    src: &'a [u8],
    pos: usize,
    /// Offset of `src` inside a larger text, for error locations.
    base: usize,
    full: &'a str,
}

impl<'a> ScalarParser<'a> {
    pub(crate) fn new(full: &'a str, start: usize, end: usize) -> Self {
        ScalarParser { src: &full.as_bytes()[..end], pos: start, base: 0, full }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.full, self.base + self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    pub(crate) fn expr(&mut self) -> Result<RatFuncL, ParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFuncL, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.factor()?;
                    acc = acc.checked_div(&d).map_err(|_| ParseError::at(self.full, at, "division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFuncL, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.pos;
            let e = self.integer()?;
            let e: i32 = e.try_into().map_err(|_| ParseError::at(self.full, at, "exponent too large"))?;
            let e = if neg { -e } else { e };
            return base.pow(e).map_err(|_| ParseError::at(self.full, at, "zero raised to a negative power"));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFuncL, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'l') => {
                self.pos += 1;
                if self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
                    return Err(self.err("unexpected identifier character after 'l'"));
                }
                Ok(RatFuncL::ell())
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFuncL::from(PolyL::constant(n.into())))
            }
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut v = BigInt::zero();
        for d in s.bytes() {
            v = v * 10 + (d - b'0');
        }
        Ok(v)
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

pub(crate) fn parse_ratfunc(text: &str) -> Result<RatFuncL, ParseError> {
    let mut p = ScalarParser::new(text, 0, text.len());
    let v = p.expr()?;
    if !p.at_end() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let a = parse_ratfunc("(2*l)/3").unwrap();
        assert_eq!(a, RatFuncL::ell().scale(&super::super::rat(2, 3)));
        let b = parse_ratfunc("l*(2*l-1)").unwrap();
        assert_eq!(b.to_string(), "2*l^2-l");
        assert_eq!(parse_ratfunc("l^-1").unwrap().to_string(), "1/l");
    }

    #[test]
    fn reports_location() {
        let e = parse_ratfunc("2*l +\n (3 * x)").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
    }
}
