//! The expression grammar shared by algebra files, test vectors and the CLI.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := unary (('*' | '/' | <juxtaposition>) unary)*
//! unary   := '-' unary | product
//! product := power ('_' INT '_' power)*          a∘_n b, left associative
//! power   := atom ['^' ['-'] INT]                scalar power or Wick power
//! atom    := INT | 'l' | NAME ['[' INT (',' INT)* ']'] | 'd' ['^' INT] power
//!          | '(' expr ')' | ':' item item* ':'
//! item    := power | ':' item item* ':'
//! ```
//!
//! Inside a Wick product a `:` that follows whitespace and directly precedes an
//! item opens a nested product; any other `:` closes the current one.
//!
//! Juxtaposition multiplies when the right operand starts with a name, `d`,
//! `:` or `(`, so `(2*l-1) d J` is a valid term. A name absorbs a directly
//! following `+` or `-` when the resolver knows the signed name (`G+`).

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::scalars::{ParseError, RatFuncL};
use crate::vertex::{AlgebraPresentation, Engine, FieldExpr};

/// Resolves field names appearing in expressions.
pub trait NameResolver {
    /// Whether `name` (without index) is a field name.
    fn knows(&self, name: &str) -> bool;
    /// The field for `name[index...]`.
    fn resolve(&self, name: &str, index: &[i64], engine: &Engine) -> Result<FieldExpr, String>;
}

impl NameResolver for AlgebraPresentation {
    fn knows(&self, name: &str) -> bool {
        self.generator_index(name).is_ok()
    }

    fn resolve(&self, name: &str, index: &[i64], _engine: &Engine) -> Result<FieldExpr, String> {
        if !index.is_empty() {
            return Err(format!("generator '{name}' takes no index"));
        }
        self.gen(name).map_err(|e| e.to_string())
    }
}

pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Ell,
    Name { name: String, index: Vec<i64> },
    Deriv { order: u32, inner: Box<Expr> },
    Wick(Vec<Expr>),
    NthProduct { left: Box<Expr>, n: i64, right: Box<Expr> },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// A parsed expression with byte spans into the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(RatFuncL),
    Field(FieldExpr),
}

impl Value {
    pub fn into_field(self) -> FieldExpr {
        match self {
            Value::Scalar(c) => FieldExpr::scalar(c),
            Value::Field(f) => f,
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    src: &'a [u8],
    pos: usize,
    resolver: &'a dyn NameResolver,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric()
}

impl<'a> Parser<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.text, at, msg)
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn node(kind: ExprKind, start: usize, end: usize) -> Expr {
        Expr { kind, span: (start, end) }
    }

    /// Reads an identifier without consuming it.
    fn peek_ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let s = self.pos;
        if !self.src.get(s).copied().is_some_and(is_ident_start) {
            return None;
        }
        let mut e = s;
        while e < self.src.len() && is_ident_char(self.src[e]) {
            e += 1;
        }
        Some(&self.text[s..e])
    }

    fn starts_atom(&mut self) -> bool {
        match self.peek() {
            Some(b'(') | Some(b':') => true,
            Some(c) if is_ident_start(c) => true,
            _ => false,
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let s = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if s == self.pos {
            return Err(self.err(s, "expected an integer"));
        }
        Ok(self.text[s..self.pos].parse().unwrap())
    }

    fn small_int(&mut self, allow_neg: bool) -> Result<i64, ParseError> {
        self.skip_ws();
        let s = self.pos;
        let neg = allow_neg && self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        let v = self.integer()?.to_i64().ok_or_else(|| self.err(s, "integer too large"))?;
        Ok(if neg { -v } else { v })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                let end = t.span.1;
                Self::node(ExprKind::Neg(Box::new(t)), start, end)
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
                    let t = self.term()?;
                    let end = t.span.1;
                    acc = Self::node(ExprKind::Add(Box::new(acc), Box::new(t)), start, end);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    let end = t.span.1;
                    acc = Self::node(ExprKind::Sub(Box::new(acc), Box::new(t)), start, end);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut acc = self.unary()?;
        loop {
            let kind = match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    0
                }
                Some(b'/') => {
                    self.pos += 1;
                    1
                }
                _ if self.starts_atom() => 0,
                _ => return Ok(acc),
            };
            let rhs = self.unary()?;
            let end = rhs.span.1;
            acc = if kind == 0 {
                Self::node(ExprKind::Mul(Box::new(acc), Box::new(rhs)), start, end)
            } else {
                Self::node(ExprKind::Div(Box::new(acc), Box::new(rhs)), start, end)
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            let end = inner.span.1;
            return Ok(Self::node(ExprKind::Neg(Box::new(inner)), start, end));
        }
        self.product()
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut acc = self.power()?;
        while self.peek() == Some(b'_') {
            self.pos += 1;
            let n = self.small_int(true)?;
            if self.src.get(self.pos) != Some(&b'_') {
                return Err(self.err(self.pos, "expected '_' closing the product index"));
            }
            self.pos += 1;
            let rhs = self.power()?;
            let end = rhs.span.1;
            acc = Self::node(ExprKind::NthProduct { left: Box::new(acc), n, right: Box::new(rhs) }, start, end);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.small_int(true)?;
            return Ok(Self::node(ExprKind::Pow(Box::new(base), e), start, self.pos));
        }
        Ok(base)
    }

    fn wick(&mut self, start: usize) -> Result<Expr, ParseError> {
        // The opening ':' has been consumed.
        let mut items = Vec::new();
        if self.peek() == Some(b':') {
            let s = self.pos;
            self.pos += 1;
            items.push(self.wick(s)?);
        }
        loop {
            match self.peek() {
                Some(b':') if self.opens_nested() => {
                    let s = self.pos;
                    self.pos += 1;
                    items.push(self.wick(s)?);
                }
                Some(b':') => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.err(self.pos, "unterminated Wick product")),
                _ => items.push(self.power()?),
            }
        }
        if items.is_empty() {
            return Err(self.err(start, "empty Wick product"));
        }
        Ok(Self::node(ExprKind::Wick(items), start, self.pos))
    }

    /// Inside a Wick product, a ':' after whitespace and directly before an item opens a nested product.
    fn opens_nested(&self) -> bool {
        let before = self.pos.checked_sub(1).map(|i| self.src[i]);
        let after = self.src.get(self.pos + 1).copied();
        before.is_some_and(|c| c.is_ascii_whitespace())
            && after.is_some_and(|c| c.is_ascii_alphanumeric() || c == b'(' || c == b':')
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut e = self.expr()?;
                self.expect(b')')?;
                e.span = (start, self.pos);
                Ok(e)
            }
            Some(b':') => {
                self.pos += 1;
                self.wick(start)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(Self::node(ExprKind::Int(v), start, self.pos))
            }
            Some(c) if is_ident_start(c) => {
                let ident = self.peek_ident().unwrap();
                self.pos += ident.len();
                match ident {
                    "l" => Ok(Self::node(ExprKind::Ell, start, self.pos)),
                    "d" => {
                        let order = if self.peek() == Some(b'^') {
                            self.pos += 1;
                            let k = self.small_int(false)?;
                            u32::try_from(k).map_err(|_| self.err(start, "derivative order too large"))?
                        } else {
                            1
                        };
                        let inner = self.power()?;
                        let end = inner.span.1;
                        Ok(Self::node(ExprKind::Deriv { order, inner: Box::new(inner) }, start, end))
                    }
                    _ => {
                        let mut name = ident.to_string();
                        if let Some(&s) = self.src.get(self.pos) {
                            if s == b'+' || s == b'-' {
                                let signed = format!("{name}{}", s as char);
                                if self.resolver.knows(&signed) {
                                    name = signed;
                                    self.pos += 1;
                                }
                            }
                        }
                        let mut index = Vec::new();
                        if self.src.get(self.pos) == Some(&b'[') {
                            self.pos += 1;
                            loop {
                                index.push(self.small_int(true)?);
                                match self.peek() {
                                    Some(b',') => self.pos += 1,
                                    Some(b']') => {
                                        self.pos += 1;
                                        break;
                                    }
                                    _ => return Err(self.err(self.pos, "expected ',' or ']' in index")),
                                }
                            }
                        }
                        if !self.resolver.knows(&name) {
                            return Err(self.err(start, format!("unknown field name '{name}'")));
                        }
                        Ok(Self::node(ExprKind::Name { name, index }, start, self.pos))
                    }
                }
            }
            Some(c) => Err(self.err(start, format!("unexpected character '{}'", c as char))),
            None => Err(self.err(start, "unexpected end of input")),
        }
    }
}

/// Parses `text` into an expression tree. Names are checked against `resolver`.
pub fn parse_expression(text: &str, resolver: &dyn NameResolver) -> Result<Expr, ParseError> {
    let mut p = Parser { text, src: text.as_bytes(), pos: 0, resolver };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

impl Expr {
    /// Evaluates to a scalar or a normal-ordered field.
    pub fn eval(&self, text: &str, engine: &Engine, resolver: &dyn NameResolver) -> Result<Value, ParseError> {
        let err = |span: Span, msg: String| ParseError::at(text, span.0, msg);
        let field = |v: Value| v.into_field();
        Ok(match &self.kind {
            ExprKind::Int(v) => Value::Scalar(RatFuncL::from_rational(num_rational::BigRational::from_integer(v.clone()))),
            ExprKind::Ell => Value::Scalar(RatFuncL::ell()),
            ExprKind::Name { name, index } => {
                Value::Field(resolver.resolve(name, index, engine).map_err(|m| err(self.span, m))?)
            }
            ExprKind::Deriv { order, inner } => {
                let v = inner.eval(text, engine, resolver)?;
                match v {
                    Value::Scalar(_) => Value::Scalar(RatFuncL::zero()),
                    Value::Field(f) => Value::Field(engine.derivative_k(&f, *order as usize)),
                }
            }
            ExprKind::Wick(items) => {
                let vals: Vec<FieldExpr> = items
                    .iter()
                    .map(|i| i.eval(text, engine, resolver).map(field))
                    .collect::<Result<_, _>>()?;
                Value::Field(engine.wick_word(&vals))
            }
            ExprKind::NthProduct { left, n, right } => {
                let a = field(left.eval(text, engine, resolver)?);
                let b = field(right.eval(text, engine, resolver)?);
                Value::Field(engine.nth_product(&a, &b, *n))
            }
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let x = a.eval(text, engine, resolver)?;
                let y = b.eval(text, engine, resolver)?;
                let sub = matches!(self.kind, ExprKind::Sub(..));
                match (x, y) {
                    (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(if sub { x - y } else { x + y }),
                    (x, y) => {
                        let (x, y) = (field(x), field(y));
                        Value::Field(if sub { &x - &y } else { &x + &y })
                    }
                }
            }
            ExprKind::Neg(a) => match a.eval(text, engine, resolver)? {
                Value::Scalar(x) => Value::Scalar(-x),
                Value::Field(f) => Value::Field(-&f),
            },
            ExprKind::Mul(a, b) => {
                let x = a.eval(text, engine, resolver)?;
                let y = b.eval(text, engine, resolver)?;
                match (x, y) {
                    (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
                    (Value::Scalar(c), Value::Field(f)) | (Value::Field(f), Value::Scalar(c)) => {
                        Value::Field(f.scale(&c))
                    }
                    (Value::Field(_), Value::Field(_)) => {
                        return Err(err(b.span, "product of two fields; write a Wick product :A B:".into()))
                    }
                }
            }
            ExprKind::Div(a, b) => {
                let x = a.eval(text, engine, resolver)?;
                let y = match b.eval(text, engine, resolver)? {
                    Value::Scalar(y) => y,
                    Value::Field(_) => return Err(err(b.span, "division by a field".into())),
                };
                if y.is_zero() {
                    return Err(err(b.span, "division by zero".into()));
                }
                match x {
                    Value::Scalar(x) => Value::Scalar(x / y),
                    Value::Field(f) => Value::Field(f.scale(&(RatFuncL::one() / y))),
                }
            }
            ExprKind::Pow(a, e) => match a.eval(text, engine, resolver)? {
                Value::Scalar(x) => {
                    Value::Scalar(x.pow(*e as i32).map_err(|_| err(self.span, "zero to a negative power".into()))?)
                }
                Value::Field(f) => {
                    if *e < 1 {
                        return Err(err(self.span, "Wick powers need a positive exponent".into()));
                    }
                    Value::Field(engine.wick_power(&f, *e as usize))
                }
            },
        })
    }
}

/// Parses and evaluates `text` as a field (scalars become multiples of 𝟙).
pub fn parse_field(text: &str, engine: &Engine, resolver: &dyn NameResolver) -> Result<FieldExpr, ParseError> {
    let ast = parse_expression(text, resolver)?;
    Ok(ast.eval(text, engine, resolver)?.into_field())
}

