//! Expression syntax trees, the text parser, and normalization into [`ExpPoly`].
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' exponent)?
//! exponent:= integer | '(' '-'? integer ')'
//! atom    := integer | 'I' | coordinate | parameter | func '(' sum ')' | '(' sum ')'
//! func    := exp | sin | cos | sinh | cosh
//! ```
//!
//! Coordinates are `x1`..`x8`; `I` is the imaginary unit; any other identifier
//! is a parameter resolved through a [`ParamEnv`]. Rational literals are written
//! as integer quotients, `3/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::exppoly::{ExpPoly, Frequency, MAX_AXES};
use super::fraction::Fraction;
use super::gauss::{format_rational, GaussianRational, Rational};
use super::SymError;

/// Exact bindings for named parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamEnv {
    bindings: BTreeMap<String, Rational>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Rational) -> Self {
        self.bind(name, value);
        self
    }

    pub fn bind(&mut self, name: &str, value: Rational) {
        self.bindings.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.bindings.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Union, with `other` winning on conflicts.
    pub fn merged(&self, other: &ParamEnv) -> ParamEnv {
        let mut out = self.clone();
        for (k, v) in &other.bindings {
            out.bindings.insert(k.clone(), v.clone());
        }
        out
    }
}

impl fmt::Display for ParamEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bindings
            .iter()
            .map(|(k, v)| format!("{k}={}", format_rational(v)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }
}

/// Parsed expression, before parameters are substituted.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Imag,
    Coord(usize),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses with the division restriction: divisors must be constants or
    /// pure exponential units.
    pub fn parse(src: &str) -> Result<Expr, SymError> {
        Parser::new(src, true).parse_all()
    }

    /// Parses allowing arbitrary divisors; the result normalizes to a [`Fraction`].
    pub fn parse_fraction(src: &str) -> Result<Expr, SymError> {
        Parser::new(src, false).parse_all()
    }

    /// Names of all parameters referenced.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(n) => {
                out.insert(n.clone());
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            _ => {}
        }
    }

    fn has_coords(&self) -> bool {
        match self {
            Expr::Coord(_) => true,
            Expr::Num(_) | Expr::Imag | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.has_coords(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_coords() || b.has_coords()
            }
        }
    }

    /// Syntactic test for "constant or pure exponential unit".
    fn is_unit_shaped(&self) -> bool {
        if !self.has_coords() {
            return true;
        }
        match self {
            Expr::Call(Func::Exp, _) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_unit_shaped(),
            Expr::Mul(a, b) | Expr::Div(a, b) => a.is_unit_shaped() && b.is_unit_shaped(),
            _ => false,
        }
    }

    /// Substitutes parameters and normalizes to an [`ExpPoly`].
    pub fn normalize(&self, env: &ParamEnv) -> Result<ExpPoly, SymError> {
        Ok(match self {
            Expr::Num(r) => ExpPoly::from_rational(r.clone()),
            Expr::Imag => ExpPoly::constant(GaussianRational::i()),
            Expr::Coord(i) => ExpPoly::coord(*i),
            Expr::Param(n) => match env.get(n) {
                Some(v) => ExpPoly::from_rational(v.clone()),
                None => return Err(SymError::UnboundParameter(n.clone())),
            },
            Expr::Neg(a) => a.normalize(env)?.neg(),
            Expr::Add(a, b) => a.normalize(env)?.add(&b.normalize(env)?),
            Expr::Sub(a, b) => a.normalize(env)?.sub(&b.normalize(env)?),
            Expr::Mul(a, b) => a.normalize(env)?.mul(&b.normalize(env)?),
            Expr::Div(a, b) => {
                let den = b.normalize(env)?;
                if den.is_zero() {
                    return Err(SymError::DivisionByZero);
                }
                let inv = den
                    .unit_inverse()
                    .ok_or_else(|| SymError::NonUnitDivisor(super::print::print(&den)))?;
                a.normalize(env)?.mul(&inv)
            }
            Expr::Pow(a, k) => {
                let base = a.normalize(env)?;
                if *k >= 0 {
                    base.pow(*k as u32)
                } else {
                    if base.is_zero() {
                        return Err(SymError::DivisionByZero);
                    }
                    base.unit_inverse()
                        .ok_or_else(|| SymError::NonUnitDivisor(super::print::print(&base)))?
                        .pow(k.unsigned_abs())
                }
            }
            Expr::Call(f, a) => apply_func(*f, &a.normalize(env)?)?,
        })
    }

    /// Normalizes to a quotient of exponential polynomials.
    pub fn normalize_fraction(&self, env: &ParamEnv) -> Result<Fraction, SymError> {
        Ok(match self {
            Expr::Neg(a) => a.normalize_fraction(env)?.neg(),
            Expr::Add(a, b) => a.normalize_fraction(env)?.add(&b.normalize_fraction(env)?),
            Expr::Sub(a, b) => a.normalize_fraction(env)?.sub(&b.normalize_fraction(env)?),
            Expr::Mul(a, b) => a.normalize_fraction(env)?.mul(&b.normalize_fraction(env)?),
            Expr::Div(a, b) => {
                let den = b.normalize_fraction(env)?;
                if den.is_zero() {
                    return Err(SymError::DivisionByZero);
                }
                a.normalize_fraction(env)?.div(&den)
            }
            Expr::Pow(a, k) => {
                let base = a.normalize_fraction(env)?;
                if *k < 0 && base.is_zero() {
                    return Err(SymError::DivisionByZero);
                }
                let p = base.pow(k.unsigned_abs());
                if *k < 0 {
                    p.recip()
                } else {
                    p
                }
            }
            Expr::Call(f, a) => {
                let arg = a.normalize_fraction(env)?;
                let arg = arg
                    .as_exppoly()
                    .ok_or_else(|| SymError::NotLinearForm(arg.to_string()))?;
                Fraction::from(apply_func(*f, &arg)?)
            }
            other => Fraction::from(other.normalize(env)?),
        })
    }
}

/// Reads a linear form `sum c_k x_k` (no constant term) as a frequency vector.
pub fn linear_form(arg: &ExpPoly) -> Result<Frequency, SymError> {
    let mut entries = Vec::new();
    for t in arg.terms() {
        if !t.freq.is_zero() || t.powers.degree() != 1 {
            return Err(SymError::NotLinearForm(super::print::print(arg)));
        }
        let axis = t.powers.0.iter().position(|&p| p == 1).unwrap();
        entries.push((axis, t.coeff.clone()));
    }
    Ok(Frequency::from_entries(entries))
}

fn apply_func(f: Func, arg: &ExpPoly) -> Result<ExpPoly, SymError> {
    let lam = linear_form(arg)?;
    let half = GaussianRational::from_frac(1, 2);
    Ok(match f {
        Func::Exp => ExpPoly::exp(lam),
        Func::Cosh | Func::Sinh => {
            let sign = if f == Func::Cosh { 1 } else { -1 };
            ExpPoly::exp(lam.clone())
                .add(&ExpPoly::exp(lam.neg()).scale(&GaussianRational::from_int(sign)))
                .scale(&half)
        }
        Func::Cos | Func::Sin => {
            let ilam = lam.scale(&GaussianRational::i());
            let plus = ExpPoly::exp(ilam.clone());
            let minus = ExpPoly::exp(ilam.neg());
            if f == Func::Cos {
                plus.add(&minus).scale(&half)
            } else {
                // (e^{iL} - e^{-iL}) / (2i)
                let c = GaussianRational::new(Rational::zero(), -Rational::new(1.into(), 2.into()));
                plus.sub(&minus).scale(&c)
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    strict: bool,
    lex_error: Option<SymError>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, strict: bool) -> Self {
        let mut p = Parser {
            src,
            toks: Vec::new(),
            pos: 0,
            strict,
            lex_error: None,
        };
        p.lex();
        p
    }

    fn lex(&mut self) {
        let bytes: Vec<(usize, char)> = self.src.char_indices().collect();
        let mut i = 0;
        while i < bytes.len() {
            let (at, c) = bytes[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = at;
                while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i].1 == '.' {
                    self.lex_error = Some(SymError::Syntax {
                        pos: bytes[i].0,
                        message: "decimal literals are not allowed; write p/q".into(),
                    });
                    return;
                }
                let end = bytes.get(i).map_or(self.src.len(), |b| b.0);
                let n: BigInt = self.src[start..end].parse().unwrap();
                self.toks.push((Tok::Int(n), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = at;
                while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_') {
                    i += 1;
                }
                let end = bytes.get(i).map_or(self.src.len(), |b| b.0);
                self.toks.push((Tok::Ident(self.src[start..end].to_string()), start));
            } else if "+-*/^()".contains(c) {
                self.toks.push((Tok::Op(c), at));
                i += 1;
            } else {
                self.lex_error = Some(SymError::Syntax {
                    pos: at,
                    message: format!("unexpected character '{c}'"),
                });
                return;
            }
        }
        self.toks.push((Tok::End, self.src.len()));
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Syntax {
            pos: self.at(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), SymError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn parse_all(mut self) -> Result<Expr, SymError> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if *self.peek() == Tok::End {
            return self.err("empty expression");
        }
        let e = self.sum()?;
        if *self.peek() != Tok::End {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, SymError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, SymError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    let at = self.at();
                    let rhs = self.unary()?;
                    if self.strict && !rhs.is_unit_shaped() {
                        return Err(SymError::Syntax {
                            pos: at,
                            message: "division is only allowed by constants or exponentials".into(),
                        });
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.at();
        let k = self.exponent()?;
        if self.strict && k < 0 && !base.is_unit_shaped() {
            return Err(SymError::Syntax {
                pos: at,
                message: "negative powers are only allowed for constants or exponentials".into(),
            });
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn exponent(&mut self) -> Result<i32, SymError> {
        let parens = *self.peek() == Tok::Op('(');
        if parens {
            self.bump();
        }
        let neg = parens && *self.peek() == Tok::Op('-');
        if neg {
            self.bump();
        }
        let k = match self.bump() {
            Tok::Int(n) => match i32::try_from(n) {
                Ok(k) if k <= 64 => k,
                _ => return self.err("exponent too large"),
            },
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("exponent must be an integer literal");
            }
        };
        if parens {
            self.expect(')')?;
        }
        Ok(if neg { -k } else { k })
    }

    fn atom(&mut self) -> Result<Expr, SymError> {
        let at = self.at();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Num(Rational::from_integer(n))),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(SymError::UnknownSymbol { name, pos: at });
                    };
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if Func::from_name(&name).is_some() {
                    return Err(SymError::Syntax {
                        pos: self.at(),
                        message: format!("function '{name}' needs a parenthesized argument"),
                    });
                }
                if name == "I" {
                    return Ok(Expr::Imag);
                }
                if let Some(axis) = coordinate_axis(&name) {
                    return if axis < MAX_AXES {
                        Ok(Expr::Coord(axis))
                    } else {
                        Err(SymError::UnknownSymbol { name, pos: at })
                    };
                }
                Ok(Expr::Param(name))
            }
            Tok::End => {
                self.pos = self.toks.len() - 1;
                self.err("unexpected end of input")
            }
            Tok::Op(c) => Err(SymError::Syntax {
                pos: at,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// `x3` → axis 2.
fn coordinate_axis(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let n: usize = digits.parse().ok()?;
    Some(n - 1)
}

/// Parses and normalizes in one step.
pub fn parse(src: &str, env: &ParamEnv) -> Result<ExpPoly, SymError> {
    Expr::parse(src)?.normalize(env)
}

/// Parses a quotient expression with arbitrary denominators.
pub fn parse_fraction(src: &str, env: &ParamEnv) -> Result<Fraction, SymError> {
    Expr::parse_fraction(src)?.normalize_fraction(env)
}

/// Parses an exact rational-valued expression without coordinates (e.g. `-(a+1)/2`).
pub fn parse_constant(src: &str, env: &ParamEnv) -> Result<Rational, SymError> {
    let e = parse(src, env)?;
    match e.as_constant() {
        Some(c) if c.is_real() => Ok(c.re),
        _ => Err(SymError::NotConstant(src.to_string())),
    }
}

impl Expr {
    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::gauss::rat;
    use crate::symkernel::print::print;

    fn env() -> ParamEnv {
        ParamEnv::new().with("q4", rat(1, 2)).with("a", rat(1, 1))
    }

    #[test]
    fn parses_table_formula() {
        let e = parse("q4*(exp(-2*x4)-1)", &env()).unwrap();
        assert_eq!(print(&e), "1/2*exp(-2*x4) - 1/2");
    }

    #[test]
    fn rejects_non_unit_division() {
        assert!(matches!(Expr::parse("1/x1"), Err(SymError::Syntax { pos: 2, .. })));
        assert!(Expr::parse("x1/exp(x4)").is_ok());
        assert!(Expr::parse("x1/(a+1)").is_ok());
        assert!(Expr::parse_fraction("1/cos(x2)").is_ok());
    }

    #[test]
    fn syntax_errors_have_positions() {
        match Expr::parse("q3*(exp(-(x1+x3)") {
            Err(SymError::Syntax { pos, .. }) => assert_eq!(pos, 16),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("0.5*x1"), Err(SymError::Syntax { .. })));
        assert!(matches!(Expr::parse("sqrt(x1)"), Err(SymError::UnknownSymbol { .. })));
    }

    #[test]
    fn degenerate_exponent_substitution() {
        let e = parse("exp(-(a+2)*x4)-1", &ParamEnv::new().with("a", rat(-2, 1))).unwrap();
        assert!(e.is_zero());
        let e = parse("exp(-(a+1)*x3)", &env()).unwrap();
        assert_eq!(print(&e), "exp(-2*x3)");
    }

    #[test]
    fn unbound_parameter() {
        assert!(matches!(parse("b*x1", &env()), Err(SymError::UnboundParameter(n)) if n == "b"));
    }
}
