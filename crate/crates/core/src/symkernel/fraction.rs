//! Quotients of exponential polynomials, for the few printed frames that carry
//! non-unit denominators such as `1/cos(x2)`.

use std::fmt;

use super::exppoly::ExpPoly;
use super::gauss::GaussianRational;
use super::print::print;
use super::SymError;

/// `num / den` with `den != 0`. Unit denominators are folded into the numerator.
#[derive(Clone, Debug)]
pub struct Fraction {
    num: ExpPoly,
    den: ExpPoly,
}

impl Fraction {
    pub fn new(num: ExpPoly, den: ExpPoly) -> Result<Self, SymError> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: ExpPoly, den: ExpPoly) -> Self {
        if num.is_zero() {
            return Self::from(ExpPoly::zero());
        }
        if let Some(inv) = den.unit_inverse() {
            return Self::from(num.mul(&inv));
        }
        // Make the leading denominator coefficient 1 so equal fractions tend to share denominators.
        let lead = den.terms()[0].coeff.clone();
        if let Some(inv) = lead.inv() {
            if !lead.is_one() {
                return Self {
                    num: num.scale(&inv),
                    den: den.scale(&inv),
                };
            }
        }
        Self { num, den }
    }

    pub fn num(&self) -> &ExpPoly {
        &self.num
    }

    pub fn den(&self) -> &ExpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The plain exponential polynomial, when the denominator is 1.
    pub fn as_exppoly(&self) -> Option<ExpPoly> {
        (self.den == ExpPoly::one()).then(|| self.num.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(self.num.add(&o.num), self.den.clone());
        }
        Self::normalized(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::from(ExpPoly::zero());
        }
        if self.den == o.num {
            return Self::normalized(self.num.clone(), o.den.clone());
        }
        if o.den == self.num {
            return Self::normalized(o.num.clone(), self.den.clone());
        }
        Self::normalized(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::normalized(self.num.scale(c), self.den.clone())
    }

    /// Panics on a zero numerator; callers check `is_zero` first.
    pub fn recip(&self) -> Self {
        assert!(!self.num.is_zero(), "reciprocal of zero fraction");
        Self::normalized(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::normalized(self.num.pow(k), self.den.pow(k))
    }

    pub fn differentiate(&self, axis: usize) -> Self {
        let dn = self.num.differentiate(axis);
        if self.den == ExpPoly::one() {
            return Self::from(dn);
        }
        let dd = self.den.differentiate(axis);
        Self::normalized(
            dn.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }

    /// Exact equality of the represented functions.
    pub fn equals(&self, o: &Self) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, SymError> {
        Ok(self.num.evaluate(point)? / self.den.evaluate(point)?)
    }
}

impl From<ExpPoly> for Fraction {
    fn from(num: ExpPoly) -> Self {
        Self {
            num,
            den: ExpPoly::one(),
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == ExpPoly::one() {
            write!(f, "{}", print(&self.num))
        } else {
            write!(f, "({})/({})", print(&self.num), print(&self.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::expr::{parse_fraction, ParamEnv};

    #[test]
    fn quotient_rule_and_equality() {
        let env = ParamEnv::new();
        let f = parse_fraction("sin(x2)/cos(x2)", &env).unwrap();
        let df = f.differentiate(1);
        let expected = parse_fraction("1/(cos(x2)*cos(x2))", &env).unwrap();
        assert!(df.equals(&expected));
        let one = f.mul(&f.recip());
        assert!(one.equals(&Fraction::from(ExpPoly::one())));
        assert!(parse_fraction("x1/exp(x2)", &env).unwrap().as_exppoly().is_some());
    }
}
