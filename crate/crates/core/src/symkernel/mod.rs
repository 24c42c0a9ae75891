//! Exact arithmetic and calculus on exponential polynomials.
//!
//! The class is generated by the coordinates, exponentials of linear forms and
//! sines/cosines of linear forms. Everything is kept in a canonical normal form
//! so that equality of functions is equality of values.

pub mod exppoly;
pub mod expr;
pub mod fraction;
pub mod gauss;
pub mod linalg;
pub mod print;

use thiserror::Error;

pub use exppoly::{ExpPoly, ExpPolyTerm, Frequency, Monomial, MAX_AXES};
pub use expr::{parse, parse_constant, parse_fraction, Expr, ParamEnv};
pub use fraction::Fraction;
pub use gauss::{format_rational, format_rational_vec, parse_rational, rat, rat_int, GaussianRational, Rational};
pub use print::print;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown symbol '{name}' at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("unbound parameter '{0}'")]
    UnboundParameter(String),
    #[error("non-real result (imaginary residue {residue:e})")]
    NonRealResult { residue: f64 },
    #[error("evaluation point has non-finite coordinates")]
    NonFinitePoint,
    #[error("argument is not a linear form in the coordinates: {0}")]
    NotLinearForm(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor is not a constant or pure exponential: {0}")]
    NonUnitDivisor(String),
    #[error("expression is not a real constant: {0}")]
    NotConstant(String),
}
