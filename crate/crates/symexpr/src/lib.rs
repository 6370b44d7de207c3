//! Exact symbolic arithmetic on multivariate rational functions with
//! rational coefficients.
//!
//! Every [`Expr`] is kept in a canonical reduced form, so zero testing and
//! equality are syntactic. [`Jet2`] provides an independent floating-point
//! route (value, gradient, Hessian) used to cross-check symbolic results.

mod expr;
pub mod gcd;
mod jet;
mod monomial;
mod parse;
mod poly;
mod vars;

pub use expr::Expr;
pub use jet::Jet2;
pub use monomial::Monomial;
pub use parse::parse;
pub use poly::{rational_to_f64, Poly};
pub use vars::Vars;

/// Arbitrary-precision rational numbers.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by an expression that is identically zero at position {pos}")]
    DivisionByZeroAt { pos: usize },
    #[error("expression uses variable x{0}, which the evaluation point does not cover")]
    UnknownVariable(usize),
    #[error("pole at the evaluation point")]
    Pole,
}

/// Shorthand for a rational constant `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
