//! Exact multivariate rational-function arithmetic.
//!
//! [`Polynomial`] stores terms in a `BTreeMap` keyed by [`Monomial`] under
//! graded lexicographic order, with `BigRational` coefficients.
//! [`RationalExpr`] is a numerator/denominator pair kept in the canonical
//! form "denominator has integer content one and positive leading
//! coefficient".  No multivariate gcd is attempted: equality of two
//! expressions is decided by cross multiplication, which is exact and cheap
//! for the sizes this crate meets.

mod expr;
mod parse;
mod poly;

pub use expr::RationalExpr;
pub use parse::parse_expr;
pub use poly::{Monomial, Polynomial};
