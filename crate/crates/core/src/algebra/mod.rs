//! Exact rationals, polynomials and rational functions.

mod heugcd;
mod poly;
mod rat;
mod ratfunc;

pub use poly::{Monomial, Poly};
pub use rat::Rat;
pub use ratfunc::RatFunc;
