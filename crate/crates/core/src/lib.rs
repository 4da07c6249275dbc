pub mod algebra;
pub mod cc;
pub mod cli;
pub mod coords;
pub mod duality;
pub mod error;
pub mod format;
pub mod gallery;
pub mod jet;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod rowmodule;

pub use algebra::{Monomial, Poly, Rat, RatFunc};
pub use coords::CoordinateChange;
pub use error::{Error, Result};
pub use operators::{DiffOp, MultiIndex, OpMatrix, SymbolMatrix};
