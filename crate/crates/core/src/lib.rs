//! Exact weighted Morse homotopy categories on the moment polytope of a
//! weighted projective space `P(q_0, ..., q_n)`, together with the mirror
//! DG category and a check of the functor between them.

pub mod arith;
pub mod error;
pub mod export;
pub mod flow;
pub mod homs;
pub mod lattice;
pub mod mirror;
pub mod morse;
pub mod verify;

pub use error::{Error, Result};
