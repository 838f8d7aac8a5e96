//! Finite-field arithmetic and dense linear algebra over GF(2^w).

mod field;
mod matrix;

pub use field::{mul_shift_reduce, Field, FieldSpec, Symbol};
pub use matrix::{cauchy, vandermonde, ErasureSolver, Matrix};
