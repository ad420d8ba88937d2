//! Arithmetic of ℚ and real quadratic fields.

pub mod arith;
mod elements;
mod field;
mod ideal;

pub use field::{FieldElement, Integral, QuadField, RATIONALS};
pub use ideal::{Ideal, PrimeIdeal, SplitType};
