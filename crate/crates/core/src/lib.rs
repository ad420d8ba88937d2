//! Numerical companion to the study of low-lying zeros of Hilbert modular
//! L-functions and their Rankin-Selberg convolutions.

pub mod bessel;
pub mod classifier;
pub mod error;
pub mod explicit_formula;
pub mod kloosterman;
pub mod nf;
pub mod petersson;
pub mod registry;
pub mod rmt;
pub mod sato_tate;
pub mod testfn;

pub use error::{Error, Result};
