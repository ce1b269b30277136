//! Macrorealistic diffusion rates, Wigner-function evolution and Bayesian exclusion
//! bounds for acoustic resonator modes.
//!
//! All quantities are SI internally. Wigner functions use dimensionless quadratures X, P.

pub mod constants;
pub mod devices;
pub mod diffusion;
pub mod error;
pub mod inference;
pub mod io;
pub mod nonint;
pub mod quadrature;
pub mod reproduce;
pub mod special;
pub mod wigner;

mod par;

pub use error::{Error, Result};
