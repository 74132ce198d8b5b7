//! Numerical toolkit for fractional-gradient analysis on sampled fields.

pub mod content;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod maximal;
pub mod norms;
mod par;
pub mod potentials;
pub mod quadrature;
pub mod report;
pub mod verify;
mod spectral;

pub use error::{Error, Result};
