//! Numerical certification of spectral membership for weighted
//! one-dimensional Schrödinger operators via Shnol-type growth conditions.

pub mod builtin;
pub mod cutoff;
pub mod error;
pub mod grid;
pub mod operator;
pub mod profile;
pub mod shnol;
pub mod special;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
