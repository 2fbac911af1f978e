//! Spectral fractional elliptic calculus on tensor grids and a regularized
//! nonlocal porous-medium solver with estimate diagnostics.

pub mod elliptic;
pub mod error;
pub mod lab;
pub mod probe;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
