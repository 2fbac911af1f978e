//! Grids, coefficient fields and the discrete divergence-form operator.

pub mod coefficient;
pub mod grid;
pub mod operator;
pub mod sparse;

pub use coefficient::{CoefficientField, CoefficientSpec};
pub use grid::{DomainSpec, Face, FluxPoint, Grid, GridDescriptor};
pub use operator::EllipticOperator;
pub use sparse::{BandedCholesky, CsrMatrix};
