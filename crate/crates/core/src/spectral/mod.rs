//! Spectral decomposition of the discrete operator, fractional powers, the
//! heat-semigroup quadrature oracle and the inequality suite.

pub mod decomposition;
pub mod eigen;
pub mod gradient;
pub mod inequalities;
pub mod semigroup;

pub use decomposition::{FractionalOperator, SpectralDecomposition, MAX_UNKNOWNS};
pub use gradient::{discrete_gradient, FaceGradient};
pub use inequalities::{check_inequalities, measure_inequalities, InequalityRecord, InequalityReport};
pub use semigroup::{apply_inverse_power_semigroup, apply_power_semigroup, heat_semigroup, HeatPath, QuadratureSpec};
