//! Time stepping of the regularized equation
//! `u_t = delta div(A grad u) + div((u + mu) A grad K u)` with diagnostics
//! for the mass, positivity, L-infinity and energy estimates, and the
//! `delta, mu -> 0` continuation.

pub mod continuation;
pub mod diagnostics;
pub mod initial;
pub mod params;
pub mod run;
pub mod scheme;

pub use continuation::{continuation, ContinuationReport};
pub use diagnostics::DiagnosticsRecord;
pub use initial::{prepare_initial, InitialSpec};
pub use params::SolverParams;
pub use run::{run, run_unchecked, RunStats, TimeLevel, Trajectory};
pub use scheme::{Solver, SolverState, StepReport};
