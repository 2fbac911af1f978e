//! Boundary shells of the normal-offset deformation, the level-set
//! function and cutoffs built from it, and probes of the weak formulation
//! (shell fluxes, weak-form residual, initial trace) on trajectories.

pub mod cutoffs;
pub mod deformation;
pub mod flux;
pub mod level_set;
pub mod test_functions;

pub use cutoffs::{build_cutoffs, CutoffFamily};
pub use deformation::{build_deformation, Deformation, Shell, ShellNode};
pub use flux::{decay_table, initial_trace_check, shell_flux, weak_residual, DecayTable, WeakResidual};
pub use level_set::{build_level_set, LevelSetField};
pub use test_functions::{boundary_family, trace_family, weak_family, Bump1, SpaceTimeBump, SpatialTest};
