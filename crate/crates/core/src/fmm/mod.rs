//! Kernel-independent volume FMM for piecewise-Chebyshev sources.

mod evaluate;
pub mod ewald;
mod kernel;
mod operators;
pub mod quadrature;
mod surface;
pub mod symmetry;
pub mod tables;

pub use kernel::LaplaceKernel;
pub use surface::{EquivalentSurface, SurfaceRole};
pub use evaluate::{fmm_evaluate, fmm_evaluate_with, FmmNodeData, FmmResult, FmmWork, PhaseTimes};
pub use operators::{FmmOperators, FmmParams, SetupStats};
