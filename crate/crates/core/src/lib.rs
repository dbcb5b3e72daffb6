//! Poisson solvers for `-Δu = f` on the periodic unit cube.
//!
//! Three independent solvers share the crate:
//!
//! * [`spectral`]: FFT-based diagonal inversion on a uniform `n³` grid.
//! * [`fmm`]: a kernel-independent volume fast multipole method acting on a
//!   piecewise-Chebyshev source stored on an adaptive, 2:1-balanced
//!   [`octree`].
//! * [`gmg`]: matrix-free geometric multigrid for high-order tensor-product
//!   finite elements, used as a preconditioner for conjugate gradients.
//!
//! [`problems`] holds the manufactured solutions used to measure accuracy.

pub mod chebyshev;
pub mod error;
pub mod fmm;
pub mod gmg;
pub mod octree;
pub mod problems;
pub mod quadrature;
pub mod spectral;

pub use error::{ArenaError, Result};

/// A point in the unit cube.
pub type Point = [f64; 3];
