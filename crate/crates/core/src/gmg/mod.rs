//! Geometric multigrid for periodic `Q_q` finite elements on uniform meshes.

mod mesh;
mod solver;

pub use mesh::{prolong, restrict, MeshLevel, NodalField, Transfer};
pub use solver::{gmg_solve, history_csv, GmgParams, GmgSolution, MgHierarchy, PcgOutcome};
