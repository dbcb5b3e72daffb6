//! Benchmark driver for the arena solvers: configuration, single runs,
//! minimal-N sweeps, comparison tables and cost-model fits.

pub mod config;
pub mod fit;
pub mod report;
pub mod run;
pub mod sweep;
pub mod table;

pub use config::{parse_config, RunConfig, Solver};
pub use fit::{fit_constants, fit_model, Fit, SolverFit};
pub use report::{read_csv, to_csv_string, write_csv, SolveReport, Status};
pub use run::{run_single, run_with_samples, RunOutput};
pub use sweep::{find_min_n, growth_schedule, Sweep};
pub use table::{compare_table, Table};

/// Process exit codes of the `arena` binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_ACHIEVED: i32 = 2;
