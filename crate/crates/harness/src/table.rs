//! Comparison tables as gnuplot data plus a plotting script.

use std::fmt::Write as _;

use arena_core::problems::TestCase;
use arena_core::{ArenaError, Result};

use crate::report::SolveReport;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Whitespace-separated columns with a `#` header line.
    pub data: String,
    /// gnuplot script reading `data_file`.
    pub script: String,
}

fn case_param(tc: &TestCase) -> String {
    match tc {
        TestCase::Oscillatory { k } => format!("k={k}"),
        TestCase::Layer { alpha, .. } => format!("alpha={alpha}"),
    }
}

/// One row per report: solver, threads (p), case parameter, T = setup +
/// solve, setup, solve, ℓ∞ error, level L and N. There is no Comm column
/// on a single node.
pub fn compare_table(reports: &[SolveReport], data_file: &str) -> Result<Table> {
    let first = reports.first().ok_or_else(|| ArenaError::InvalidArgument("no reports to tabulate".into()))?;
    if let Some(r) = reports.iter().find(|r| r.config.case != first.config.case) {
        return Err(ArenaError::InvalidArgument(format!(
            "mixed test cases in one table: {} and {}",
            first.config.case, r.config.case
        )));
    }
    let mut data = String::new();
    writeln!(data, "# case {} (single node, no Comm column)", first.config.case).unwrap();
    writeln!(data, "# solver p param T setup solve linf L N").unwrap();
    for r in reports {
        writeln!(
            data,
            "{} {} {} {:.4e} {:.4e} {:.4e} {:.3e} {} {}",
            r.config.solver,
            r.config.threads,
            case_param(&r.config.case),
            r.total_seconds(),
            r.setup_seconds,
            r.solve_seconds,
            r.linf_rel_error,
            r.level.map_or("-".to_string(), |l| l.to_string()),
            r.unknowns
        )
        .unwrap();
    }
    let mut script = String::new();
    writeln!(script, "# time to solution against accuracy, one curve per solver").unwrap();
    writeln!(script, "set logscale xy").unwrap();
    writeln!(script, "set xlabel 'relative linf error'").unwrap();
    writeln!(script, "set ylabel 'T [s]'").unwrap();
    writeln!(script, "set key top right").unwrap();
    let mut solvers: Vec<String> = reports.iter().map(|r| r.config.solver.to_string()).collect();
    solvers.dedup();
    solvers.sort();
    solvers.dedup();
    let plots: Vec<String> = solvers
        .iter()
        .map(|s| format!("'{data_file}' using (strcol(1) eq '{s}' ? $7 : NaN):4 with linespoints title '{s}'"))
        .collect();
    writeln!(script, "plot {}", plots.join(", \\\n     ")).unwrap();
    Ok(Table { data, script })
}
