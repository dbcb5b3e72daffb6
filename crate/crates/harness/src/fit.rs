//! Least-squares constants of the complexity models `T = c·g(N)`.

use arena_core::{ArenaError, Result};

use crate::config::Solver;
use crate::report::SolveReport;

#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub constant: f64,
    /// Standard deviation of the per-run ratios `T_i / g_i`.
    pub std_dev: f64,
    /// Largest `|T_i - c g_i| / T_i`.
    pub max_rel_residual: f64,
}

/// Fits `t ≈ c·g` by least squares.
pub fn fit_model(g: &[f64], t: &[f64]) -> Result<Fit> {
    if g.len() != t.len() || g.len() < 2 {
        return Err(ArenaError::InvalidArgument("fit needs at least two (g, T) pairs".into()));
    }
    if g.iter().chain(t).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(ArenaError::InvalidArgument("fit inputs must be positive and finite".into()));
    }
    let c = g.iter().zip(t).map(|(g, t)| g * t).sum::<f64>() / g.iter().map(|g| g * g).sum::<f64>();
    let ratios: Vec<f64> = g.iter().zip(t).map(|(g, t)| t / g).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
    let max_rel_residual = g.iter().zip(t).map(|(g, t)| (t - c * g).abs() / t).fold(0.0, f64::max);
    Ok(Fit { constant: c, std_dev: var.sqrt(), max_rel_residual })
}

/// Model term per solver: `N log₂ N` for fft, `N` for fmm and gmg.
pub fn model_term(solver: Solver, n: usize) -> f64 {
    let n = n as f64;
    match solver {
        Solver::Fft => n * n.log2(),
        Solver::Fmm | Solver::Gmg => n,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverFit {
    pub solver: Solver,
    pub runs: usize,
    pub fit: Fit,
}

/// Fits solve time per solver. Each solver present needs at least three
/// successful reports spanning at least a factor 4 in N.
pub fn fit_constants(reports: &[SolveReport]) -> Result<Vec<SolverFit>> {
    let mut solvers: Vec<Solver> = reports.iter().map(|r| r.config.solver).collect();
    solvers.sort();
    solvers.dedup();
    if solvers.is_empty() {
        return Err(ArenaError::InvalidArgument("no reports to fit".into()));
    }
    let mut out = Vec::new();
    for s in solvers {
        let runs: Vec<&SolveReport> = reports.iter().filter(|r| r.config.solver == s && r.succeeded()).collect();
        let (lo, hi) = runs.iter().fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.unknowns), hi.max(r.unknowns)));
        if runs.len() < 3 || hi < 4 * lo.max(1) {
            return Err(ArenaError::InvalidArgument(format!(
                "{s}: need 3 runs spanning 4x in N, have {} spanning {lo}..{hi}",
                runs.len()
            )));
        }
        let g: Vec<f64> = runs.iter().map(|r| model_term(s, r.unknowns)).collect();
        let t: Vec<f64> = runs.iter().map(|r| r.solve_seconds).collect();
        out.push(SolverFit { solver: s, runs: runs.len(), fit: fit_model(&g, &t)? });
    }
    Ok(out)
}

pub fn fits_csv(fits: &[SolverFit]) -> String {
    let mut s = String::from("solver,model,runs,constant,std_dev,max_rel_residual\n");
    for f in fits {
        let model = if f.solver == Solver::Fft { "N log2 N" } else { "N" };
        s.push_str(&format!(
            "{},{model},{},{:.6e},{:.6e},{:.4}\n",
            f.solver, f.runs, f.fit.constant, f.fit.std_dev, f.fit.max_rel_residual
        ));
    }
    s
}
