//! Minimal-N search over a growth schedule.

use crate::config::{RunConfig, Solver};
use crate::report::SolveReport;
use crate::run::run_single;

/// `steps` configurations growing the problem size: fft doubles `n`, gmg
/// doubles `e`, fmm deepens the maximum tree depth by one level.
pub fn growth_schedule(template: &RunConfig, steps: usize) -> Vec<RunConfig> {
    let base = template.resolved();
    (0..steps)
        .map(|i| {
            let mut c = base.clone();
            match c.solver {
                Solver::Fft => c.n = c.n.map(|n| n << i),
                Solver::Gmg => c.e = c.e.map(|e| e << i),
                Solver::Fmm => c.depth = c.depth.map(|d| d + i as u8),
            }
            c
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Sweep {
    /// Every run in schedule order, up to and including the chosen one.
    pub reports: Vec<SolveReport>,
    /// Index into `reports` of the first run meeting its target.
    pub chosen: Option<usize>,
}

impl Sweep {
    pub fn chosen_report(&self) -> Option<&SolveReport> {
        self.chosen.map(|i| &self.reports[i])
    }

    /// Smallest error seen, for not-achieved sweeps.
    pub fn best(&self) -> Option<&SolveReport> {
        self.reports
            .iter()
            .filter(|r| r.succeeded())
            .min_by(|a, b| a.linf_rel_error.total_cmp(&b.linf_rel_error))
    }
}

/// Runs the schedule in order and stops at the first report whose error
/// meets `target`. Failed runs are recorded and the sweep continues.
pub fn find_min_n(schedule: &[RunConfig], target: f64) -> Sweep {
    let mut reports = Vec::new();
    for cfg in schedule {
        let mut cfg = cfg.clone();
        cfg.target = target;
        let r = run_single(&cfg);
        log::info!("{} N={} error={:e}", cfg.solver, r.unknowns, r.linf_rel_error);
        let hit = r.succeeded() && r.linf_rel_error <= target;
        reports.push(r);
        if hit {
            return Sweep { chosen: Some(reports.len() - 1), reports };
        }
    }
    Sweep { reports, chosen: None }
}
