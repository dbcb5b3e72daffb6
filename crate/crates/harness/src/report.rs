//! Per-run reports and their CSV form.

use std::fmt;

use arena_core::octree::ListCounts;
use arena_core::{ArenaError, Result};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    /// Error at or below the target.
    Ok,
    NotAchieved,
    Failed(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::NotAchieved => f.write_str("not_achieved"),
            Status::Failed(_) => f.write_str("failed"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub config: RunConfig,
    pub status: Status,
    pub unknowns: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    /// PCG iterations (gmg).
    pub iterations: Option<usize>,
    /// Interaction counts (fmm).
    pub counts: Option<ListCounts>,
    /// Multiply-adds of the U-list phase (fmm).
    pub work_u: Option<f64>,
    pub u_phase_seconds: Option<f64>,
    /// Refinement level: log2 n (fft), deepest leaf (fmm), log2 e (gmg).
    pub level: Option<u32>,
    /// Relative ℓ∞ error on the solver's native points; NaN when failed.
    pub linf_rel_error: f64,
    /// Relative ℓ∞ error on the shared Halton set, if requested.
    pub sample_error: Option<f64>,
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: &[&str] = &[
    "solver",
    "case",
    "target",
    "q",
    "m",
    "n",
    "e",
    "depth",
    "tol",
    "threads",
    "seed",
    "status",
    "unknowns",
    "level",
    "iterations",
    "u",
    "v",
    "w",
    "x",
    "work_u",
    "linf_rel_error",
    "sample_error",
    "setup_seconds",
    "solve_seconds",
    "u_phase_seconds",
    "message",
];

/// Wall-clock columns; everything else is reproducible for a fixed config.
pub const VOLATILE_COLUMNS: &[&str] = &["setup_seconds", "solve_seconds", "u_phase_seconds"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl SolveReport {
    pub fn failed(config: RunConfig, msg: String) -> Self {
        SolveReport {
            config,
            status: Status::Failed(msg),
            unknowns: 0,
            setup_seconds: 0.0,
            solve_seconds: 0.0,
            iterations: None,
            counts: None,
            work_u: None,
            u_phase_seconds: None,
            level: None,
            linf_rel_error: f64::NAN,
            sample_error: None,
            warnings: Vec::new(),
        }
    }

    pub fn total_seconds(&self) -> f64 {
        self.setup_seconds + self.solve_seconds
    }

    pub fn succeeded(&self) -> bool {
        !matches!(self.status, Status::Failed(_))
    }

    pub fn row(&self) -> Vec<String> {
        let c = &self.config;
        let msg = match &self.status {
            Status::Failed(m) => m.clone(),
            _ => self.warnings.join("; "),
        };
        vec![
            c.solver.to_string(),
            c.case.to_string(),
            format!("{:e}", c.target),
            opt(c.q),
            opt(c.m),
            opt(c.n),
            opt(c.e),
            opt(c.depth),
            opt(c.tol.map(|t| format!("{t:e}"))),
            c.threads.to_string(),
            c.seed.to_string(),
            self.status.to_string(),
            self.unknowns.to_string(),
            opt(self.level),
            opt(self.iterations),
            opt(self.counts.map(|k| k.u)),
            opt(self.counts.map(|k| k.v)),
            opt(self.counts.map(|k| k.w)),
            opt(self.counts.map(|k| k.x)),
            opt(self.work_u.map(|w| format!("{w:e}"))),
            format!("{:e}", self.linf_rel_error),
            opt(self.sample_error.map(|e| format!("{e:e}"))),
            format!("{:.6e}", self.setup_seconds),
            format!("{:.6e}", self.solve_seconds),
            opt(self.u_phase_seconds.map(|t| format!("{t:.6e}"))),
            msg,
        ]
    }

    /// Row with the volatile timing columns blanked.
    pub fn stable_row(&self) -> Vec<String> {
        let mut r = self.row();
        for (i, h) in CSV_HEADER.iter().enumerate() {
            if VOLATILE_COLUMNS.contains(h) {
                r[i].clear();
            }
        }
        r
    }
}

pub fn write_csv(reports: &[SolveReport], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ArenaError::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record(r.row()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(reports: &[SolveReport]) -> String {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Reads reports written by [`write_csv`]. Only the columns needed by the
/// table and fit commands are restored; the rest take config defaults.
pub fn read_csv(text: &str) -> Result<Vec<SolveReport>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rd.headers().map_err(|e| ArenaError::Parse { line: 1, msg: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(ArenaError::Parse { line: 1, msg: "unexpected report header".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| ArenaError::Parse { line, msg: e.to_string() })?;
        let get = |name: &str| rec.get(CSV_HEADER.iter().position(|h| *h == name).unwrap()).unwrap_or("");
        let perr = |name: &str, e: &dyn fmt::Display| ArenaError::Parse { line, msg: format!("{name}: {e}") };
        let num = |name: &str| -> Result<f64> { get(name).parse::<f64>().map_err(|e| perr(name, &e)) };
        let maybe_usize = |name: &str| -> Result<Option<usize>> {
            let v = get(name);
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|e| perr(name, &e))
            }
        };
        let maybe_f64 = |name: &str| -> Result<Option<f64>> {
            let v = get(name);
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|e| perr(name, &e))
            }
        };
        let mut cfg = RunConfig::new(get("solver").parse()?, get("case").parse()?);
        for key in ["target", "q", "m", "n", "e", "depth", "tol", "threads", "seed"] {
            if !get(key).is_empty() {
                cfg.set(key, get(key)).map_err(|e| perr(key, &e))?;
            }
        }
        let status = match get("status") {
            "ok" => Status::Ok,
            "not_achieved" => Status::NotAchieved,
            "failed" => Status::Failed(get("message").to_string()),
            other => return Err(perr("status", &format!("unknown status '{other}'"))),
        };
        let counts = match (maybe_usize("u")?, maybe_usize("v")?, maybe_usize("w")?, maybe_usize("x")?) {
            (Some(u), Some(v), Some(w), Some(x)) => Some(ListCounts { u, v, w, x }),
            _ => None,
        };
        out.push(SolveReport {
            config: cfg,
            status,
            unknowns: maybe_usize("unknowns")?.unwrap_or(0),
            setup_seconds: num("setup_seconds")?,
            solve_seconds: num("solve_seconds")?,
            iterations: maybe_usize("iterations")?,
            counts,
            work_u: maybe_f64("work_u")?,
            u_phase_seconds: maybe_f64("u_phase_seconds")?,
            level: maybe_usize("level")?.map(|l| l as u32),
            linf_rel_error: num("linf_rel_error")?,
            sample_error: maybe_f64("sample_error")?,
            warnings: Vec::new(),
        });
    }
    Ok(out)
}
