//! Run configuration and the `key = value` config file format.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use arena_core::problems::TestCase;
use arena_core::{ArenaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Fft,
    Fmm,
    Gmg,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Fft => "fft",
            Solver::Fmm => "fmm",
            Solver::Gmg => "gmg",
        })
    }
}

impl FromStr for Solver {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fft" => Ok(Solver::Fft),
            "fmm" => Ok(Solver::Fmm),
            "gmg" => Ok(Solver::Gmg),
            other => Err(ArenaError::Config(format!("unknown solver '{other}' (expected fft, fmm or gmg)"))),
        }
    }
}

/// Everything one run needs. Solver-specific fields left at `None` take the
/// solver's default (see [`RunConfig::resolved`]).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub solver: Solver,
    pub case: TestCase,
    /// Accuracy target for the relative ℓ∞ error.
    pub target: f64,
    /// Chebyshev order (fmm) or element order (gmg).
    pub q: Option<usize>,
    /// Equivalent-surface points per edge (fmm).
    pub m: Option<usize>,
    /// Grid points per axis (fft).
    pub n: Option<usize>,
    /// Elements per axis on the finest mesh (gmg).
    pub e: Option<usize>,
    /// Maximum tree depth (fmm).
    pub depth: Option<u8>,
    pub min_depth: Option<u8>,
    /// Refinement tolerance relative to the root max of |f| (fmm).
    pub tol: Option<f64>,
    pub levels: Option<usize>,
    pub nu_pre: Option<usize>,
    pub nu_post: Option<usize>,
    pub omega: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub pinv_cutoff: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
    /// Halton points for the shared sample set; 0 skips it.
    pub samples: usize,
    /// Cap on native sample points; larger sets are subsampled with `seed`.
    pub max_native: usize,
}

pub const CONFIG_KEYS: &[&str] = &[
    "solver",
    "case",
    "target",
    "q",
    "m",
    "n",
    "e",
    "e_fine",
    "depth",
    "min_depth",
    "tol",
    "levels",
    "nu_pre",
    "nu_post",
    "omega",
    "rel_tol",
    "max_iter",
    "pinv_cutoff",
    "cache_dir",
    "threads",
    "seed",
    "samples",
    "max_native",
];

impl RunConfig {
    pub fn new(solver: Solver, case: TestCase) -> Self {
        RunConfig {
            solver,
            case,
            target: 1e-7,
            q: None,
            m: None,
            n: None,
            e: None,
            depth: None,
            min_depth: None,
            tol: None,
            levels: None,
            nu_pre: None,
            nu_post: None,
            omega: None,
            rel_tol: None,
            max_iter: None,
            pinv_cutoff: None,
            cache_dir: None,
            threads: 1,
            seed: 0,
            samples: 0,
            max_native: 200_000,
        }
    }

    /// Fills solver defaults: fft n=32; fmm q=14, m=10, depth=5, min_depth=1,
    /// tol=1e-8; gmg q=4, e=16, ν=(2,1), ω=2/3, rel_tol=1e-13, max_iter=200.
    pub fn resolved(&self) -> RunConfig {
        let mut c = self.clone();
        match c.solver {
            Solver::Fft => {
                c.n.get_or_insert(32);
            }
            Solver::Fmm => {
                c.q.get_or_insert(14);
                c.m.get_or_insert(10);
                c.depth.get_or_insert(5);
                c.min_depth.get_or_insert(1);
                c.tol.get_or_insert(1e-8);
                c.pinv_cutoff.get_or_insert(1e-10);
            }
            Solver::Gmg => {
                c.q.get_or_insert(4);
                c.e.get_or_insert(16);
                c.nu_pre.get_or_insert(2);
                c.nu_post.get_or_insert(1);
                c.omega.get_or_insert(2.0 / 3.0);
                c.rel_tol.get_or_insert(1e-13);
                c.max_iter.get_or_insert(200);
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.case.validate()?;
        if !(self.target > 0.0) {
            return Err(ArenaError::Config(format!("target must be positive, got {}", self.target)));
        }
        if self.threads == 0 {
            return Err(ArenaError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Sets one key from its string form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = |e: &dyn fmt::Display| ArenaError::Config(format!("{key} = '{v}': {e}"));
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, T::Err> {
            v.parse::<T>()
        }
        macro_rules! parse {
            ($t:ty) => {
                num::<$t>(v).map_err(|e| bad(&e))?
            };
        }
        match key.trim() {
            "solver" => self.solver = v.parse()?,
            "case" => self.case = v.parse()?,
            "target" => self.target = parse!(f64),
            "q" => self.q = Some(parse!(usize)),
            "m" => self.m = Some(parse!(usize)),
            "n" => self.n = Some(parse!(usize)),
            "e" | "e_fine" => self.e = Some(parse!(usize)),
            "depth" => self.depth = Some(parse!(u8)),
            "min_depth" => self.min_depth = Some(parse!(u8)),
            "tol" => self.tol = Some(parse!(f64)),
            "levels" => self.levels = Some(parse!(usize)),
            "nu_pre" => self.nu_pre = Some(parse!(usize)),
            "nu_post" => self.nu_post = Some(parse!(usize)),
            "omega" => self.omega = Some(parse!(f64)),
            "rel_tol" => self.rel_tol = Some(parse!(f64)),
            "max_iter" => self.max_iter = Some(parse!(usize)),
            "pinv_cutoff" => self.pinv_cutoff = Some(parse!(f64)),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
            "threads" => self.threads = parse!(usize),
            "seed" => self.seed = parse!(u64),
            "samples" => self.samples = parse!(usize),
            "max_native" => self.max_native = parse!(usize),
            other => return Err(ArenaError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Builds a config from parsed `key = value` pairs; `solver` and `case`
    /// are required.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let find = |k: &str| pairs.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let solver = find("solver").ok_or_else(|| ArenaError::Config("missing key 'solver'".into()))?.parse()?;
        let case = find("case").ok_or_else(|| ArenaError::Config("missing key 'case'".into()))?.parse()?;
        let mut c = RunConfig::new(solver, case);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// `key=value` pairs of every set field, in [`CONFIG_KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("solver", self.solver.to_string()),
            ("case", self.case.to_string()),
            ("target", format!("{:e}", self.target)),
        ];
        let mut opt = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        opt("q", self.q.map(|v| v.to_string()));
        opt("m", self.m.map(|v| v.to_string()));
        opt("n", self.n.map(|v| v.to_string()));
        opt("e", self.e.map(|v| v.to_string()));
        opt("depth", self.depth.map(|v| v.to_string()));
        opt("min_depth", self.min_depth.map(|v| v.to_string()));
        opt("tol", self.tol.map(|v| format!("{v:e}")));
        opt("levels", self.levels.map(|v| v.to_string()));
        opt("nu_pre", self.nu_pre.map(|v| v.to_string()));
        opt("nu_post", self.nu_post.map(|v| v.to_string()));
        opt("omega", self.omega.map(|v| format!("{v:e}")));
        opt("rel_tol", self.rel_tol.map(|v| format!("{v:e}")));
        opt("max_iter", self.max_iter.map(|v| v.to_string()));
        opt("pinv_cutoff", self.pinv_cutoff.map(|v| format!("{v:e}")));
        opt("cache_dir", self.cache_dir.as_ref().map(|p| p.display().to_string()));
        out.push(("threads", self.threads.to_string()));
        out.push(("seed", self.seed.to_string()));
        out.push(("samples", self.samples.to_string()));
        out.push(("max_native", self.max_native.to_string()));
        out
    }

    pub fn to_config_text(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parses `key = value` lines. `#` starts a comment, blank lines are
/// skipped, keys must be known and values non-empty.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ArenaError::Parse { line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(err(format!("unknown key '{k}'")));
        }
        if v.is_empty() {
            return Err(err(format!("empty value for '{k}'")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
