use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use arena_core::{ArenaError, Result};
use arena_harness::{
    compare_table, find_min_n, fit::fits_csv, fit_constants, growth_schedule, parse_config, read_csv, run_single,
    to_csv_string, RunConfig, SolveReport, Status, EXIT_ERROR, EXIT_NOT_ACHIEVED, EXIT_OK,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arena", about = "Periodic Poisson solver benchmarks (fft, fmm, gmg)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configuration.
    Run {
        #[command(flatten)]
        run: RunArgs,
        /// CSV output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grow the problem until the target accuracy is met.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Number of schedule steps to try.
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Comparison table and gnuplot script from report CSV files.
    Table {
        inputs: Vec<PathBuf>,
        /// Output stem: writes <stem>.dat and <stem>.gp.
        #[arg(long)]
        out: PathBuf,
    },
    /// Least-squares cost-model constants from report CSV files.
    Fit {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    solver: Option<String>,
    /// Test case, e.g. osc:k=8 or layer:alpha=10.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    e: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Extra key=value settings, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut pairs = match &self.config {
            Some(p) => parse_config(&fs::read_to_string(p)?)?,
            None => Vec::new(),
        };
        let flags = [
            ("solver", &self.solver),
            ("case", &self.case),
            ("target", &self.target),
            ("q", &self.q),
            ("m", &self.m),
            ("n", &self.n),
            ("e", &self.e),
            ("depth", &self.depth),
            ("tol", &self.tol),
            ("threads", &self.threads),
            ("seed", &self.seed),
            ("samples", &self.samples),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.push((k.to_string(), v.clone()));
            }
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ArenaError::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        RunConfig::from_pairs(&pairs)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_reports(inputs: &[PathBuf]) -> Result<Vec<SolveReport>> {
    if inputs.is_empty() {
        return Err(ArenaError::InvalidArgument("no input files".into()));
    }
    let mut all = Vec::new();
    for p in inputs {
        all.extend(read_csv(&fs::read_to_string(p)?)?);
    }
    Ok(all)
}

fn exit_for(r: &SolveReport) -> i32 {
    match r.status {
        Status::Ok => EXIT_OK,
        Status::NotAchieved => EXIT_NOT_ACHIEVED,
        Status::Failed(_) => EXIT_ERROR,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Run { run, out } => {
            let r = run_single(&run.config()?);
            emit(&to_csv_string(std::slice::from_ref(&r)), out.as_ref())?;
            if let Status::Failed(m) = &r.status {
                eprintln!("error: {m}");
            }
            Ok(exit_for(&r))
        }
        Cmd::Sweep { run, steps, out } => {
            let cfg = run.config()?;
            let s = find_min_n(&growth_schedule(&cfg, steps), cfg.target);
            emit(&to_csv_string(&s.reports), out.as_ref())?;
            match s.chosen_report() {
                Some(r) => {
                    eprintln!("{}: target {:e} met with N = {}", cfg.solver, cfg.target, r.unknowns);
                    Ok(EXIT_OK)
                }
                None => {
                    if let Some(b) = s.best() {
                        eprintln!("{}: target not met, best error {:e} at N = {}", cfg.solver, b.linf_rel_error, b.unknowns);
                    }
                    Ok(EXIT_NOT_ACHIEVED)
                }
            }
        }
        Cmd::Table { inputs, out } => {
            let data = out.with_extension("dat");
            let t = compare_table(&read_reports(&inputs)?, &data.display().to_string())?;
            fs::write(&data, t.data)?;
            fs::write(out.with_extension("gp"), t.script)?;
            Ok(EXIT_OK)
        }
        Cmd::Fit { inputs, out } => {
            let fits = fit_constants(&read_reports(&inputs)?)?;
            emit(&fits_csv(&fits), out.as_ref())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match dispatch(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
