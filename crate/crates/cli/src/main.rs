use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chaosqec::config::{CodeChoice, RunConfig};
use chaosqec::harness::{
    run_census, run_chaos, run_simulation, run_sweep, run_theory, run_verify_code,
};
use chaosqec::Error;
use clap::{Args, Parser, Subcommand};

/// Error correction fidelity of spins under random Hamiltonians.
///
/// Settings come from a flat key=value config file; `--set` overrides single
/// keys. Exit codes: 0 success, 1 configuration error, 2 numerical failure.
#[derive(Parser)]
#[command(name = "chaosqec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file with lattice., disorder., code. and run. keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set disorder.j2=0.25`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV destination; defaults to run.output, then stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Shorthand for `--set run.seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for `--set run.realizations=N`.
    #[arg(short = 'n', long)]
    realizations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic lower bound, its erf form and the overlap estimate.
    Theory(Common),
    /// Ensemble-averaged fidelity curve.
    Simulate(Common),
    /// One curve per value of run.sweep_axis.
    Sweep(Common),
    /// Non-degeneracy and stabilizer checks for a code.
    VerifyCode {
        /// Built-in name or path to a generator file; defaults to code.name.
        code: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Participation ratios of the eigenstates.
    Chaos(Common),
    /// Error-space weight by numbers of phase and flip letters.
    Census(Common),
}

fn load(common: &Common) -> chaosqec::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for item in &common.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        cfg.disorder.seed = seed;
    }
    if let Some(n) = common.realizations {
        cfg.realizations = n;
    }
    if let Some(p) = &common.output {
        cfg.output = Some(p.clone());
    }
    Ok(cfg)
}

/// Writes CSV to the configured file or stdout. The summary goes to stdout
/// when the CSV goes to a file and to stderr otherwise.
fn emit<F>(cfg: &RunConfig, summary: &str, write_csv: F) -> chaosqec::Result<()>
where
    F: FnOnce(&mut dyn Write) -> chaosqec::Result<()>,
{
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&mut w)?;
            w.flush()?;
            print!("{summary}");
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_csv(&mut w)?;
            w.flush()?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("not reached".into(), |v| format!("{v:.6}"))
}

enum Outcome {
    Ok,
    Failed,
}

fn run(command: Command) -> chaosqec::Result<Outcome> {
    match command {
        Command::Theory(common) => {
            let cfg = load(&common)?;
            let table = run_theory(&cfg)?;
            let summary = format!(
                "N={} K={} t_R={:.6} delta_t={:.6}\n",
                table.params.n_spins,
                table.params.max_errors(),
                table.t_r,
                table.delta_t
            );
            emit(&cfg, &summary, |w| table.write_csv(w))?;
        }
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let curve = run_simulation(&cfg)?;
            let h = curve.half_time();
            let summary = format!(
                "{} realizations, half-fidelity time {} (se {}), analytic t_R {:.6}\n",
                curve.n_realizations,
                fmt_opt(h.map(|h| h.t)),
                fmt_opt(h.map(|h| h.se)),
                curve.t_r
            );
            emit(&cfg, &summary, |w| curve.write_csv(w))?;
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let result = run_sweep(&cfg)?;
            let mut summary = Vec::new();
            result.write_summary(&mut summary)?;
            let summary = String::from_utf8_lossy(&summary).into_owned();
            emit(&cfg, &summary, |w| result.write_csv(w))?;
        }
        Command::VerifyCode { code, common } => {
            let mut cfg = load(&common)?;
            if let Some(c) = code {
                cfg.code = if c.contains('/') || c.contains('.') {
                    CodeChoice::File(PathBuf::from(c))
                } else {
                    CodeChoice::Builtin(c)
                };
            }
            let report = run_verify_code(&cfg)?;
            emit(&cfg, &report.summary(), |w| report.write_csv(w))?;
            if !report.passed() {
                return Ok(Outcome::Failed);
            }
        }
        Command::Chaos(common) => {
            let cfg = load(&common)?;
            let result = run_chaos(&cfg)?;
            let summary = format!(
                "{} realizations, median participation ratio {:.3} of {}\n",
                result.ratios.len(),
                result.ensemble_median(),
                1usize << cfg.n_spins
            );
            emit(&cfg, &summary, |w| result.write_csv(w))?;
        }
        Command::Census(common) => {
            let cfg = load(&common)?;
            let table = run_census(&cfg)?;
            let last = table.reports.last().cloned().unwrap_or_default();
            let summary = format!(
                "at t={}: phase-only {:.6}, with flips {:.6}, odd flip count {:.6}\n",
                table.times.last().copied().unwrap_or(0.0),
                last.phase_only(),
                last.flip(),
                last.odd_xy()
            );
            emit(&cfg, &summary, |w| table.write_csv(w))?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
