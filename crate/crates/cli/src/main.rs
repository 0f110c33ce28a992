//! `gphit <subcommand> --config <file> [--assert] [--out <dir>]`
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
//! 3 assertion failure under `--assert`.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use commands::{Failure, Outcome};
use config::{AssertSpec, ExperimentConfig, Format};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Paths,
    Laplace,
    Identity,
    Ibp,
    Moments,
    Tail,
    CheckKernel,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Paths => "paths",
            Command::Laplace => "laplace",
            Command::Identity => "identity",
            Command::Ibp => "ibp",
            Command::Moments => "moments",
            Command::Tail => "tail",
            Command::CheckKernel => "check-kernel",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gphit", version, about = "Monte Carlo experiments on hitting times of Gaussian processes")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Evaluate the configured tolerances and exit 3 if any check fails.
    #[arg(long)]
    assert: bool,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_ASSERT: u8 = 3;

fn load_config(path: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Ok(w) = std::env::var("GPHIT_WORKERS") {
        cfg.mc.workers = w
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("GPHIT_WORKERS must be a positive integer, got {w:?}")))?;
    }
    if cfg.mc.workers == 0 {
        return Err(Failure::Config("mc.workers must be >= 1".into()));
    }
    if out.is_some() {
        cfg.output.dir = out;
    }
    Ok(cfg)
}

fn dispatch(cmd: Command, cfg: &ExperimentConfig, spec: &AssertSpec) -> Result<Outcome, Failure> {
    match cmd {
        Command::Paths => commands::paths(cfg),
        Command::Laplace => commands::laplace(cfg, spec),
        Command::Identity => commands::identity(cfg, spec),
        Command::Ibp => commands::ibp(cfg, spec),
        Command::Moments => commands::moments(cfg, spec),
        Command::Tail => commands::tail(cfg, spec),
        Command::CheckKernel => commands::check_kernel(cfg),
    }
}

fn write_outputs(cmd: Command, cfg: &ExperimentConfig, summary: &str, outcome: &Outcome) -> Result<(), Failure> {
    let Some(dir) = &cfg.output.dir else {
        return Ok(());
    };
    let io = |e: std::io::Error| Failure::Config(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    if cfg.wants(Format::Json) {
        fs::write(dir.join(format!("{}.json", cmd.name())), summary).map_err(io)?;
    }
    if cfg.wants(Format::Csv) {
        for (name, body) in &outcome.tables {
            fs::write(dir.join(name), body).map_err(io)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = load_config(&cli.config, cli.out)?;
    let spec = cfg.assertion.clone().unwrap_or_default();
    let outcome = dispatch(cli.command, &cfg, &spec)?;
    let passed = outcome.checks.iter().all(|c| c.passed);
    let mut summary = json!({
        "command": cli.command.name(),
        "config": cfg,
        "seed": cfg.mc.master_seed,
        "result": outcome.result,
    });
    if cli.assert {
        summary["assert"] = json!({
            "passed": passed,
            "spec": spec,
            "checks": outcome.checks,
        });
    }
    let text = serde_json::to_string_pretty(&summary).expect("serializable") + "\n";
    write_outputs(cli.command, &cfg, &text, &outcome)?;
    print!("{text}");
    if cli.assert && !passed {
        for c in outcome.checks.iter().filter(|c| !c.passed) {
            eprintln!("assertion failed: {} = {} (limit {})", c.name, fmt(c.value), fmt(c.limit));
        }
        return Ok(false);
    }
    Ok(true)
}

fn fmt(v: f64) -> Value {
    json!(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ASSERT),
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
