use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mpqg_cli::config::{Built, ConfigError, RunConfig};
use mpqg_cli::run::{reports_json, reports_text, run_suites, select_suites, violations};

#[derive(Parser)]
#[command(name = "mpqg", version, about = "Exact checks for formal multiparameter quantum groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON); defaults to A1 with P = DA.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Truncation order N, overriding the config.
    #[arg(long, global = true)]
    order: Option<i32>,
    /// Seed for randomized checks and inputs, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites; the exit status is 0 iff nothing fails.
    Verify {
        /// all, or one of the suite names.
        suite: Option<String>,
        /// Additional suite selection.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Evaluate an expression in the generators to normal form.
    Eval { expr: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), ConfigError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| ConfigError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::named("A1"),
    };
    if let Some(n) = cli.order {
        cfg.order = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.command {
        Command::Verify { suite, suites } => {
            let mut names: Vec<String> = suite.into_iter().chain(suites).collect();
            if names.is_empty() {
                names = cfg.suites.clone();
            }
            let selected = select_suites(&names)?;
            let built = Built::new(cfg)?;
            let reports = run_suites(&built, &selected)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&reports_json(&built, &reports)).unwrap() + "\n",
                Format::Text => reports_text(&reports),
            };
            emit(&cli.out, &text)?;
            Ok(violations(&reports) == 0)
        }
        Command::Eval { expr } => {
            let built = Built::new(cfg)?;
            let x = built.u.eval_str(&expr)?.truncate(built.u.order());
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&x.to_json()).unwrap() + "\n",
                Format::Text => format!("{x}\n"),
            };
            emit(&cli.out, &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
