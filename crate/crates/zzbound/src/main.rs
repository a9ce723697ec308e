use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zzbound::repro::{self, Target};
use zzbound::{parse, run, selftest, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "zzbound", version, about = "Ziv-Zakai bounds on the MMSE, from JSON configs to CSV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration (or its sweep) and write CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output file; overrides the config's `output`. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 3 when any row carries a tail or Monte Carlo flag.
        #[arg(long)]
        strict: bool,
        /// Fill the wall_time_ms column (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Regenerate a reference table.
    Repro {
        #[arg(value_enum)]
        target: Target,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    zzbound::init_threads()?;
    match cli.command {
        Command::Run { config, out, strict, timing } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::config(format!("{}: {e}", config.display())))?;
            let exp = parse(&text)?;
            let (csv, rows) = run::run(&exp, RunOptions { strict, timing })?;
            write(out.as_deref().or(exp.base.output.as_deref()), &csv)?;
            match run::strict_failure(&rows) {
                Some(e) if strict => Err(e),
                _ => Ok(()),
            }
        }
        Command::Repro { target, out_dir } => {
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::runtime(format!("{}: {e}", out_dir.display())))?;
            let table = repro::build(target)?;
            let path = out_dir.join(target.file_name());
            write(Some(&path), &table.to_csv()?)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{} {}{}", if r.passed { "PASS" } else { "FAIL" }, r.name, if r.passed { String::new() } else { format!(": {}", r.detail) });
            }
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(CliError::runtime("selftest failed"))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
