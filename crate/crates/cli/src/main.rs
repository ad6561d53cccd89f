use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bochner_cli::config::{bundled, Catalog};
use bochner_cli::report::{to_csv, to_text};
use bochner_cli::{parse, run, Format, RunOptions};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bochner", version, about = "Run functional-calculus verification scenarios")]
struct Cli {
    /// Print the function catalog and exit.
    #[arg(long)]
    list_catalog: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or `paper-suite` for the bundled one.
    Run {
        config: String,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the assertion tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

fn list_catalog() {
    for c in Catalog::ALL {
        let (params, form) = c.describe();
        println!("{:<18} {:<34} {}", c.name(), params, form);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_catalog {
        list_catalog();
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run { config, format, seed, tol, out }) = cli.command else {
        eprintln!("nothing to do; try `bochner run paper-suite` or `bochner --list-catalog`");
        return ExitCode::from(2);
    };
    let text = match bundled(&config) {
        Some(t) => t.to_string(),
        None => match std::fs::read_to_string(&config) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {config}: {e}");
                return ExitCode::from(2);
            }
        },
    };
    let scenario = match parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    let report = match run(&scenario, RunOptions { seed, tol }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match format {
        Some(OutputFormat::Text) => Format::Text,
        Some(OutputFormat::Csv) => Format::Csv,
        None => scenario.format,
    };
    let rendered = match format {
        Format::Text => to_text(&report),
        Format::Csv => to_csv(&report),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    eprintln!(
        "{} experiments in {:.2} s (seed {})",
        report.experiments.len(),
        started.elapsed().as_secs_f64(),
        report.seed
    );
    ExitCode::from(report.exit_code() as u8)
}
