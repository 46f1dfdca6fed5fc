use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use confspace_dirac::experiment::{run_and_emit, ExperimentConfig, Suite};

#[derive(Parser)]
#[command(name = "confspace-dirac", version, about = "Verification suites for Dirac operators on truncated gauge configuration space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write the report and tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// car-relations, real-structure, cs-gradient, rotate-square, ym-sectors,
        /// field-commutators, spectral-invariant, kernel-degeneracy or all.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config against all resource caps.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Command) -> confspace_dirac::Result<bool> {
    match cmd {
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::parse(&text)?;
            let suite = match &cfg.suite {
                Some(s) => s.parse()?,
                None => Suite::All,
            };
            cfg.validate(suite)?;
            println!("{}: valid ({})", config.display(), suite.name());
            Ok(true)
        }
        Command::Run { config, suite, out, seed } => {
            let text = std::fs::read_to_string(&config)?;
            let name = match suite {
                Some(s) => s,
                None => ExperimentConfig::parse(&text)?
                    .suite
                    .ok_or_else(|| confspace_dirac::Error::config("no suite given on the command line or in the config"))?,
            };
            let summary = run_and_emit(&text, name.parse()?, seed, out.as_deref())?;
            let failed = summary.outcome.checks.iter().filter(|c| !c.pass).count();
            println!(
                "{} checks, {} failed; wrote {} to {}",
                summary.outcome.checks.len(),
                failed,
                summary.files.join(", "),
                summary.dir.display()
            );
            Ok(summary.passed())
        }
    }
}
