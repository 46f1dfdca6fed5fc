//! Batch runner: configuration, verification suites and their reports.

pub mod config;
pub mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub use config::{ExperimentConfig, TableFormat, SCHEMA_VERSION};
pub use report::{Check, Constant, KernelRow, Relation, SpectrumRow, SuiteOutcome};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    CarRelations,
    RealStructure,
    CsGradient,
    RotateSquare,
    YmSectors,
    FieldCommutators,
    SpectralInvariant,
    KernelDegeneracy,
    All,
}

const ALL: [Suite; 8] = [
    Suite::CarRelations,
    Suite::RealStructure,
    Suite::CsGradient,
    Suite::RotateSquare,
    Suite::YmSectors,
    Suite::FieldCommutators,
    Suite::SpectralInvariant,
    Suite::KernelDegeneracy,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::CarRelations => "car-relations",
            Suite::RealStructure => "real-structure",
            Suite::CsGradient => "cs-gradient",
            Suite::RotateSquare => "rotate-square",
            Suite::YmSectors => "ym-sectors",
            Suite::FieldCommutators => "field-commutators",
            Suite::SpectralInvariant => "spectral-invariant",
            Suite::KernelDegeneracy => "kernel-degeneracy",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            ALL.to_vec()
        } else {
            vec![self]
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = ALL.iter().map(|x| x.name()).collect();
                Error::config(format!("unknown suite '{s}' (expected one of {}, all)", names.join(", ")))
            })
    }
}

/// Runs a validated suite (or all of them) in memory. Timings go to stderr.
pub fn run_suite(cfg: &ExperimentConfig, suite: Suite, seed: u64) -> Result<SuiteOutcome> {
    cfg.validate(suite)?;
    let mut out = SuiteOutcome::default();
    for one in suite.expand() {
        let t = Instant::now();
        let o = suites::run_one(cfg, one, seed)?;
        eprintln!(
            "{:<20} {:>3} checks {:>4} {:>8.2}s",
            one.name(),
            o.checks.len(),
            if o.passed() { "pass" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
        out.extend(o);
    }
    Ok(out)
}

/// Result of a run written to disk.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub outcome: SuiteOutcome,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.outcome.passed()
    }
}

/// Resolved seed: command line, then config, then the crate default.
pub fn resolve_seed(cfg: &ExperimentConfig, cli: Option<u64>) -> u64 {
    cli.or(cfg.seed).unwrap_or(crate::DEFAULT_SEED)
}

/// Parses `config_text`, runs `suite` and writes the report and tables under `out`
/// (or the configured output directory).
pub fn run_and_emit(config_text: &str, suite: Suite, seed: Option<u64>, out: Option<&Path>) -> Result<RunSummary> {
    let cfg = ExperimentConfig::parse(config_text)?;
    let seed = resolve_seed(&cfg, seed);
    let outcome = run_suite(&cfg, suite, seed)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let report = report::render_report(&outcome, suite.name(), seed, config_text)?;
    let files = report::emit(&dir, &report, &outcome, cfg.output.tables)?;
    Ok(RunSummary { dir, files, outcome })
}
