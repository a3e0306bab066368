use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::commands::{cmd_attack, cmd_cost, cmd_decide, cmd_trace, cmd_verify, Report};
use super::config::{Format, Mode, RunConfig};
use super::exit;
use super::render::render;
use crate::error::{Error, Result};
use crate::geometry::Circle;

#[derive(Debug, Parser)]
#[command(name = "pqci", version, about = "Quantum circle intersection protocol simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the honest protocol once and print the verdict.
    Decide(Flags),
    /// Compare protocol outcomes against the classical predicate.
    Verify(Flags),
    /// Monte Carlo statistics for an attack strategy.
    Attack(Flags),
    /// Gate-count, qubit and communication table over several precisions.
    Cost(Flags),
    /// Stage-by-stage state dump of one run.
    Trace(Flags),
}

impl Command {
    fn parts(&self) -> (Mode, &Flags) {
        match self {
            Command::Decide(f) => (Mode::Decide, f),
            Command::Verify(f) => (Mode::Verify, f),
            Command::Attack(f) => (Mode::Attack, f),
            Command::Cost(f) => (Mode::Cost, f),
            Command::Trace(f) => (Mode::Trace, f),
        }
    }
}

/// Every setting is optional here; unset values fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Flags {
    /// Precision: coordinates and radii lie in [1, 2^t − 1].
    #[arg(long)]
    pub t: Option<usize>,
    /// Alice's circle as x,y,r.
    #[arg(long)]
    pub alice: Option<Circle>,
    /// Bob's circle as x,y,r.
    #[arg(long)]
    pub bob: Option<Circle>,
    /// Second circle for alice-multi-input.
    #[arg(long)]
    pub alice2: Option<Circle>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Decoy qubits for the eavesdropper strategies.
    #[arg(long)]
    pub decoys: Option<usize>,
    /// Random pairs checked by a sampled verify.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Queries for alice-superposed.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Exhaustive verify at t = 3.
    #[arg(long)]
    pub exhaustive: bool,
    /// Precisions for the cost table.
    #[arg(long, value_delimiter = ',')]
    pub ts: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Flags {
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut f = Flags::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| {
                Error::Parse(format!("line {}: {key}: {e}", lineno + 1))
            };
            macro_rules! num {
                () => {
                    Some(value.parse().map_err(|e| bad(&e))?)
                };
            }
            match key {
                "t" => f.t = num!(),
                "alice" => f.alice = Some(value.parse()?),
                "bob" => f.bob = Some(value.parse()?),
                "alice2" => f.alice2 = Some(value.parse()?),
                "strategy" => f.strategy = Some(value.to_string()),
                "trials" => f.trials = num!(),
                "decoys" => f.decoys = num!(),
                "samples" => f.samples = num!(),
                "shots" => f.shots = num!(),
                "exhaustive" => f.exhaustive = value.parse().map_err(|e| bad(&e))?,
                "ts" => {
                    f.ts = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse().map_err(|e| bad(&e)))
                            .collect::<Result<_>>()?,
                    )
                }
                "seed" => f.seed = num!(),
                "format" => f.format = Some(value.parse()?),
                "out" => f.out = Some(PathBuf::from(value)),
                _ => return Err(Error::Parse(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_file(&fs::read_to_string(path)?)
    }

    /// Values set in `self` win over `base`.
    pub fn over(self, base: Flags) -> Flags {
        Flags {
            t: self.t.or(base.t),
            alice: self.alice.or(base.alice),
            bob: self.bob.or(base.bob),
            alice2: self.alice2.or(base.alice2),
            strategy: self.strategy.or(base.strategy),
            trials: self.trials.or(base.trials),
            decoys: self.decoys.or(base.decoys),
            samples: self.samples.or(base.samples),
            shots: self.shots.or(base.shots),
            exhaustive: self.exhaustive || base.exhaustive,
            ts: self.ts.or(base.ts),
            seed: self.seed.or(base.seed),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            config: self.config,
        }
    }

    /// Applies the config file (if any) and defaults. A missing seed is drawn
    /// at random and recorded.
    pub fn resolve(&self, mode: Mode) -> Result<RunConfig> {
        let merged = match &self.config {
            Some(path) => self.clone().over(Flags::load(path)?),
            None => self.clone(),
        };
        let mut c = RunConfig::new(mode);
        c.t = merged.t.unwrap_or(c.t);
        c.alice = merged.alice;
        c.bob = merged.bob;
        c.alice2 = merged.alice2;
        c.strategy = merged.strategy;
        c.trials = merged.trials.unwrap_or(c.trials);
        c.decoys = merged.decoys.unwrap_or(c.decoys);
        c.samples = merged.samples.unwrap_or(c.samples);
        c.shots = merged.shots.unwrap_or(c.shots);
        c.exhaustive = merged.exhaustive;
        c.ts = merged.ts.unwrap_or(c.ts);
        c.seed = merged.seed.unwrap_or_else(rand::random);
        c.format = merged.format.unwrap_or(c.format);
        c.out = merged.out;
        Ok(c)
    }
}

pub fn run_config(config: &RunConfig) -> Result<Report> {
    match config.mode {
        Mode::Decide => cmd_decide(config),
        Mode::Verify => cmd_verify(config),
        Mode::Attack => cmd_attack(config),
        Mode::Cost => cmd_cost(config),
        Mode::Trace => cmd_trace(config),
    }
}

/// Runs a parsed command line. Returns the rendered report, the exit code
/// and the output path; errors are usage errors.
pub fn execute(cli: &Cli) -> Result<(String, u8, Option<PathBuf>)> {
    let (mode, flags) = cli.command.parts();
    let config = flags.resolve(mode)?;
    let report = run_config(&config)?;
    let text = render(&report, config.format)?;
    let code = if report.passed {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILED
    };
    Ok((text, code, config.out))
}

pub fn main_entry<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok((text, code, out)) => {
            let written = match out {
                Some(path) => fs::write(&path, &text).map_err(Error::from),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(Error::from),
            };
            if let Err(e) = written {
                eprintln!("pqci: {e}");
                return ExitCode::from(exit::USAGE);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("pqci: {e}");
            ExitCode::from(exit::USAGE)
        }
    }
}
