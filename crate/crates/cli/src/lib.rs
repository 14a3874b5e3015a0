//! Command-line front end for the `gilbert` crate: configuration loading,
//! experiment orchestration and CSV/JSON emission.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;
pub const EXIT_BRACKET: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] gilbert::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gilbert::Error as E;
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io(_) => EXIT_INTEGRATION,
            Self::Core(e) => match e {
                E::Domain(_) | E::Input(_) | E::Unsupported(_) => EXIT_CONFIG,
                E::Integration(_) | E::ContractionFailure { .. } | E::Coverage(_) => {
                    EXIT_INTEGRATION
                }
                E::BlowUp { .. } | E::PoleProximity { .. } => EXIT_BLOWUP,
                E::Bracket { .. } => EXIT_BRACKET,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gilbert",
    version,
    about = "Self-similar solutions of the Landau-Lifshitz-Gilbert equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration for the subcommand; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output table; a `.json` extension selects the JSON mirror, anything else CSV.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parameter sweeps (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Seed for randomized checks and perturbations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Self-similar profile, its limit vectors and the angle between them.
    Profile,
    /// March the projected equation and report norms and residuals.
    Solve,
    /// Perturbed self-similar data and the distance in the X norm.
    Stability,
    /// Amplitudes whose profiles share a prescribed angle.
    Multiplicity,
    /// Filament function and the nonlocal Schrodinger equations.
    Hasimoto,
    /// Run the invariant suite.
    Verify {
        /// Print the invariant names and exit.
        #[arg(long)]
        list: bool,
        /// Build profiles with a perturbed amplitude so profile checks fail.
        #[arg(long)]
        perturb_profile: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Profile => "profile",
            Self::Solve => "solve",
            Self::Stability => "stability",
            Self::Multiplicity => "multiplicity",
            Self::Hasimoto => "hasimoto",
            Self::Verify { .. } => "verify",
        }
    }
}

fn prepare<T>(
    cli: &Cli,
    validate: impl Fn(&T) -> Result<(), CliError>,
) -> Result<(T, String), CliError>
where
    T: for<'de> serde::Deserialize<'de> + Default + Serialize,
{
    let cfg: T = load(cli.config.as_deref())?;
    validate(&cfg)?;
    let value = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((cfg, table::run_id(cli.command.name(), &value, cli.seed)))
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let out = cli.out.as_deref();
    let (outcome, run_id) = match &cli.command {
        Command::Profile => {
            let (cfg, id) = prepare(cli, ProfileConfig::validate)?;
            (commands::cmd_profile(&cfg)?, id)
        }
        Command::Solve => {
            let (cfg, id) = prepare(cli, SolveConfig::validate)?;
            (commands::cmd_solve(&cfg, out, &id)?, id)
        }
        Command::Stability => {
            let (cfg, id) = prepare(cli, StabilityConfig::validate)?;
            (commands::cmd_stability(&cfg)?, id)
        }
        Command::Multiplicity => {
            let (cfg, id) = prepare(cli, MultiplicityConfig::validate)?;
            (commands::cmd_multiplicity(&cfg)?, id)
        }
        Command::Hasimoto => {
            let (cfg, id) = prepare(cli, HasimotoConfig::validate)?;
            (commands::cmd_hasimoto(&cfg)?, id)
        }
        Command::Verify {
            list,
            perturb_profile,
        } => {
            let (cfg, id) = prepare(cli, |_: &VerifyConfig| Ok(()))?;
            if *list {
                for inv in verify::invariants() {
                    println!("{}", inv.name);
                }
                return Ok(EXIT_OK);
            }
            let ctx = verify::VerifyContext {
                seed: cli.seed,
                perturb_profile: *perturb_profile,
            };
            let (table, all) = verify::run(&ctx, &cfg.only);
            let exit = if all { EXIT_OK } else { EXIT_VERIFY };
            (
                commands::Outcome {
                    table,
                    exit,
                    files: Vec::new(),
                },
                id,
            )
        }
    };
    outcome.table.write(out, &run_id)?;
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    Ok(outcome.exit)
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
