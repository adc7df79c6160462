//! Config-driven command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 solver non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod fieldfile;
pub mod suite;

pub use commands::{
    cmd_catalog, cmd_dispersion, cmd_mms, cmd_solve, cmd_verify, Outcome, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK,
    EXIT_VERIFY_FAILED,
};
pub use config::RunConfig;
pub use fieldfile::{decode_field, encode_field, read_field, write_field, MAGIC};

#[derive(Debug, Parser)]
#[command(name = "canonform", version, about = "Canonical-form PDE catalog, verification and spectral solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration (required except for `catalog`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the structured JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub machine: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// List every model with its tag, layout and parameter schema.
    Catalog,
    /// Certify projections, check field identities and audit transcriptions.
    Verify,
    /// Solve one canonical problem and write the fields.
    Solve,
    /// Manufactured-solution study over grids and contrasts.
    Mms,
    /// Scan the smallest singular value of the restricted symbol in ω.
    Dispersion,
}

/// Honour `CANONFORM_THREADS` once per process.
fn configure_threads() {
    if let Some(n) = std::env::var("CANONFORM_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(cli: &Cli) -> crate::Result<Outcome> {
    if let Command::Catalog = cli.command {
        return cmd_catalog();
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| crate::Error::Config("--config is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Catalog => unreachable!("handled above"),
        Command::Verify => cmd_verify(&cfg),
        Command::Solve => cmd_solve(&cfg),
        Command::Mms => cmd_mms(&cfg),
        Command::Dispersion => cmd_dispersion(&cfg),
    }
}

/// Parse `args`, run, print to `out`/`err` and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(o) => {
            if cli.machine {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&o.report).expect("reports serialize"));
            } else {
                let _ = write!(out, "{}", o.text);
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
