//! Command-line front end: JSON run configs, dispatch to the solvers,
//! simulator and diagnostics, and CSV/JSON artifacts.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{
    default_rate_grid, parse_config, Command, DistortionFile, DistortionSource, PmfFile, PmfSource, RunConfig,
    DEFAULT_EPSILON, DEFAULT_OUTPUT_DIR, DEFAULT_RATE_MARGIN,
};
pub use run::{execute, run, Artifact, VERSION};

use crate::error::Error;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "HOPEX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hopex", version, about = "Error exponents of K-hop hypothesis testing against independence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output_dir` of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// eta_l(R) on every hop of a pmf.
    Eta {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        rates: Vec<f64>,
        #[arg(long)]
        aux_card: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exponent region of a K-hop network.
    Region(ConfigArgs),
    /// Wyner-Ziv rate at distortion D.
    Wz {
        #[arg(long)]
        pmf: PathBuf,
        #[arg(long)]
        distortion: PathBuf,
        #[arg(long = "D", alias = "max-distortion")]
        d: f64,
        #[arg(long)]
        s_card: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo error estimates and exponent fits.
    Simulate(ConfigArgs),
    /// Exponent fits across type-I targets.
    Sweep(ConfigArgs),
    /// Exact enumeration checks at small blocklengths.
    Diagnose(ConfigArgs),
}

fn load(path: &Path, command: Command) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(vec![format!("{}: malformed JSON: {e}", path.display())]))?;
    // the subcommand names the command; a config may omit it
    if let Value::Object(obj) = &mut value {
        let given = obj.entry("command").or_insert_with(|| json!(command.name()));
        if given != &json!(command.name()) {
            return Err(Error::Config(vec![format!("command: config says {given}, invoked as `{}`", command.name())]));
        }
    }
    let mut cfg = parse_config(&value.to_string()).map_err(Error::Config)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

fn apply(mut cfg: RunConfig, common: &Common) -> RunConfig {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg
}

/// Turn parsed arguments into a validated config.
pub fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let (cfg, common) = match &cli.command {
        Sub::Eta { pmf, rates, aux_card, common } => {
            let v = json!({"command": "eta", "pmf": pmf, "rates": rates, "aux_card": aux_card});
            (parse_config(&v.to_string()).map_err(Error::Config)?, common)
        }
        Sub::Wz { pmf, distortion, d, s_card, common } => {
            let v = json!({
                "command": "wz", "pmf": pmf, "distortion": distortion, "max_distortion": d, "s_card": s_card,
            });
            (parse_config(&v.to_string()).map_err(Error::Config)?, common)
        }
        Sub::Region(a) => (load(&a.config, Command::Region)?, &a.common),
        Sub::Simulate(a) => (load(&a.config, Command::Simulate)?, &a.common),
        Sub::Sweep(a) => (load(&a.config, Command::Sweep)?, &a.common),
        Sub::Diagnose(a) => (load(&a.config, Command::Diagnose)?, &a.common),
    };
    Ok(apply(cfg, common))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .map_err(|_| Error::Config(vec![format!("{THREADS_VAR}: expected a thread count, got `{text}`")]))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(vec![format!("{THREADS_VAR}: {e}")]))
}

/// Entry point of the `hopex` binary.
pub fn main_with(cli: Cli) -> ExitCode {
    let result = configure_threads().and_then(|()| resolve(&cli)).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Error::Config(errors)) => {
            for e in errors {
                eprintln!("error: config: {e}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
