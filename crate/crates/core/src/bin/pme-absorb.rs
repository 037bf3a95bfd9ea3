use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pme_absorb::config::{RunConfig, Task, OUTPUT_ENV, PARAM_PRESETS};
use pme_absorb::{tasks, Error};

/// Self-similar profiles and radial simulations for u_t = Δu^m − |x|^σ u^q.
///
/// Exit status: 0 success, 1 numerical or I/O failure, 2 invalid configuration,
/// 3 a verification or acceptance check failed.
#[derive(Parser, Debug)]
#[command(name = "pme-absorb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find the separating amplitude a* and its profile.
    Shoot(Common),
    /// Shoot, then check the interface asymptotics of the profile.
    VerifyProfile(Common),
    /// Run the radial finite-difference solver (needs a [simulate] section).
    Simulate(Common),
    /// Shoot a list of parameter sets from [sweep].
    Sweep(Common),
    /// Run the acceptance suite.
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Only these criteria, e.g. `--only 1,9,13`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// List the named parameter presets.
    Presets,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory, replacing `output_dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Named parameter preset.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Space dimension N.
    #[arg(long = "dim", short = 'N')]
    dim: Option<u32>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print only errors.
    #[arg(long)]
    quiet: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigError { .. } | Error::OutOfRange(_) | Error::InvalidArgument(_) | Error::NegativeData { .. } => 2,
        _ => 1,
    }
}

fn load(common: &Common, task: Task) -> Result<(pme_absorb::config::Resolved, PathBuf), Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let p = &mut cfg.params;
    if let Some(name) = &common.preset {
        *p = pme_absorb::config::ParamsInput { preset: Some(name.clone()), ..Default::default() };
    }
    p.m = common.m.or(p.m);
    p.q = common.q.or(p.q);
    p.sigma = common.sigma.or(p.sigma);
    p.dim = common.dim.or(p.dim);
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    let env_root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    let out = cfg.output_path(common.out.as_deref(), env_root.as_deref());
    Ok((cfg.resolve(Some(task))?, out))
}

fn execute(common: &Common, task: Task, only: &[u8]) -> Result<bool, Error> {
    let (resolved, out) = load(common, task)?;
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    let outcome = tasks::run_selected(&resolved, Path::new(&out), only)?;
    if !common.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
        for f in &outcome.files {
            println!("wrote {}", f.display());
        }
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, task, only) = match &cli.command {
        Command::Shoot(c) => (c, Task::Shoot, &[][..]),
        Command::VerifyProfile(c) => (c, Task::VerifyProfile, &[][..]),
        Command::Simulate(c) => (c, Task::Simulate, &[][..]),
        Command::Sweep(c) => (c, Task::Sweep, &[][..]),
        Command::Acceptance { common, only } => (common, Task::Acceptance, only.as_slice()),
        Command::Presets => {
            for (name, p, note) in PARAM_PRESETS {
                println!("{name:<12} m={} q={} sigma={} N={}  {note}", p.m, p.q, p.sigma, p.dim);
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(common, task, only) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
