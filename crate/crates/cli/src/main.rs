use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use floquet_readout::config::{OutputFormat, RunConfig};
use floquet_readout::sweep::{cmd_couplings, cmd_models, cmd_snr, cmd_spectrum, cmd_trajectory, OracleMode, Run};
use floquet_readout::table::Table;
use floquet_readout::validate::run_all;

const MAX_DIM_VAR: &str = "FLOQUET_READOUT_MAX_DIM";

#[derive(Parser)]
#[command(name = "floquet-readout", version, about = "Floquet longitudinal readout sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Oracle::Off)]
    oracle: Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Tracked quasi-energies over the drive grid.
    Spectrum(ConfigArg),
    /// Longitudinal and dispersive couplings over the grid.
    Couplings(ConfigArg),
    /// Pointer-state trajectories for both logical states.
    Trajectory(ConfigArg),
    /// SNR at the configured time over the grid.
    Snr(ConfigArg),
    /// Runs the acceptance criteria; exits with 0 iff all pass.
    Validate,
    /// Lists the built-in device models.
    Models,
}

#[derive(clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Off,
    On,
    Subset,
}

impl From<Oracle> for OracleMode {
    fn from(o: Oracle) -> Self {
        match o {
            Oracle::Off => OracleMode::Off,
            Oracle::On => OracleMode::On,
            Oracle::Subset => OracleMode::Subset,
        }
    }
}

fn load(path: &Path) -> Result<Run> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = RunConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Ok(v) = std::env::var(MAX_DIM_VAR) {
        let cap: usize = v.parse().with_context(|| format!("{MAX_DIM_VAR}={v} is not a count"))?;
        cfg.floquet.max_dim = Some(cfg.floquet.max_dim.map_or(cap, |m| m.min(cap)));
    }
    Ok(Run::new(cfg)?)
}

fn write_tables(tables: &[Table], dir: &Path, format: OutputFormat) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for t in tables {
        let (path, body) = match format {
            OutputFormat::Csv => (dir.join(format!("{}.csv", t.name)), t.to_csv()),
            OutputFormat::Json => (dir.join(format!("{}.json", t.name)), serde_json::to_string_pretty(t)? + "\n"),
        };
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {} ({} rows)", path.display(), t.rows.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let oracle = OracleMode::from(cli.oracle);
    let (config, tables) = match &cli.command {
        Command::Validate => {
            let outcomes = run_all();
            for o in &outcomes {
                println!("criterion {:>2} {}: {}: {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            let ok = outcomes.iter().all(|o| o.passed);
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Models => {
            let tables = cmd_models()?;
            print!("{}", tables[0].to_csv());
            return Ok(ExitCode::SUCCESS);
        }
        Command::Spectrum(c) => {
            let r = load(&c.config)?;
            let t = cmd_spectrum(&r)?;
            (r.cfg, t)
        }
        Command::Couplings(c) => {
            let r = load(&c.config)?;
            let t = cmd_couplings(&r)?;
            (r.cfg, t)
        }
        Command::Trajectory(c) => {
            let r = load(&c.config)?;
            let t = cmd_trajectory(&r, oracle)?;
            (r.cfg, t)
        }
        Command::Snr(c) => {
            let r = load(&c.config)?;
            let t = cmd_snr(&r, oracle)?;
            (r.cfg, t)
        }
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.directory));
    write_tables(&tables, &dir, config.output.format)?;
    if let Some(dev) = tables.iter().find(|t| t.name == "trajectory_deviation" && !t.rows.is_empty()) {
        eprint!("{}", dev.to_csv());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::FAILURE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
