//! Command-line front end: `bands`, `flatband`, `asymptotics` and `verify`.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::lattice::Boundary;
use commands::{CommandOutput, Failure};
use config::{ConfigLayer, RunConfig};

/// Width used when neither the flags nor the config file give `N`.
pub const DEFAULT_WIDTH: usize = 1;

#[derive(Debug, Parser)]
#[command(name = "ribbonband", version, about = "Band structure of zigzag nanoribbons in a transverse potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Ribbon width N (p = 2N + 1 rows).
    #[arg(long = "N", value_name = "N")]
    pub width: Option<String>,
    /// zero, ramp, constant-field:EPS, random:SCALE, a file, or v1,...,vp.
    #[arg(long)]
    pub potential: Option<String>,
    /// Number of sample points on [0, 2]; odd, at least 3.
    #[arg(long = "grid", value_name = "POINTS")]
    pub grid_points: Option<String>,
    /// Coupling t for the strong-field regime.
    #[arg(long)]
    pub t: Option<String>,
    /// weak, strong, constant-field or edges.
    #[arg(long)]
    pub mode: Option<String>,
    /// Write the data here instead of stdout.
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a JSON report to this file.
    #[arg(long)]
    pub report: Option<String>,
    /// Seed for random potentials and checks.
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate all bands over a and report intervals, gaps and flat bands.
    Bands {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the compactly supported flat-band eigenfunction psi^m.
    Flatband {
        #[command(flatten)]
        common: CommonArgs,
        /// Anchor cell m.
        #[arg(long, allow_negative_numbers = true)]
        m: Option<String>,
        /// Number of cells in the finite section (default N + 3).
        #[arg(long = "L", value_name = "CELLS")]
        cells: Option<String>,
        #[arg(long, value_enum, default_value = "periodic")]
        boundary: BoundaryArg,
    },
    /// Compare asymptotic band-edge predictions with computed edges.
    Asymptotics {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in consistency checks.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, hide = true)]
        corrupt_offdiag: bool,
    },
}

fn layer_from(common: &CommonArgs, m: Option<String>, cells: Option<String>) -> ConfigLayer {
    ConfigLayer {
        width: common.width.clone(),
        potential: common.potential.clone(),
        grid_points: common.grid_points.clone(),
        t: common.t.clone(),
        mode: common.mode.clone(),
        format: common.format.clone(),
        out: common.out.clone(),
        report: common.report.clone(),
        seed: common.seed.clone(),
        m,
        cells,
    }
}

fn resolve(common: &CommonArgs, m: Option<String>, cells: Option<String>) -> Result<RunConfig, Failure> {
    let flags = layer_from(common, m, cells);
    let base = match &common.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    Ok(flags.over(base).resolve(DEFAULT_WIDTH)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::config(format!("invalid out: cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, output: &CommandOutput) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => write_file(path, &output.data)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(output.data.as_bytes());
            let _ = stdout.flush();
        }
    }
    if let (Some(path), Some(json)) = (&cfg.report, &output.report_json) {
        write_file(path, json)?;
    }
    if !output.diagnostics.is_empty() {
        eprint!("{}", output.diagnostics);
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    let (cfg, output) = match command {
        Command::Bands { common } => {
            let cfg = resolve(&common, None, None)?;
            let out = commands::cmd_bands(&cfg)?;
            (cfg, out)
        }
        Command::Flatband {
            common,
            m,
            cells,
            boundary,
        } => {
            let cfg = resolve(&common, m, cells)?;
            let boundary = match boundary {
                BoundaryArg::Periodic => Boundary::Periodic,
                BoundaryArg::Open => Boundary::Open,
            };
            let out = commands::cmd_flatband(&cfg, boundary)?;
            (cfg, out)
        }
        Command::Asymptotics { common } => {
            let cfg = resolve(&common, None, None)?;
            let out = commands::cmd_asymptotics(&cfg)?;
            (cfg, out)
        }
        Command::Verify { common, corrupt_offdiag } => {
            let cfg = resolve(&common, None, None)?;
            let out = commands::cmd_verify(&cfg, corrupt_offdiag)?;
            (cfg, out)
        }
    };
    emit(&cfg, &output)?;
    Ok(output.code)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { commands::EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
