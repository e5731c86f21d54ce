//! `nct` command line.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::Closure;
use crate::Error;
use config::{ConfigError, Format, RateMethod, RunConfig, Temperature, PER_CM3};
use output::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICS: i32 = 2;
pub const EXIT_SELFCHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nct", version, about = "Phonon excitation and thermalization of a nano-tube in a cold Bose gas")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write records here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for sweeps (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Series,
    Fgr,
    Simplified,
    C5,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClosureArg {
    Ground,
    Energy,
}

#[derive(Debug, Default, Args)]
struct GasArgs {
    #[arg(long, conflicts_with = "density_per_m3")]
    density_per_cm3: Option<f64>,
    #[arg(long)]
    density_per_m3: Option<f64>,
    /// Gas temperature T_a [K].
    #[arg(long, conflicts_with = "t_over_tbec")]
    temperature_k: Option<f64>,
    /// Gas temperature in units of T_BEC.
    #[arg(long)]
    t_over_tbec: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cantilever mode table.
    Modes {
        #[arg(long)]
        l_max: Option<usize>,
    },
    /// Dimensionless potential transforms V_n(q̄).
    Potential {
        #[arg(long)]
        qbar_max: Option<f64>,
        #[arg(long)]
        qbar_points: Option<usize>,
    },
    /// Gas thermodynamics at one (n, T_a).
    Thermo {
        #[command(flatten)]
        gas: GasArgs,
    },
    /// Ground-mode excitation rate at one (n, T_a).
    Rates {
        #[command(flatten)]
        gas: GasArgs,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        j_max: Option<usize>,
    },
    /// Excitation rate over densities and T/T_BEC.
    Sweep {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Thermalization of the tube towards the gas temperature.
    Cool {
        #[command(flatten)]
        gas: GasArgs,
        /// Initial tube temperature [K].
        #[arg(long)]
        tc0_k: Option<f64>,
        /// End time [s]; default 200 relaxation times.
        #[arg(long)]
        t_end_s: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum)]
        closure: Option<ClosureArg>,
    },
    /// Computed tube and gas parameters next to reference values.
    Tables,
    /// Oracle suite; exits with 3 on any failure.
    Selfcheck {
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_v5: f64,
    },
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Io(io::Error),
    Core(Error),
    Selfcheck,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(Error::InvalidInput { .. } | Error::Regime { .. }) => EXIT_USAGE,
            CliError::Core(_) => EXIT_NUMERICS,
            CliError::Selfcheck => EXIT_SELFCHECK,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Runs with the process arguments and returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Config(c) => eprintln!("error: {c}"),
                CliError::Io(io) => eprintln!("error: {io}"),
                CliError::Core(core) => eprintln!("error: {core}"),
                CliError::Selfcheck => eprintln!("selfcheck: at least one check failed"),
            }
            e.code()
        }
    }
}

fn apply_gas(cfg: &mut RunConfig, gas: &GasArgs) {
    if let Some(n) = gas.density_per_cm3 {
        cfg.gas.density = n * PER_CM3;
    }
    if let Some(n) = gas.density_per_m3 {
        cfg.gas.density = n;
    }
    if let Some(t) = gas.temperature_k {
        cfg.gas.temperature = Temperature::Kelvin(t);
    }
    if let Some(r) = gas.t_over_tbec {
        cfg.gas.temperature = Temperature::OverTbec(r);
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(p) = &cli.output {
        cfg.output_path = Some(p.clone());
    }

    let mut failed = false;
    let table = match &cli.command {
        Command::Modes { l_max } => {
            if let Some(l) = l_max {
                cfg.l_max = *l;
            }
            commands::modes(&cfg)?
        }
        Command::Potential { qbar_max, qbar_points } => {
            if let Some(q) = qbar_max {
                cfg.qbar_max = *q;
            }
            if let Some(n) = qbar_points {
                cfg.qbar_points = (*n).max(1);
            }
            commands::potential(&cfg)?
        }
        Command::Thermo { gas } => {
            apply_gas(&mut cfg, gas);
            commands::thermo(&cfg)?
        }
        Command::Rates { gas, method, j_max } => {
            apply_gas(&mut cfg, gas);
            if let Some(m) = method {
                cfg.rates.method = match m {
                    MethodArg::Series => RateMethod::Series,
                    MethodArg::Fgr => RateMethod::Fgr,
                    MethodArg::Simplified => RateMethod::Simplified,
                    MethodArg::C5 => RateMethod::C5,
                    MethodArg::Oracle => RateMethod::Oracle,
                };
            }
            if let Some(j) = j_max {
                cfg.rates.j_max = (*j).max(1);
            }
            commands::rates(&cfg)?
        }
        Command::Sweep { points } => {
            if let Some(p) = points {
                cfg.sweep.points = (*p).max(1);
            }
            commands::sweep(&cfg, cli.jobs)?
        }
        Command::Cool {
            gas,
            tc0_k,
            t_end_s,
            samples,
            closure,
        } => {
            apply_gas(&mut cfg, gas);
            if let Some(t) = tc0_k {
                cfg.cool.tc0 = *t;
            }
            if let Some(t) = t_end_s {
                cfg.cool.t_end = Some(*t);
            }
            if let Some(s) = samples {
                cfg.cool.samples = (*s).max(2);
            }
            if let Some(c) = closure {
                cfg.cool.closure = match c {
                    ClosureArg::Ground => Closure::GroundMode,
                    ClosureArg::Energy => Closure::EnergyWeighted,
                };
            }
            commands::cool(&cfg)?
        }
        Command::Tables => commands::tables(&cfg)?,
        Command::Selfcheck { perturb_v5 } => {
            let opts = commands::SelfcheckOptions {
                perturb_v5: *perturb_v5,
            };
            let (table, pass) = commands::selfcheck(&cfg, opts)?;
            failed = !pass;
            table
        }
    };
    emit(&cfg, &table)?;
    if failed {
        return Err(CliError::Selfcheck);
    }
    Ok(())
}

fn emit(cfg: &RunConfig, table: &Table) -> io::Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(cfg.format, &mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(cfg.format, &mut w)?;
            w.flush()
        }
    }
}
