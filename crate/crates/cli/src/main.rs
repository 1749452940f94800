use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geophase_cli::selfcheck::{all_passed, run_selfcheck, Fault, Options, Status};
use geophase_cli::sweep::run_sweep;
use geophase_cli::{CliError, RunConfig, SweepVar};

/// Polarized two-photon intensity interferometry: sweeps and self-checks.
#[derive(Parser)]
#[command(name = "geophase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coincidence fringe against the analyser angle φ₃₄.
    SweepPhi(RunArgs),
    /// Coincidence fringe against the detector separation d_D.
    SweepBaseline(RunArgs),
    /// Exchange-state entropy and CHSH value against the geometric phase Ω.
    EntanglementSweep(RunArgs),
    /// Triple correlation and isolated triangle phase against analyser C's azimuth.
    ThreeSlit(RunArgs),
    /// Run the invariant suite.
    Selfcheck(CheckArgs),
}

#[derive(Args)]
struct OracleArgs {
    /// Cross-check against the truncated Fock-space oracle.
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    #[arg(long = "no-oracle")]
    no_oracle: bool,
    /// Oracle photon-number truncation per mode.
    #[arg(long)]
    nmax: Option<usize>,
}

impl OracleArgs {
    fn enabled(&self) -> Option<bool> {
        match (self.oracle, self.no_oracle) {
            (_, true) => Some(false),
            (true, _) => Some(true),
            _ => None,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when absent); the config echo goes to <out>.config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Read config angles as degrees unless the file sets angle_unit.
    #[arg(long)]
    degrees: bool,
    /// Number of sweep points.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<Fault>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let sweep = match cli.command {
        Command::SweepPhi(a) => (SweepVar::Phi34, a),
        Command::SweepBaseline(a) => (SweepVar::DetectorSeparation, a),
        Command::EntanglementSweep(a) => (SweepVar::Omega, a),
        Command::ThreeSlit(a) => (SweepVar::CAzimuth, a),
        Command::Selfcheck(a) => return selfcheck(a),
    };
    match sweep_command(sweep.0, sweep.1) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn selfcheck(args: CheckArgs) -> ExitCode {
    let defaults = Options::default();
    let opts = Options {
        oracle: args.oracle.enabled().unwrap_or(defaults.oracle),
        n_max: args.oracle.nmax.unwrap_or(defaults.n_max),
        fault: args.inject_fault,
    };
    let checks = run_selfcheck(&opts);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    println!("{} checks, {failed} failed", checks.len());
    if all_passed(&checks) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn sweep_command(var: SweepVar, args: RunArgs) -> Result<(), CliError> {
    let mut config = RunConfig::defaults(var);
    if let Some(path) = &args.config {
        config = RunConfig::parse_str(&read(path)?, config, args.degrees)?;
    }
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(on) = args.oracle.enabled() {
        config.oracle = on;
    }
    if let Some(n) = args.oracle.nmax {
        config.n_max = n;
    }
    if let Some(n) = args.steps {
        config.steps = n;
    }

    let table = run_sweep(&config)?;
    let csv = table.to_csv();
    match &config.out {
        Some(out) => {
            write(out, &csv)?;
            let mut echo = out.clone().into_os_string();
            echo.push(".config");
            write(Path::new(&echo), &config.serialize())?;
        }
        None => print!("{csv}"),
    }
    table.check_tolerance()
}
