//! `cnse` command line: binds configs to experiments.
//!
//! Exit codes: 0 success, 2 property failure, 3 blow-up, 4 config error.

use clap::{Parser, Subcommand};
use cnse_cli::{cmd_attractor, cmd_calmcheck, cmd_cauchy, cmd_converge, cmd_energy, cmd_run};
use cnse_core::calming::CalmingKind;
use cnse_core::config::{parse_with_overrides, RunSpec};
use cnse_core::diagnostics::ExperimentReport;
use cnse_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_PROPERTY_FAILURE: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "cnse", about = "Calmed Navier-Stokes verification harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Config file (flat key = value format with dotted keys)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set nu=0.25 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory for reports and CSVs
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized property suite for the four calming functions
    Calmcheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Samples per property
        #[arg(long, default_value_t = cnse_cli::calmcheck::DEFAULT_SAMPLES)]
        samples: usize,
        /// RNG seed
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Single simulation with trajectory diagnostics
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Convergence-rate study over the epsilon ladder (all four kinds)
    Converge {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cauchy-in-epsilon study over the ladder, both forms
    Cauchy {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Energy-identity study, rotational vs advective arms
    Energy {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Absorbing-ball study under constant forcing
    Attractor {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_spec(common: &CommonArgs) -> Result<RunSpec, Error> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
    }
    parse_with_overrides(common.config.as_deref(), &common.overrides)
}

fn finish(report: &ExperimentReport) -> u8 {
    let mut stdout = std::io::stdout().lock();
    report.write_table(&mut stdout).ok();
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BlowUp { .. } => EXIT_BLOWUP,
        Error::Config { .. } | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> u8 {
    match cli.command {
        Command::Calmcheck { common, samples, seed } => {
            if let Some(dir) = &common.out {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
            let report = cmd_calmcheck(&cnse_cli::calmcheck::DEFAULT_EPSILONS, samples, seed);
            if let Some(dir) = &common.out {
                let path = dir.join("calmcheck_report.csv");
                if let Err(e) = std::fs::File::create(&path)
                    .map_err(Error::from)
                    .and_then(|f| {
                        let mut w = std::io::BufWriter::new(f);
                        report.write_csv(&mut w).map_err(Error::from)
                    })
                {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
            finish(&report)
        }
        Command::Run { common } => match load_spec(&common).and_then(|spec| {
            let record = cmd_run(&spec, common.out.as_deref())?;
            Ok(record)
        }) {
            Ok(record) => {
                println!(
                    "run complete: t = {}, {} samples, final energy {}",
                    record.final_time,
                    record.len(),
                    record.energy.last().unwrap_or(&0.0)
                );
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code_for(&e)
            }
        },
        Command::Converge { common } => {
            match load_spec(&common)
                .and_then(|spec| cmd_converge(&spec, &CalmingKind::ALL, common.out.as_deref()))
            {
                Ok(report) => finish(&report),
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            }
        }
        Command::Cauchy { common } => {
            match load_spec(&common).and_then(|spec| cmd_cauchy(&spec, common.out.as_deref())) {
                Ok(report) => finish(&report),
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            }
        }
        Command::Energy { common } => {
            match load_spec(&common).and_then(|spec| cmd_energy(&spec, common.out.as_deref())) {
                Ok(report) => finish(&report),
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            }
        }
        Command::Attractor { common } => {
            match load_spec(&common).and_then(|spec| cmd_attractor(&spec, common.out.as_deref())) {
                Ok(report) => finish(&report),
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => ExitCode::from(dispatch(cli)),
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                ExitCode::from(EXIT_OK)
            } else {
                eprint!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
        }
    }
}
