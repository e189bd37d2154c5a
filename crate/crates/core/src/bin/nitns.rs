use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use nitns::experiment::{cmd_compare, cmd_restart_study, cmd_run, cmd_verify, parse_config, ExperimentConfig, Suite};
use nitns::Error;

const EXIT_PROPERTY: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "nitns", version, about = "Periodic-box Navier-Stokes laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Override a key, e.g. `--set nu=0.05`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes timeseries.csv and snapshots.
    Run(ConfigArgs),
    /// Run several formulations across mollifier scales and report L² gaps.
    Compare(ConfigArgs),
    /// Execute a property suite and print one line per check.
    Verify {
        /// algebra | spectral | energy | cauchy | consistency | all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Tabulate restart intervals of the Eulerian-Lagrangian run against g.
    RestartStudy(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(Path::new(&args.config))
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    parse_config(&text, &args.set)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::ConfigKey { .. } => EXIT_CONFIG,
        Error::BlowUp { .. } | Error::Invertibility { .. } | Error::NonFinite(_) | Error::Overflow { .. } => {
            EXIT_BLOW_UP
        }
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(&args)?;
            let report = cmd_run(&cfg)?;
            println!(
                "{} steps, {} records, {} restarts -> {}",
                report.output.steps,
                report.output.records.len(),
                report.output.restarts.len(),
                report.csv.display()
            );
            Ok(0)
        }
        Command::Compare(args) => {
            let report = cmd_compare(&load(&args)?)?;
            print!("{report}");
            Ok(0)
        }
        Command::Verify { suite } => {
            let suites = if suite.eq_ignore_ascii_case("all") { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let mut ok = true;
            for s in suites {
                for check in cmd_verify(s)? {
                    ok &= check.passed();
                    println!("{check}");
                }
            }
            Ok(if ok { 0 } else { EXIT_PROPERTY })
        }
        Command::RestartStudy(args) => {
            let report = cmd_restart_study(&load(&args)?)?;
            print!("{report}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("NITNS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("cannot size the thread pool: {e}");
        }
    }
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
