use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use viscodiff_cli::commands::sweep_threads;
use viscodiff_cli::error::EXIT_SOLVER;
use viscodiff_cli::{
    cmd_hysteresis, cmd_simulate, cmd_sweep, load_config, CliError, ConfigError, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "viscodiff",
    version,
    about = "Viscous diffusion Galerkin solver and hysteresis experiments"
)]
struct Cli {
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Reserved. Runs never use random numbers, so this flag is rejected.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Galerkin simulation and write trajectory.csv
    Simulate { config: PathBuf },
    /// Run a hysteresis experiment and write time series, loop and plots
    Hysteresis { config: PathBuf },
    /// Run one experiment per parameter value and write sweep_summary.csv
    Sweep {
        config: PathBuf,
        /// One of beta, n, dt, tau, A, gamma, epsilon
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("viscodiff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    if cli.seedless {
        return Err(ConfigError::new(
            None,
            Some("--seedless"),
            "reserved flag: viscodiff is deterministic and uses no random numbers",
        )
        .into());
    }
    match cli.command {
        Command::Simulate { config } => {
            let ExperimentConfig::Simulate(c) = load_config(&config)? else {
                return Err(wrong_section("simulate"));
            };
            let result = cmd_simulate(&c, &cli.out);
            if let Ok(t) = &result {
                for note in &t.advisories {
                    eprintln!("advisory: {note}");
                }
                if let Some(last) = t.last() {
                    println!(
                        "t = {}  free_energy = {}  energy_residual = {:e}",
                        last.t, last.diagnostics.free_energy, last.diagnostics.energy_residual
                    );
                }
            }
            result.map(|_| 0)
        }
        Command::Hysteresis { config } => {
            let ExperimentConfig::Hysteresis(c) = load_config(&config)? else {
                return Err(wrong_section("hysteresis"));
            };
            let run = cmd_hysteresis(&c, &cli.out)?;
            println!("loop_area = {}", run.loop_area);
            println!("sup_distance_to_play = {}", run.sup_distance);
            Ok(0)
        }
        Command::Sweep {
            config,
            param,
            values,
        } => {
            let base = load_config(&config)?;
            let param = param.parse()?;
            let report = cmd_sweep(&base, param, &values, &cli.out, sweep_threads()?)?;
            println!("summary: {}", report.summary.display());
            let failed = report.failures();
            if failed > 0 {
                eprintln!(
                    "{failed} of {} runs failed; see the status column",
                    report.rows.len()
                );
                return Ok(EXIT_SOLVER);
            }
            Ok(0)
        }
    }
}

fn wrong_section(expected: &str) -> CliError {
    ConfigError::new(None, None, format!("expected a [{expected}] section")).into()
}
