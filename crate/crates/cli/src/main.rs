use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use semidiag_cli::{plot, run_config, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "semidiag", version, about = "Run diagonalization scenarios and plot their results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config.
    Run { config: PathBuf },
    /// Render a results CSV as an SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Convergence)]
        kind: Kind,
        /// Output file; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Convergence,
}

fn execute(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let s = run_config(&cfg)?;
            Ok(json!({
                "status": "ok",
                "scenario": cfg.scenario.name(),
                "output": cfg.output,
                "rows": s.rows,
                "violations": s.violations,
                "artifacts": s.artifacts,
            }))
        }
        Command::Plot { csv, kind: Kind::Convergence, out } => {
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            plot::plot_file(&csv, &out)?;
            Ok(json!({ "status": "ok", "svg": out }))
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            Ok(json!({ "status": "ok", "scenario": cfg.scenario.name(), "config": cfg }))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
