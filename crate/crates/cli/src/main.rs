use std::path::PathBuf;
use std::process::ExitCode;

use bigjump_cli::{emit_report, run_experiment, ExperimentConfig, OutputFormat, Scenario, OUTPUT_DIR_ENV};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bigjump", version, about = "Heavy-tailed maximum asymptotics vs Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report.
    Run {
        config: PathBuf,
        /// Overrides `output.dir` and $BIGJUMP_OUTPUT_DIR.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List the available scenarios.
    ListScenarios,
}

fn run(cli: Cli) -> bigjump_cli::Result<bool> {
    match cli.command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<10} {}", s.name(), s.description());
            }
            Ok(true)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            cfg.validate()?;
            println!("{}: ok ({} scenario)", config.display(), cfg.scenario);
            Ok(true)
        }
        Command::Run {
            config,
            output_dir,
            format,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let report = run_experiment(&cfg)?;
            let dir = output_dir
                .or_else(|| cfg.output.dir.clone())
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let stem = cfg.output.name.clone().unwrap_or_else(|| cfg.scenario.name().to_string());
            let format = match format {
                Some(Format::Csv) => OutputFormat::Csv,
                Some(Format::Json) => OutputFormat::Json,
                None => cfg.output.format,
            };
            for v in &report.verdicts {
                let label = v.verdict.map_or("n/a", |v| v.as_str());
                println!("{:<24} {:<5} {}", v.name, label, v.detail);
            }
            for path in emit_report(&report, &dir, &stem, format)? {
                println!("wrote {}", path.display());
            }
            Ok(!report.failed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
