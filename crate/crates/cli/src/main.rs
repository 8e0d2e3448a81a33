use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use curveflow_cli::{run, CliError, Command, ExperimentConfig};

/// Runs one curveflow experiment from a plain-text config.
#[derive(Debug, Parser)]
#[command(name = "curveflow", version)]
struct Args {
    /// flow, rescaled, profile, wave, curve or classify
    command: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG renderings of the curves.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = e.to_json();
            eprintln!("{body}");
            if std::fs::create_dir_all(&args.out).is_ok() {
                let _ = std::fs::write(args.out.join("error.json"), format!("{body}\n"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let command: Command = args.command.parse()?;
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.command != command {
        return Err(CliError::Config(format!(
            "command `{command}` does not match the config section [{}]",
            config.command
        )));
    }
    config.output_dir = args.out.clone();
    config.emit_svg = args.svg;
    let artifacts = run(&config)?;
    println!("{} files written to {}", artifacts.files.len() + 1, args.out.display());
    Ok(())
}
