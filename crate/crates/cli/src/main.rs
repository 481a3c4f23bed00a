use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conrelax_cli::{execute, parse_config, Mode};

#[derive(Parser)]
#[command(name = "conrelax", version, about = "Relaxed constrained hyperbolic runs and verification studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Main run plus single-run checks.
    Run { config: PathBuf },
    /// Main run, every check and every sweep.
    Study { config: PathBuf },
    /// Parse and validate only.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (path, mode) = match &cli.command {
        Command::Run { config } => (config, Some(Mode::Run)),
        Command::Study { config } => (config, Some(Mode::Study)),
        Command::Validate { config } => (config, None),
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    let Some(mode) = mode else {
        if !cli.quiet {
            println!("{}: valid", path.display());
        }
        return ExitCode::SUCCESS;
    };
    let dir = cli
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = match execute(&cfg, mode, &dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    };
    if let Some(e) = &result.manifest.error {
        eprintln!("error: {e}");
    }
    if !cli.quiet {
        for v in &result.verdicts {
            println!(
                "{} {} [{}] value={:e} budget={:e}",
                if v.pass { "PASS" } else { "FAIL" },
                v.check,
                v.parameters,
                v.value,
                v.budget
            );
        }
        println!("artifacts in {}", dir.display());
    }
    ExitCode::from(result.exit_code() as u8)
}
