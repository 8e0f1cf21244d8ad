use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use corrlab_cli::{run, CliError, Command, ExperimentConfig};

/// Correlation-decay and CLT experiments on chaotic maps and billiards.
#[derive(Debug, Parser)]
#[command(name = "corrlab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config `out` or `out/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the logical core count.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = args.out.clone();
    let mut out_dir = out.clone();
    let result = ExperimentConfig::load(&args.config).and_then(|mut config| {
        if args.seed.is_some() {
            config.seed = args.seed;
        }
        if args.workers.is_some() {
            config.workers = args.workers;
        }
        let dir = out
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(args.command.name()));
        out_dir = Some(dir.clone());
        run(args.command, &config, &dir)
    });
    match result {
        Ok(manifest) => {
            println!(
                "{}: wrote {} files to {}",
                manifest.command,
                manifest.files.len(),
                out_dir.expect("set on success").display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, out_dir),
    }
}

fn fail(e: &CliError, out_dir: Option<PathBuf>) -> ExitCode {
    let report = serde_json::to_string_pretty(&e.report()).expect("error report serializes");
    eprintln!("{report}");
    if let Some(dir) = out_dir {
        // Best effort: the directory may be what failed.
        if std::fs::create_dir_all(&dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{report}\n"));
        }
    }
    ExitCode::from(e.exit_code() as u8)
}
