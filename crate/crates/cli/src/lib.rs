//! Configuration, output bookkeeping and command pipelines behind the
//! `corrlab` binary.
//!
//! Every run reads one [`ExperimentConfig`], writes its reports into an
//! output directory and finishes with a `manifest.json` that checksums each
//! report. Identical config and seed give identical reports, whatever the
//! worker count.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod systems;

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

pub use config::ExperimentConfig;
pub use error::{CliError, ErrorReport};
pub use output::{OutputDir, Provenance, RunManifest};

use commands::RunContext;
use systems::System;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Correlations,
    Clt,
    Bernstein,
    Transfer,
    BilliardCheck,
    Regularity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Correlations => "correlations",
            Command::Clt => "clt",
            Command::Bernstein => "bernstein",
            Command::Transfer => "transfer",
            Command::BilliardCheck => "billiard-check",
            Command::Regularity => "regularity",
        }
    }
}

/// Validates `config`, runs `command` on a pool of `config.workers` threads
/// and writes its reports and manifest under `out`.
pub fn run(command: Command, config: &ExperimentConfig, out: &Path) -> Result<RunManifest, CliError> {
    config.validate()?;
    let started = Instant::now();
    let provenance = Provenance {
        artifact_version: output::ARTIFACT_VERSION.into(),
        command: command.name().into(),
        config_hash: config.hash(),
        seed: config.seed()?,
        budget: 0,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))?;
    let mut dir = OutputDir::create(out)?;
    pool.install(|| {
        let system = System::build(&config.system)?;
        let mut ctx = RunContext {
            config,
            provenance: provenance.clone(),
            out: &mut dir,
        };
        let obs = &config.observable;
        match command {
            Command::Simulate => with_system!(&system, obs, |s, f| commands::simulate(&mut ctx, s, &f)),
            Command::Correlations => {
                with_system!(&system, obs, |s, f| commands::correlations(&mut ctx, &system, s, &f))
            }
            Command::Clt => with_system!(&system, obs, |s, f| commands::clt(&mut ctx, s, &f)),
            Command::Bernstein => {
                with_system!(&system, obs, |s, f| commands::bernstein(&mut ctx, s, &f))
            }
            Command::Transfer => commands::transfer(&mut ctx, &system),
            Command::BilliardCheck => commands::billiard_check(&mut ctx, &system),
            Command::Regularity => commands::regularity(&mut ctx),
        }
    })?;
    dir.finish(&provenance, started.elapsed().as_secs_f64())
}
