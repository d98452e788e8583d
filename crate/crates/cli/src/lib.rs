//! Batch front end for the `sketchseg` toolkit.
//!
//! Every command reads a [`RunConfig`] (JSON file plus flag overrides), fans
//! out over input files on a rayon pool and writes its reports in input-name
//! order, so the bytes on disk do not depend on `--threads`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod files;

pub use args::{Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Resolves the configuration for `cli` without running anything.
pub fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.common.apply(&mut cfg);
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

/// Runs the parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.count())
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Augment(_) => commands::augment::run(&cfg).map(|m| {
            log::info!("augmented {} sketches", m.files.len());
        }),
        Command::Transport(_) => commands::transport::run(&cfg).map(|r| {
            log::info!("transport cost {:.6} after {} iterations", r.achieved_cost, r.iterations_used);
        }),
        Command::Eval(_) => commands::eval::run(&cfg).map(|s| {
            log::info!("evaluated {} pairs, mIoU {:.2}", s.samples, s.report.miou);
        }),
        Command::ScaleAnalysis(_) => commands::scale::run(&cfg).map(|r| {
            log::info!("fitted {} curve points from {} records", r.curve_points, r.kept);
        }),
    })
}
