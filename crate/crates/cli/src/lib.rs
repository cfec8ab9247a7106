//! Command line driver: each pipeline phase as a subcommand, or all four
//! through `run`. Exit status is 0 when every gate that ran passed or
//! warned, 1 on a failed gate or a phase error, 2 on a usage or
//! configuration error.

pub mod artifacts;
pub mod config;
pub mod manifest;
pub mod phases;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use itelos_core::Verdict;

use config::{resolve, Cli, Command, ConfigError, PipelineConfig, OUT_ENV};
use phases::{Phase, PhaseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

enum Failure {
    Config(ConfigError),
    Phase(PhaseError),
}

fn dispatch(
    command: &Command,
    out_env: Option<PathBuf>,
    log: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg =
        |common, mappings| resolve(common, mappings, out_env.clone()).map_err(Failure::Config);
    let single = |cfg: &PipelineConfig, phase: Phase, verdict: Verdict, log: &mut dyn Write| {
        let _ = writeln!(
            log,
            "{phase}: {verdict} (reports in {})",
            cfg.out_dir.display()
        );
        if verdict == Verdict::Fail {
            EXIT_FAIL
        } else {
            EXIT_OK
        }
    };
    match command {
        Command::Inception(args) => {
            let cfg = cfg(args, None)?;
            let verdict = phases::inception(&cfg).map_err(Failure::Phase)?;
            Ok(single(&cfg, Phase::Inception, verdict, log))
        }
        Command::Model(args) => {
            let cfg = cfg(&args.common, None)?;
            let inception = args
                .inception
                .clone()
                .unwrap_or_else(|| cfg.artifact(artifacts::INCEPTION));
            let verdict = phases::modeling(&cfg, &inception).map_err(Failure::Phase)?;
            Ok(single(&cfg, Phase::Modeling, verdict, log))
        }
        Command::Align(args) => {
            let cfg = cfg(&args.common, None)?;
            let model = args
                .model
                .clone()
                .unwrap_or_else(|| cfg.artifact(artifacts::MODEL));
            let verdict = phases::alignment(&cfg, &model).map_err(Failure::Phase)?;
            Ok(single(&cfg, Phase::Alignment, verdict, log))
        }
        Command::Integrate(args) => {
            let cfg = cfg(&args.common, args.mappings.as_ref())?;
            let etg = args
                .etg
                .clone()
                .unwrap_or_else(|| cfg.artifact(artifacts::FINAL_ETG));
            let verdict =
                phases::integration(&cfg, &etg, args.model.as_deref()).map_err(Failure::Phase)?;
            Ok(single(&cfg, Phase::Integration, verdict, log))
        }
        Command::Run(args) => {
            let cfg = cfg(&args.common, args.mappings.as_ref())?;
            let outcome = phases::run_pipeline(&cfg).map_err(Failure::Phase)?;
            for (phase, verdict) in &outcome.verdicts {
                let _ = writeln!(log, "{phase}: {verdict}");
            }
            for phase in &outcome.skipped {
                let _ = writeln!(log, "{phase}: skipped after a failed gate");
            }
            let _ = writeln!(log, "reports in {}", cfg.out_dir.display());
            Ok(if outcome.failed() { EXIT_FAIL } else { EXIT_OK })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Progress goes to `log`, errors to `err`; returns the exit status.
pub fn run_cli<I, T>(
    args: I,
    out_env: Option<PathBuf>,
    log: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(log, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli.command, out_env, log) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Phase(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAIL
        }
    }
}

/// Entry point used by the binary: real arguments, environment and stdio.
pub fn main_exit_code() -> i32 {
    let out_env = std::env::var_os(OUT_ENV).map(PathBuf::from);
    run_cli(
        std::env::args_os(),
        out_env,
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}
