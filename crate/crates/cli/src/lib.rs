//! Command-line surface over the race-analytics library: single queries,
//! figure-reproduction sweeps, seeded Monte Carlo simulation, and
//! confirmation-depth recommendation.

pub mod args;
pub mod commands;
pub mod output;
pub mod presets;
pub mod sweep;

use std::io::Write;

use clap::Parser;

use args::{Cli, Command, SimulateCommand};
use output::{CliResult, ExitCode};
use sweep::SimOverrides;

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    output::init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        // Clap's own exit policy: 0 for --help/--version, 2 for usage errors.
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Validation as i32 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.code as i32
        }
    }
}

fn dispatch(command: &Command, out: &mut impl Write) -> CliResult<()> {
    match command {
        Command::Q(a) => commands::cmd_q(a, out),
        Command::Tr(a) => commands::cmd_tr(a, out),
        Command::Tu(a) => commands::cmd_tu(a, out),
        Command::Lead(a) => commands::cmd_lead(a, out),
        Command::Simulate(SimulateCommand::Race(a)) => commands::cmd_simulate_race(a, out),
        Command::Simulate(SimulateCommand::Attack(a)) => commands::cmd_simulate_attack(a, out),
        Command::RecommendZ(a) => commands::cmd_recommend_z(a, out),
        Command::Sweep(a) => {
            let specs = match (&a.source.preset, &a.source.spec) {
                (Some(name), None) => presets::preset(name)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        output::CliError::validation(format!(
                            "cannot read spec file {}: {e}",
                            path.display()
                        ))
                    })?;
                    sweep::parse_spec_file(&text)?
                }
                // Clap's argument group enforces exactly one source.
                _ => unreachable!("clap guarantees exactly one sweep source"),
            };
            let overrides = SimOverrides {
                with_sim: a.with_sim,
                runs: a.runs,
                seed: a.seed,
                parallelism: a.parallelism,
            };
            let run = sweep::run_sweep(&specs, &overrides)?;
            sweep::emit(&run, a.format, a.out.as_deref())
        }
    }
}
