//! Exit-code policy, numeric formatting, parallelism resolution, and the
//! stderr logger.

use std::fmt;

use forkrace::Error as CoreError;

/// Environment variable overriding the *default* thread count for
/// simulations. An explicit `--parallelism` flag always wins.
pub const PARALLELISM_ENV: &str = "FORKRACE_PARALLELISM";

/// Process exit codes: `0` success, `2` validation or I/O failure, `3`
/// no-solution (recommend-z found no qualifying depth), `4` internal
/// inconsistency (a computed probability left `[0, 1]` beyond round-off).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Validation = 2,
    NoSolution = 3,
    Internal = 4,
}

/// A command failure carrying its exit code and user-facing message.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: ExitCode::Validation, message: message.into() }
    }

    pub fn no_solution(message: impl Into<String>) -> Self {
        Self { code: ExitCode::NoSolution, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::ProbabilityExcursion { .. } => ExitCode::Internal,
            _ => ExitCode::Validation,
        };
        Self { code, message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::validation(format!("i/o failure: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Locale-independent 12-significant-digit scientific notation, the fixed
/// formatting of every float column in sweep output.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Thread count for simulations: explicit flag, else the environment
/// override, else every available core.
pub fn resolve_parallelism(flag: Option<usize>) -> CliResult<usize> {
    if let Some(p) = flag {
        if p == 0 {
            return Err(CliError::validation("parallelism must be >= 1"));
        }
        return Ok(p);
    }
    if let Ok(raw) = std::env::var(PARALLELISM_ENV) {
        let p: usize = raw.parse().map_err(|_| {
            CliError::validation(format!("{PARALLELISM_ENV} must be a positive integer, got {raw:?}"))
        })?;
        if p == 0 {
            return Err(CliError::validation(format!("{PARALLELISM_ENV} must be >= 1")));
        }
        return Ok(p);
    }
    Ok(std::thread::available_parallelism().map(usize::from).unwrap_or(1))
}

/// Simulation seed: the flag if given, else a fresh random seed. Either way
/// the seed is echoed in the output, so any run can be reproduced.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.unwrap_or_else(rand::random)
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().to_string().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Route library warnings (e.g. the float backend clamping round-off
/// excursions) to stderr. Idempotent.
pub fn init_logging() {
    let _ = log::set_logger(&LOGGER).map(|()| log::set_max_level(log::LevelFilter::Warn));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)] // input deliberately carries more digits than f64 keeps
    fn fmt12_gives_twelve_significant_digits() {
        assert_eq!(fmt12(0.3), "3.00000000000e-1");
        assert_eq!(fmt12(1.0), "1.00000000000e0");
        assert_eq!(fmt12(0.197530864197530864), "1.97530864198e-1");
        assert_eq!(fmt12(0.0), "0.00000000000e0");
    }

    #[test]
    fn explicit_parallelism_wins() {
        assert_eq!(resolve_parallelism(Some(3)).unwrap(), 3);
        assert!(resolve_parallelism(Some(0)).is_err());
    }

    #[test]
    fn seeds_pass_through() {
        assert_eq!(resolve_seed(Some(42)), 42);
    }
}
