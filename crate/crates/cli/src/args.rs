//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact and Monte Carlo analysis of double-spending races on proof-of-work
/// blockchains, with and without a time restriction on the attack.
#[derive(Debug, Parser)]
#[command(name = "forkrace", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Catch-up probability Q(l, m, n): the attacker's branch surpasses the
    /// honest branch before it reaches l blocks, starting m behind with n
    /// honest blocks already mined.
    Q(QArgs),
    /// Success probability of the time-restricted attack (deadline L past
    /// confirmation depth Z).
    Tr(TrArgs),
    /// Success probability of the classical unrestricted attack.
    Tu(TuArgs),
    /// Distribution of the attacker's secret lead at confirmation.
    Lead(LeadArgs),
    /// Evaluate a parameter sweep (named preset or JSON spec file) to CSV or
    /// JSON.
    Sweep(SweepArgs),
    /// Monte Carlo estimation with reproducible seeding.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Smallest confirmation depth keeping the attack's success probability
    /// at or below a threshold.
    RecommendZ(RecommendArgs),
}

/// Numeric backend for analytic commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Backend {
    /// Compensated double precision (fast; accurate to ~1e-12).
    #[default]
    Float,
    /// Exact arbitrary-precision rationals (ground truth; slower).
    Rational,
}

#[derive(Debug, Args)]
pub struct QArgs {
    /// Honest-chain deadline l (>= 1).
    #[arg(long)]
    pub l: u32,
    /// Attacker lag m (>= -1; -1 means already surpassed).
    #[arg(long, allow_negative_numbers = true)]
    pub m: i64,
    /// Honest blocks already mined n (0 <= n <= l).
    #[arg(long)]
    pub n: u32,
    /// Attacker hash share in [0, 1): decimal like 0.3, or a fraction like
    /// 3/10 with the rational backend.
    #[arg(long)]
    pub share: String,
    #[arg(long, value_enum, default_value_t)]
    pub backend: Backend,
    /// Also print the term-by-term breakdown of the closed-form sum
    /// (i, walk count a(i, m), term value).
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct TrArgs {
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Confirmation depth Z (>= 0).
    #[arg(long)]
    pub z: u32,
    /// Attack window L (>= 1): honest blocks past confirmation before the
    /// attacker gives up.
    #[arg(long)]
    pub window: u32,
    #[arg(long, value_enum, default_value_t)]
    pub backend: Backend,
    /// Also print each lead's contribution: k, Pr{b = k}, starting lag,
    /// catch-up probability, and contribution to the total.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct TuArgs {
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Confirmation depth Z (>= 0).
    #[arg(long)]
    pub z: u32,
    #[arg(long, value_enum, default_value_t)]
    pub backend: Backend,
}

#[derive(Debug, Args)]
pub struct LeadArgs {
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Confirmation depth Z (>= 0).
    #[arg(long)]
    pub z: u32,
    #[arg(long, value_enum, default_value_t)]
    pub backend: Backend,
}

/// Output format for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SweepSource {
    /// Named preset: fig-pi, fig-pl, fig-vs, fig-vsl, fig-vsz, or fig-vsz1.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file holding one sweep spec object or an array of them.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SweepSource,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Output file (written atomically: temp file, then rename). Standard
    /// output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Attach Monte Carlo columns (p_hat, stderr, runs, seed) to every row.
    #[arg(long)]
    pub with_sim: bool,
    /// Simulation runs per row (with --with-sim or a spec requesting
    /// simulation).
    #[arg(long)]
    pub runs: Option<u64>,
    /// Simulation seed; random (and echoed in the seed column) when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation worker threads; defaults to the environment override or
    /// all cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Monte Carlo estimate of the catch-up probability Q(l, m, n).
    Race(SimulateRaceArgs),
    /// Monte Carlo estimate of the time-restricted attack's success
    /// probability.
    Attack(SimulateAttackArgs),
}

#[derive(Debug, Args)]
pub struct SimulateRaceArgs {
    /// Honest-chain deadline l (>= 1).
    #[arg(long)]
    pub l: u32,
    /// Attacker lag m (>= -1).
    #[arg(long, allow_negative_numbers = true)]
    pub m: i64,
    /// Honest blocks already mined n (0 <= n <= l).
    #[arg(long)]
    pub n: u32,
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Number of Monte Carlo runs.
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,
    /// RNG seed; random (and echoed) when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the environment override or all cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateAttackArgs {
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Confirmation depth Z (>= 0).
    #[arg(long)]
    pub z: u32,
    /// Attack window L (>= 1).
    #[arg(long)]
    pub window: u32,
    /// Number of Monte Carlo runs.
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,
    /// RNG seed; random (and echoed) when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the environment override or all cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Attacker hash share in [0, 1).
    #[arg(long)]
    pub share: String,
    /// Attack window L (>= 1).
    #[arg(long)]
    pub window: u32,
    /// Success-probability threshold in (0, 1).
    #[arg(long)]
    pub threshold: f64,
    /// Largest confirmation depth to scan.
    #[arg(long, default_value_t = 25)]
    pub z_max: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_lag_parses() {
        let cli = Cli::try_parse_from([
            "forkrace", "q", "--l", "5", "--m", "-1", "--n", "0", "--share", "0.7",
        ])
        .unwrap();
        match cli.command {
            Command::Q(args) => assert_eq!(args.m, -1),
            _ => panic!("expected q command"),
        }
    }

    #[test]
    fn sweep_requires_exactly_one_source() {
        assert!(Cli::try_parse_from(["forkrace", "sweep"]).is_err());
        assert!(Cli::try_parse_from([
            "forkrace", "sweep", "--preset", "fig-pi", "--spec", "x.json",
        ])
        .is_err());
        assert!(Cli::try_parse_from(["forkrace", "sweep", "--preset", "fig-pi"]).is_ok());
    }
}
