//! Error type shared by the analytics, combinatorics, and simulator modules.

use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Variants are split by how callers should react: parameter-validation
/// failures are user errors, [`Error::ProbabilityExcursion`] signals an
/// internal inconsistency (a computed probability left `[0, 1]` by more than
/// float round-off), and the remaining variants are resource guards.
#[derive(Debug, Error)]
pub enum Error {
    /// Hash share outside `[0, 1)`. `I = 1` is rejected: the attacker owns
    /// the whole network and every race is won trivially.
    #[error("hash share must satisfy 0 <= I < 1, got {value}")]
    ShareOutOfRange { value: f64 },

    /// Race query `(l, m, n)` violating `l >= 1`, `m >= -1`, or `0 <= n <= l`.
    #[error("invalid race query (l={l}, m={m}, n={n}): {reason}")]
    InvalidRaceQuery { l: u32, m: i64, n: u32, reason: &'static str },

    /// Bare lag parameter below `-1` (deadline-free catch-up query).
    #[error("lag m must be >= -1, got {m}")]
    InvalidLag { m: i64 },

    /// Attack window `L = 0`: the honest chain is allowed zero growth, so the
    /// catch-up race never starts and success degenerates to the lead
    /// distribution's tail mass alone. Rejected rather than silently
    /// special-cased.
    #[error(
        "attack window L must be >= 1; L = 0 leaves no catch-up race (success \
         would degenerate to the probability of the lead already exceeding Z+1)"
    )]
    EmptyWindow,

    /// Argument to the Catalan generating-function partial sum outside its
    /// convergence domain `[0, 1/4]`.
    #[error("generating-function argument must lie in [0, 0.25], got {x}")]
    GfDomain { x: f64 },

    /// `terms = 0` requested from the generating-function partial sum.
    #[error("generating-function partial sum needs at least one term")]
    GfNoTerms,

    /// A coefficient lookup outside the table's constructed capacity.
    #[error(
        "coefficient table covers i <= {max_i}, m <= {max_m}; \
         query needs (i={need_i}, m={need_m})"
    )]
    TableTooSmall { need_i: usize, need_m: usize, max_i: usize, max_m: usize },

    /// Deadline too large for the dynamic-programming oracle's configured cap.
    #[error("race oracle capped at l <= {cap}, got l = {l}; raise the cap explicitly")]
    OracleCapExceeded { l: u32, cap: u32 },

    /// Monte Carlo configuration with zero runs.
    #[error("simulation needs at least one run")]
    ZeroRuns,

    /// Monte Carlo configuration with zero workers.
    #[error("simulation parallelism must be >= 1")]
    ZeroParallelism,

    /// Confirmation-depth threshold outside the open interval `(0, 1)`.
    #[error("threshold must satisfy 0 < threshold < 1, got {value}")]
    InvalidThreshold { value: f64 },

    /// Lead pmf index outside `0..=Z+1`.
    #[error("lead index k must satisfy 0 <= k <= Z+1 = {max_k}, got {k}")]
    LeadIndexOutOfRange { k: u32, max_k: u32 },

    /// A computed probability left `[0, 1]` beyond the tolerated round-off
    /// band (`1e-12` on the float backend, exact on the rational backend).
    /// This indicates a bug, not bad input.
    #[error("internal consistency failure in {context}: probability value {value} outside [0, 1]")]
    ProbabilityExcursion { context: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
