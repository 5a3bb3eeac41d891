//! Exact and Monte Carlo analysis of double-spending races on
//! proof-of-work blockchains, with and without a time restriction on the
//! attack.
//!
//! The crate is organized in three layers:
//!
//! - [`combinatorics`] — the lattice-walk counts behind the closed form:
//!   Catalan numbers, the two-index coefficient family `a(i, m)` (table,
//!   literal nested-sum reference, and ballot-style closed form), and a
//!   partial sum of the Catalan generating function.
//! - [`analytics`] — the probability formulas themselves: the catch-up race
//!   `Q(l, m, n)` (closed form plus an independent dynamic-programming
//!   oracle), the attacker's lead distribution at confirmation, success
//!   probabilities of the time-restricted and unrestricted attacks, and a
//!   confirmation-depth recommender. Everything is generic over the numeric
//!   backend: compensated `f64` or exact big rationals (see [`numeric`]).
//! - [`simulator`] — a reproducible Monte Carlo oracle that replays the
//!   model block by block and cross-checks the analytics.
//!
//! # Example
//!
//! ```
//! use forkrace::analytics::{
//!     table_for_attack, tr_success_probability, tu_success_probability,
//!     AttackParams, HashShare,
//! };
//!
//! // A 30% attacker against 4 confirmations, giving up once the honest
//! // chain grows 10 blocks past confirmation.
//! let share = HashShare::new(0.3)?;
//! let params = AttackParams::new(share.clone(), 4, 10)?;
//! let table = table_for_attack(params.window_l(), params.depth_z());
//! let restricted = tr_success_probability(&params, &table)?;
//! let unrestricted = tu_success_probability(&share, 4)?;
//! assert!(restricted.to_f64() < unrestricted.to_f64());
//! # Ok::<(), forkrace::Error>(())
//! ```

pub mod analytics;
pub mod combinatorics;
pub mod error;
pub mod numeric;
pub mod simulator;

pub use error::{Error, Result};
