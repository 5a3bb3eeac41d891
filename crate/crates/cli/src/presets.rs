//! Named sweep presets reproducing the numeric experiments behind the
//! source figures: curve shapes and ordering claims, not pixel values.
//!
//! Where the figures do not pin a parameter, the choice made here is
//! documented inline and in the README:
//!
//! - `fig-pi` hash-share legend: {0.2, 0.3, 0.4, 0.5} (the figure's legend
//!   values are not recoverable from the text).
//! - `fig-pl` uses `elapsed_n = 0` with `window_l` in {5, 10, 20, 40}; only
//!   the difference `l - n` matters (deadline-shift identity), so the
//!   remaining-deadline family is realized at n = 0.
//! - `fig-vs` sweeps the deadline over 4..=300, far enough to visibly
//!   converge to the deadline-free limit emitted in its `q_limit` column.
//! - `fig-vsz1` fixes `window_l = 10`, matching the companion fig-vsz.

use crate::output::{CliError, CliResult};
use crate::sweep::{Axis, FixedBindings, SweepSpec, Target};

fn plain(target: Target, axis: Axis, values: Vec<f64>, fixed: FixedBindings) -> SweepSpec {
    SweepSpec {
        target,
        axis,
        values,
        fixed,
        with_simulation: false,
        sim: None,
        include_limit: false,
    }
}

fn int_range(lo: i64, hi: i64) -> Vec<f64> {
    (lo..=hi).map(|v| v as f64).collect()
}

/// Shares 0, 0.05, ..., 0.95 (k/20 keeps the grid exactly representable
/// per IEEE division, hence reproducible).
fn share_grid() -> Vec<f64> {
    (0..20).map(|k| f64::from(k) / 20.0).collect()
}

/// Catch-up probability against the starting lag, one series per hash
/// share.
fn fig_pi() -> Vec<SweepSpec> {
    [0.2, 0.3, 0.4, 0.5]
        .into_iter()
        .map(|share| {
            plain(
                Target::Q,
                Axis::LagM,
                int_range(1, 60),
                FixedBindings {
                    share_i: Some(share),
                    window_l: Some(40),
                    elapsed_n: Some(0),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Catch-up probability against the starting lag, one series per remaining
/// deadline.
fn fig_pl() -> Vec<SweepSpec> {
    [5, 10, 20, 40]
        .into_iter()
        .map(|window| {
            plain(
                Target::Q,
                Axis::LagM,
                int_range(1, 10),
                FixedBindings {
                    share_i: Some(0.4),
                    window_l: Some(window),
                    elapsed_n: Some(0),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Convergence of Q(l, 3, 0) to its deadline-free limit as the deadline
/// grows, one series per hash share, limit attached as `q_limit`.
fn fig_vs() -> Vec<SweepSpec> {
    [0.4, 0.6]
        .into_iter()
        .map(|share| SweepSpec {
            include_limit: true,
            ..plain(
                Target::Q,
                Axis::WindowL,
                int_range(4, 300),
                FixedBindings {
                    share_i: Some(share),
                    lag_m: Some(3),
                    elapsed_n: Some(0),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Restricted vs unrestricted attack success against the hash share, one
/// series per attack window.
fn fig_vsl() -> Vec<SweepSpec> {
    [1, 2, 10, 20, 50]
        .into_iter()
        .map(|window| {
            plain(
                Target::PTr,
                Axis::ShareI,
                share_grid(),
                FixedBindings {
                    depth_z: Some(4),
                    window_l: Some(window),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Restricted vs unrestricted attack success against the hash share, one
/// series per confirmation depth.
fn fig_vsz() -> Vec<SweepSpec> {
    [2, 4, 8]
        .into_iter()
        .map(|depth| {
            plain(
                Target::PTr,
                Axis::ShareI,
                share_grid(),
                FixedBindings {
                    depth_z: Some(depth),
                    window_l: Some(10),
                    ..Default::default()
                },
            )
        })
        .collect()
}

/// Restricted attack success against the confirmation depth, one series per
/// hash share — the crossover between the low- and high-share regimes.
fn fig_vsz1() -> Vec<SweepSpec> {
    [0.3, 0.6]
        .into_iter()
        .map(|share| {
            plain(
                Target::PTr,
                Axis::DepthZ,
                int_range(0, 12),
                FixedBindings {
                    share_i: Some(share),
                    window_l: Some(10),
                    ..Default::default()
                },
            )
        })
        .collect()
}

pub const PRESET_NAMES: [&str; 6] =
    ["fig-pi", "fig-pl", "fig-vs", "fig-vsl", "fig-vsz", "fig-vsz1"];

/// Look a preset up by name.
pub fn preset(name: &str) -> CliResult<Vec<SweepSpec>> {
    match name {
        "fig-pi" => Ok(fig_pi()),
        "fig-pl" => Ok(fig_pl()),
        "fig-vs" => Ok(fig_vs()),
        "fig-vsl" => Ok(fig_vsl()),
        "fig-vsz" => Ok(fig_vsz()),
        "fig-vsz1" => Ok(fig_vsz1()),
        _ => Err(CliError::validation(format!(
            "unknown preset {name:?}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}
