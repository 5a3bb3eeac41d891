//! Monte Carlo oracle for the analytic success probabilities.
//!
//! Each run replays the model literally — block by block, one Bernoulli
//! draw per block — with none of the closed form's combinatorics, so
//! agreement between [`simulate_race`] / [`simulate_attack`] and the
//! analytic formulas is evidence for both.
//!
//! Reproducibility contract: run `j` of a simulation seeded `s` always draws
//! from `ChaCha8Rng::seed_from_u64(s)` switched to stream `j` — a documented,
//! cross-platform construction. Runs are aggregated by *counting successes*,
//! which is order-independent, so the estimate is bit-identical for every
//! `parallelism` setting and across repeated invocations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{AttackParams, HashShare, RaceQuery};
use crate::error::{Error, Result};

/// One step of the catch-up walk: who mined the next block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkStep {
    /// Attacker block: the lag shrinks by one.
    Attacker,
    /// Honest block: the lag grows by one and the deadline clock advances.
    Honest,
}

impl WalkStep {
    /// Signed change to the attacker's lag.
    pub fn lag_delta(self) -> i64 {
        match self {
            WalkStep::Attacker => -1,
            WalkStep::Honest => 1,
        }
    }
}

/// Simulation size, seed, and thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    runs: u64,
    seed: u64,
    parallelism: usize,
}

impl SimConfig {
    pub fn new(runs: u64, seed: u64, parallelism: usize) -> Result<Self> {
        if runs == 0 {
            return Err(Error::ZeroRuns);
        }
        if parallelism == 0 {
            return Err(Error::ZeroParallelism);
        }
        Ok(Self { runs, seed, parallelism })
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }
}

/// A Monte Carlo estimate: success frequency plus its binomial standard
/// error `sqrt(p_hat (1 - p_hat) / runs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub runs: u64,
    pub seed: u64,
}

/// The generator for one run: base seed, then one ChaCha stream per run
/// index. Streams are independent by construction, so runs never share
/// randomness regardless of scheduling.
pub fn rng_stream(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

fn draw_step(rng: &mut ChaCha8Rng, share: f64) -> WalkStep {
    if rng.random::<f64>() < share {
        WalkStep::Attacker
    } else {
        WalkStep::Honest
    }
}

/// Play one catch-up race from `(l, m, n)`; `true` if the attacker's branch
/// surpasses (lag `-1`) before the honest chain reaches `l` blocks.
fn race_run(rng: &mut ChaCha8Rng, l: u32, m: i64, n: u32, share: f64) -> bool {
    let mut lag = m;
    let mut elapsed = n;
    // Honest steps are capped by the deadline and attacker steps by the
    // distance to lag -1, so a run can never outlive this bound.
    let budget = (m + 1) as u64 + 2 * u64::from(l - n);
    let mut steps = 0u64;
    loop {
        if lag == -1 {
            return true;
        }
        if elapsed == l {
            return false;
        }
        steps += 1;
        assert!(steps <= budget, "catch-up race exceeded its termination bound");
        match draw_step(rng, share) {
            WalkStep::Attacker => lag -= 1,
            WalkStep::Honest => {
                lag += 1;
                elapsed += 1;
            }
        }
    }
}

/// Play one full attack: secret mining during confirmation, then the
/// catch-up race under the window deadline.
fn attack_run(rng: &mut ChaCha8Rng, share: f64, depth_z: u32, window_l: u32) -> bool {
    // Confirmation phase: the honest chain needs Z+1 blocks; count the
    // attacker's secret blocks meanwhile. Once the secret branch is already
    // longer than the whole confirmed chain the attack has succeeded no
    // matter what follows, so the draw loop is bounded.
    let needed = u64::from(depth_z) + 1;
    let mut honest = 0u64;
    let mut lead = 0u64;
    let mut draws = 0u64;
    while honest < needed {
        draws += 1;
        assert!(draws <= 2 * needed + 1, "confirmation phase exceeded its termination bound");
        match draw_step(rng, share) {
            WalkStep::Attacker => {
                lead += 1;
                if lead > needed {
                    return true;
                }
            }
            WalkStep::Honest => honest += 1,
        }
    }
    let m = needed as i64 - lead as i64;
    race_run(rng, window_l, m, 0, share)
}

/// Run `run_once` for every run index and count successes; parallel and
/// sequential schedules produce the same count by construction.
fn count_successes<F>(config: &SimConfig, run_once: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if config.parallelism == 1 {
        (0..config.runs)
            .map(|idx| u64::from(run_once(&mut rng_stream(config.seed, idx))))
            .sum()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .expect("simulation thread pool");
        pool.install(|| {
            (0..config.runs)
                .into_par_iter()
                .map(|idx| u64::from(run_once(&mut rng_stream(config.seed, idx))))
                .sum()
        })
    }
}

fn estimate(successes: u64, config: &SimConfig) -> EmpiricalEstimate {
    let runs = config.runs;
    let p_hat = successes as f64 / runs as f64;
    let stderr = (p_hat * (1.0 - p_hat) / runs as f64).sqrt();
    EmpiricalEstimate { p_hat, stderr, runs, seed: config.seed }
}

/// Monte Carlo estimate of the catch-up probability `Q(l, m, n)`.
pub fn simulate_race(
    query: &RaceQuery,
    share: &HashShare<f64>,
    config: &SimConfig,
) -> Result<EmpiricalEstimate> {
    let (l, m, n) = (query.l(), query.m(), query.n());
    let share = *share.value();
    let successes = count_successes(config, |rng| race_run(rng, l, m, n, share));
    Ok(estimate(successes, config))
}

/// Monte Carlo estimate of the time-restricted attack's success
/// probability.
pub fn simulate_attack(params: &AttackParams<f64>, config: &SimConfig) -> Result<EmpiricalEstimate> {
    let (share, depth_z, window_l) = (*params.share().value(), params.depth_z(), params.window_l());
    let successes = count_successes(config, |rng| attack_run(rng, share, depth_z, window_l));
    Ok(estimate(successes, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{
        catch_up_probability, table_for_race, tu_success_probability,
    };

    fn cfg(runs: u64, seed: u64) -> SimConfig {
        SimConfig::new(runs, seed, 1).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(matches!(SimConfig::new(0, 1, 1), Err(Error::ZeroRuns)));
        assert!(matches!(SimConfig::new(1, 1, 0), Err(Error::ZeroParallelism)));
        assert!(SimConfig::new(1, 0, 8).is_ok());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut rng = rng_stream(7, 3);
            (0..1000).map(|_| rng.random::<u64>()).collect()
        };
        let b: Vec<u64> = {
            let mut rng = rng_stream(7, 3);
            (0..1000).map(|_| rng.random::<u64>()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut rng = rng_stream(7, 4);
            (0..64).map(|_| rng.random::<u64>()).collect()
        };
        assert_ne!(&a[..64], &c[..]);
    }

    #[test]
    fn degenerate_races_are_exact() {
        // Already surpassed: every run succeeds.
        let q = RaceQuery::new(5, -1, 0).unwrap();
        let est = simulate_race(&q, &HashShare::new(0.3).unwrap(), &cfg(10_000, 1)).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.stderr, 0.0);
        // Powerless attacker: every run fails.
        let q = RaceQuery::new(5, 2, 0).unwrap();
        let est = simulate_race(&q, &HashShare::new(0.0).unwrap(), &cfg(10_000, 1)).unwrap();
        assert_eq!(est.p_hat, 0.0);
    }

    #[test]
    fn race_estimates_track_the_closed_form() {
        for (l, m, n, i) in [(1u32, 0i64, 0u32, 0.3f64), (2, 1, 0, 0.3), (7, 2, 1, 0.45)] {
            let query = RaceQuery::new(l, m, n).unwrap();
            let share = HashShare::new(i).unwrap();
            let table = table_for_race(&query);
            let exact = catch_up_probability(&query, &share, &table).unwrap().to_f64();
            let est = simulate_race(&query, &share, &cfg(10_000, 20_240_101)).unwrap();
            let sigma = est.stderr.max((exact * (1.0 - exact) / est.runs as f64).sqrt());
            assert!(
                (est.p_hat - exact).abs() <= 4.0 * sigma,
                "Q({l},{m},{n};{i}): estimate {} vs exact {exact} (sigma {sigma})",
                est.p_hat
            );
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)] // literal is the full expansion of 96536871/2^27
    fn attack_estimates_track_the_closed_form() {
        // I = 0: the attacker never mines a block, so every run fails.
        let params = AttackParams::new(HashShare::new(0.0).unwrap(), 4, 10).unwrap();
        let est = simulate_attack(&params, &cfg(1000, 5)).unwrap();
        assert_eq!(est.p_hat, 0.0);

        for (i, z, l, exact) in [
            (0.3f64, 0u32, 1u32, 0.216f64),
            (0.5, 4, 10, 0.719255737960338592529296875),
        ] {
            let params = AttackParams::new(HashShare::new(i).unwrap(), z, l).unwrap();
            let est = simulate_attack(&params, &cfg(10_000, 20_240_101)).unwrap();
            let sigma = est.stderr.max((exact * (1.0 - exact) / est.runs as f64).sqrt());
            assert!(
                (est.p_hat - exact).abs() <= 4.0 * sigma,
                "attack(I={i}, Z={z}, L={l}): estimate {} vs exact {exact}",
                est.p_hat
            );
        }
    }

    #[test]
    fn estimates_are_independent_of_parallelism() {
        let query = RaceQuery::new(6, 2, 0).unwrap();
        let share = HashShare::new(0.35).unwrap();
        let seq = simulate_race(&query, &share, &SimConfig::new(4000, 99, 1).unwrap()).unwrap();
        let par = simulate_race(&query, &share, &SimConfig::new(4000, 99, 8).unwrap()).unwrap();
        assert_eq!(seq, par);

        let params = AttackParams::new(share, 3, 8).unwrap();
        let seq = simulate_attack(&params, &SimConfig::new(4000, 99, 1).unwrap()).unwrap();
        let par = simulate_attack(&params, &SimConfig::new(4000, 99, 4).unwrap()).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn repeated_invocations_are_identical() {
        let params = AttackParams::new(HashShare::new(0.25).unwrap(), 2, 6).unwrap();
        let a = simulate_attack(&params, &cfg(5000, 42)).unwrap();
        let b = simulate_attack(&params, &cfg(5000, 42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wide_window_attack_approaches_the_unrestricted_limit() {
        // With the deadline far past mixing, the restricted attack's
        // frequency must sit in the unrestricted formula's confidence band.
        let share = HashShare::new(0.3).unwrap();
        let exact = tu_success_probability(&share, 2).unwrap().to_f64();
        let params = AttackParams::new(share, 2, 1000).unwrap();
        let est = simulate_attack(&params, &cfg(10_000, 7)).unwrap();
        let sigma = est.stderr.max((exact * (1.0 - exact) / est.runs as f64).sqrt());
        assert!(
            (est.p_hat - exact).abs() <= 4.0 * sigma,
            "estimate {} vs unrestricted limit {exact}",
            est.p_hat
        );
    }

    #[test]
    fn walk_step_displacements() {
        assert_eq!(WalkStep::Attacker.lag_delta(), -1);
        assert_eq!(WalkStep::Honest.lag_delta(), 1);
    }
}
