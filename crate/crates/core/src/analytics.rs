//! Closed-form probabilities of double-spending races.
//!
//! The model: an attacker holding hash share `I` secretly mines a conflicting
//! branch. After the target transaction gathers `Z` confirmations the
//! attacker's branch lags `m = Z + 1 - b` blocks behind (with `b` its secret
//! lead, negative-binomially distributed), and the attack succeeds if the
//! secret branch surpasses the honest branch — lag `-1` — before the honest
//! branch grows `L` blocks past confirmation. The catch-up phase is the
//! random walk `Q(l, m, n)`: probability of hitting lag `-1` from lag `m`
//! before the honest chain reaches `l` blocks, `n` of them already mined.
//!
//! `Q` has a closed form — a polynomial in `I` with lattice-walk counts as
//! coefficients (see [`crate::combinatorics`]) — plus an independent
//! dynamic-programming oracle over the walk recursion, used to validate the
//! closed form. On top of both sit the end-to-end success probabilities of
//! the time-restricted attack (deadline `L`) and the classical unrestricted
//! attack (infinite gambler's ruin), and a confirmation-depth recommender.
//!
//! Every operation is a pure function over immutable inputs and a read-only
//! [`CoefficientTable`]; all are generic over the numeric backend
//! ([`Scalar`]): compensated `f64` for production sweeps, exact
//! [`num_rational::BigRational`] for ground truth.

use crate::combinatorics::{binomial, CoefficientTable};
use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Deadlines above this are rejected by [`catch_up_oracle`]; the quadratic
/// DP is meant for validation, not production. Use
/// [`catch_up_oracle_with_cap`] to raise it deliberately.
pub const DEFAULT_ORACLE_CAP: u32 = 64;

/// The attacker's hash share: probability `I` in `[0, 1)` that the next
/// block mined network-wide is the attacker's. `I = 1` is rejected as
/// degenerate (every race would be won with certainty).
#[derive(Clone, Debug, PartialEq)]
pub struct HashShare<S: Scalar>(S);

impl<S: Scalar> HashShare<S> {
    pub fn new(value: S) -> Result<Self> {
        if value >= S::zero() && value < S::one() {
            Ok(Self(value))
        } else {
            Err(Error::ShareOutOfRange { value: value.to_f64() })
        }
    }

    pub fn value(&self) -> &S {
        &self.0
    }

    /// The honest side's share, `1 - I`.
    pub fn complement(&self) -> S {
        self.0.complement()
    }
}

/// A catch-up race state: honest-chain deadline `l >= 1`, attacker lag
/// `m >= -1` (`-1` means the attacker has already surpassed), and `n` honest
/// blocks already mined, `0 <= n <= l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RaceQuery {
    l: u32,
    m: i64,
    n: u32,
}

impl RaceQuery {
    pub fn new(l: u32, m: i64, n: u32) -> Result<Self> {
        let fail = |reason| Err(Error::InvalidRaceQuery { l, m, n, reason });
        if l < 1 {
            return fail("deadline l must be >= 1");
        }
        if m < -1 {
            return fail("lag m must be >= -1");
        }
        if n > l {
            return fail("elapsed honest blocks n must satisfy n <= l");
        }
        Ok(Self { l, m, n })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

/// Full attack parameters: hash share, confirmation depth `Z >= 0`, and the
/// attack window `L >= 1` (honest blocks past confirmation before the
/// attacker gives up).
///
/// `L = 0` is rejected rather than silently accepted: with no window the
/// catch-up race never starts and "success" would collapse to the
/// probability that the lead already exceeds `Z + 1` at confirmation.
#[derive(Clone, Debug)]
pub struct AttackParams<S: Scalar> {
    share: HashShare<S>,
    depth_z: u32,
    window_l: u32,
}

impl<S: Scalar> AttackParams<S> {
    pub fn new(share: HashShare<S>, depth_z: u32, window_l: u32) -> Result<Self> {
        if window_l < 1 {
            return Err(Error::EmptyWindow);
        }
        Ok(Self { share, depth_z, window_l })
    }

    pub fn share(&self) -> &HashShare<S> {
        &self.share
    }

    pub fn depth_z(&self) -> u32 {
        self.depth_z
    }

    pub fn window_l(&self) -> u32 {
        self.window_l
    }
}

/// A probability that has passed the backend's range policy: exact backends
/// prove `0 <= p <= 1`, the float backend additionally clamps sub-1e-12
/// round-off excursions (see [`Scalar::into_probability`]).
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Probability<S: Scalar>(S);

impl<S: Scalar> Probability<S> {
    pub fn new(value: S, context: &'static str) -> Result<Self> {
        value.into_probability(context).map(Self)
    }

    pub fn value(&self) -> &S {
        &self.0
    }

    pub fn into_inner(self) -> S {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

/// Distribution of the attacker's secret lead `b` at the moment of
/// confirmation, conditioned on confirmation happening: point masses for
/// `b = 0..=Z+1` and the lumped tail `b > Z+1` (attacker already ahead).
#[derive(Clone, Debug)]
pub struct LeadDistribution<S: Scalar> {
    depth_z: u32,
    pmf: Vec<Probability<S>>,
    tail: Probability<S>,
}

impl<S: Scalar> LeadDistribution<S> {
    pub fn depth_z(&self) -> u32 {
        self.depth_z
    }

    /// `Pr{b = k}` for `k = 0..=Z+1`.
    pub fn pmf(&self, k: u32) -> Result<&Probability<S>> {
        self.pmf
            .get(k as usize)
            .ok_or(Error::LeadIndexOutOfRange { k, max_k: self.depth_z + 1 })
    }

    /// All point masses, index = lead.
    pub fn masses(&self) -> &[Probability<S>] {
        &self.pmf
    }

    /// `Pr{b > Z+1}`.
    pub fn tail(&self) -> &Probability<S> {
        &self.tail
    }
}

/// `Pr{b = k}` — the negative-binomial mass `C(k+Z, k) I^k (1-I)^{Z+1}`:
/// the attacker mines exactly `k` blocks while the honest chain mines the
/// `Z + 1` blocks that confirm the transaction.
pub fn lead_pmf<S: Scalar>(share: &HashShare<S>, depth_z: u32, k: u32) -> Result<Probability<S>> {
    if k > depth_z + 1 {
        return Err(Error::LeadIndexOutOfRange { k, max_k: depth_z + 1 });
    }
    Ok(lead_pmf_unchecked(share, depth_z, k))
}

fn lead_pmf_unchecked<S: Scalar>(share: &HashShare<S>, depth_z: u32, k: u32) -> Probability<S> {
    let count = binomial(u64::from(k) + u64::from(depth_z), u64::from(k));
    let raw = S::count_term(&count, share.value(), k, &share.complement(), depth_z + 1);
    Probability::new(raw, "lead pmf").expect("negative-binomial mass is a probability")
}

/// `Pr{b > Z+1}` — the complement of the masses `k = 0..=Z+1`.
pub fn lead_tail<S: Scalar>(share: &HashShare<S>, depth_z: u32) -> Result<Probability<S>> {
    Ok(lead_distribution(share, depth_z)?.tail.clone())
}

/// The full lead distribution; the tail is formed as `1 - Σ pmf`, so the
/// normalization `tail + Σ pmf = 1` holds identically on the exact backend.
pub fn lead_distribution<S: Scalar>(share: &HashShare<S>, depth_z: u32) -> Result<LeadDistribution<S>> {
    let pmf: Vec<Probability<S>> =
        (0..=depth_z + 1).map(|k| lead_pmf_unchecked(share, depth_z, k)).collect();
    let mass = S::sum(pmf.iter().map(|p| p.value().clone()));
    let tail = Probability::new(mass.complement(), "lead tail")?;
    Ok(LeadDistribution { depth_z, pmf, tail })
}

/// The catch-up probability `Q(l, m, n)` in closed form:
/// `Σ_{i=0}^{l-n-1} a(i, m) (1-I)^i I^{m+1+i}` for `m >= 0, n < l`, where
/// `a(i, m)` counts the walks that first surpass after exactly `i` honest
/// blocks.
///
/// Boundary cases: `1` when `m = -1` (already surpassed — this takes
/// precedence when `n = l` too), `0` when `m >= 0, n = l` (time expired;
/// the lag-0 tie counts as failure — the branch never *surpassed*).
///
/// The table must cover `i <= l - n - 1, m`; see [`table_for_race`].
pub fn catch_up_probability<S: Scalar>(
    query: &RaceQuery,
    share: &HashShare<S>,
    table: &CoefficientTable,
) -> Result<Probability<S>> {
    if query.m == -1 {
        return Probability::new(S::one(), "catch-up closed form");
    }
    if query.n == query.l {
        return Probability::new(S::zero(), "catch-up closed form");
    }
    let m = query.m as usize;
    let comp = share.complement();
    let mut terms = Vec::with_capacity((query.l - query.n) as usize);
    for i in 0..=(query.l - query.n - 1) {
        let count = table.coefficient(i as usize, m)?;
        let loss_exp = u32::try_from(query.m + 1 + i64::from(i)).expect("lag exponent fits u32");
        terms.push(S::count_term(count, &comp, i, share.value(), loss_exp));
    }
    Probability::new(S::sum(terms.into_iter()), "catch-up closed form")
}

/// Per-term breakdown of the closed form: `(i, a(i, m), term value)` rows in
/// summation order, for auditing a result from the command line.
pub fn catch_up_breakdown<S: Scalar>(
    query: &RaceQuery,
    share: &HashShare<S>,
    table: &CoefficientTable,
) -> Result<Vec<(u32, crate::combinatorics::BigCount, S)>> {
    if query.m == -1 || query.n == query.l {
        return Ok(Vec::new());
    }
    let m = query.m as usize;
    let comp = share.complement();
    let mut rows = Vec::with_capacity((query.l - query.n) as usize);
    for i in 0..=(query.l - query.n - 1) {
        let count = table.coefficient(i as usize, m)?;
        let loss_exp = u32::try_from(query.m + 1 + i64::from(i)).expect("lag exponent fits u32");
        let term = S::count_term(count, &comp, i, share.value(), loss_exp);
        rows.push((i, count.clone(), term));
    }
    Ok(rows)
}

/// A [`CoefficientTable`] sized exactly for [`catch_up_probability`] on this
/// query.
pub fn table_for_race(query: &RaceQuery) -> CoefficientTable {
    let max_i = if query.m == -1 || query.n == query.l {
        0
    } else {
        (query.l - query.n - 1) as usize
    };
    CoefficientTable::new(max_i, query.m.max(0) as usize)
}

/// A [`CoefficientTable`] sized for [`tr_success_probability`] over any
/// depth up to `depth_z` with window `window_l`.
pub fn table_for_attack(window_l: u32, depth_z: u32) -> CoefficientTable {
    CoefficientTable::new(window_l.saturating_sub(1) as usize, (depth_z + 1) as usize)
}

/// Independent dynamic-programming oracle for `Q(l, m, n)` with the default
/// deadline cap.
pub fn catch_up_oracle<S: Scalar>(query: &RaceQuery, share: &HashShare<S>) -> Result<Probability<S>> {
    catch_up_oracle_with_cap(query, share, DEFAULT_ORACLE_CAP)
}

/// The DP oracle with an explicit deadline cap.
///
/// Evaluates the race recursion
/// `Q(l, m, n) = I * Q(l, m-1, n) + (1-I) * Q(l, m+1, n+1)` backward from
/// stage `l - 1` to stage `n`, two rolling rows at a time. At stage `s`
/// (honest blocks mined so far) only lags `0..=m + (s - n)` are kept: a
/// walk from `(m, n)` gains at most one lag per honest block, so higher lags
/// are unreachable from the query state and cannot influence the answer.
///
/// Runs in `O((l-n) * (m + l - n))` scalar operations and `O(m + l - n)`
/// memory — quadratic, hence the cap; it exists to cross-check the closed
/// form, not to replace it.
pub fn catch_up_oracle_with_cap<S: Scalar>(
    query: &RaceQuery,
    share: &HashShare<S>,
    cap: u32,
) -> Result<Probability<S>> {
    if query.l > cap {
        return Err(Error::OracleCapExceeded { l: query.l, cap });
    }
    if query.m == -1 {
        return Probability::new(S::one(), "catch-up race oracle");
    }
    if query.n == query.l {
        return Probability::new(S::zero(), "catch-up race oracle");
    }
    let m = query.m as usize;
    let i_win = share.value();
    let comp = share.complement();

    // `next` holds stage s+1 (index = lag); stage l itself is all failures,
    // covered by the `s + 1 == l` branch.
    let mut next: Vec<S> = Vec::new();
    for s in (query.n..query.l).rev() {
        let lag_cap = m + (s - query.n) as usize;
        let mut cur: Vec<S> = Vec::with_capacity(lag_cap + 1);
        for lag in 0..=lag_cap {
            // Attacker block: lag drops; lag 0 drops to -1 and wins outright.
            let after_attacker = if lag == 0 { S::one() } else { cur[lag - 1].clone() };
            // Honest block: lag rises, one more honest block on the clock.
            let after_honest = if s + 1 == query.l { S::zero() } else { next[lag + 1].clone() };
            cur.push(i_win.mul(&after_attacker).add(&comp.mul(&after_honest)));
        }
        next = cur;
    }
    Probability::new(next[m].clone(), "catch-up race oracle")
}

/// The unrestricted catch-up probability — the `l -> infinity` limit of `Q`:
/// `(I / (1-I))^{m+1}` for `I < 1/2`, else `1`. Classical infinite
/// gambler's ruin; the certain branch is taken exactly rather than through a
/// vanishing bracket.
pub fn tu_catch_up_probability<S: Scalar>(m: i64, share: &HashShare<S>) -> Result<Probability<S>> {
    if m < -1 {
        return Err(Error::InvalidLag { m });
    }
    if share.value().at_least_half() {
        return Probability::new(S::one(), "unrestricted catch-up");
    }
    let exp = u32::try_from(m + 1).expect("lag exponent fits u32");
    let raw = S::ratio_power(share.value(), &share.complement(), exp);
    Probability::new(raw, "unrestricted catch-up")
}

/// Success probability of the time-restricted attack: the lead distribution
/// at confirmation composed with the catch-up race under deadline `L`,
/// `Pr{b > Z+1} + Σ_{k=0}^{Z+1} Pr{b = k} Q(L, Z+1-k, 0)`.
///
/// The table must cover `i <= L - 1, m <= Z + 1`; see [`table_for_attack`].
pub fn tr_success_probability<S: Scalar>(
    params: &AttackParams<S>,
    table: &CoefficientTable,
) -> Result<Probability<S>> {
    let lead = lead_distribution(params.share(), params.depth_z)?;
    let mut terms = Vec::with_capacity(lead.masses().len() + 1);
    terms.push(lead.tail().value().clone());
    for (k, mass) in lead.masses().iter().enumerate() {
        let m = i64::from(params.depth_z) + 1 - k as i64;
        let query = RaceQuery::new(params.window_l, m, 0).expect("race query from attack params");
        let q = catch_up_probability(&query, params.share(), table)?;
        terms.push(mass.value().mul(q.value()));
    }
    Probability::new(S::sum(terms.into_iter()), "time-restricted attack success")
}

/// Success probability of the classical unrestricted attack:
/// `1 - Σ_{k=0}^{Z+1} C(k+Z, k) I^k (1-I)^{Z+1} [1 - (I/(1-I))^{Z+2-k}]`
/// for `I < 1/2`; exactly `1` for `I >= 1/2` (every bracket vanishes in the
/// limit — returned by branch to keep float noise out of certainty).
pub fn tu_success_probability<S: Scalar>(share: &HashShare<S>, depth_z: u32) -> Result<Probability<S>> {
    if share.value().at_least_half() {
        return Probability::new(S::one(), "unrestricted attack success");
    }
    let comp = share.complement();
    let mut terms = Vec::with_capacity((depth_z + 2) as usize);
    for k in 0..=depth_z + 1 {
        let count = binomial(u64::from(k) + u64::from(depth_z), u64::from(k));
        let mass = S::count_term(&count, share.value(), k, &comp, depth_z + 1);
        let bracket = S::ratio_power(share.value(), &comp, depth_z + 2 - k).complement();
        terms.push(mass.mul(&bracket));
    }
    Probability::new(S::sum(terms.into_iter()).complement(), "unrestricted attack success")
}

/// One scanned row plus the verdict of [`min_confirmation_depth`].
#[derive(Clone, Debug)]
pub struct DepthScan<S: Scalar> {
    /// `(Z, P_tr(Z))` for every `Z = 0..=z_max`, in order.
    pub rows: Vec<(u32, Probability<S>)>,
    /// Smallest scanned `Z` whose success probability is at or below the
    /// threshold, if any.
    pub recommended: Option<u32>,
}

impl<S: Scalar> DepthScan<S> {
    /// Whether the scan observed the success probability *rising* between
    /// consecutive depths — the high-share regime where more confirmations
    /// help the attacker, worth surfacing to callers as a warning.
    pub fn has_increase(&self) -> bool {
        self.rows.windows(2).any(|w| w[1].1 > w[0].1)
    }
}

/// Smallest confirmation depth `Z <= z_max` keeping the time-restricted
/// attack's success probability at or below `threshold`.
///
/// Scans every depth `0..=z_max` with no early exit: the success probability
/// is not monotone in `Z` at high hash shares, so the first local rise says
/// nothing about later depths. The full trace is returned either way.
///
/// The table must cover `i <= window_l - 1, m <= z_max + 1`.
pub fn min_confirmation_depth<S: Scalar>(
    share: &HashShare<S>,
    window_l: u32,
    threshold: &S,
    z_max: u32,
    table: &CoefficientTable,
) -> Result<DepthScan<S>> {
    if !(*threshold > S::zero() && *threshold < S::one()) {
        return Err(Error::InvalidThreshold { value: threshold.to_f64() });
    }
    let mut rows = Vec::with_capacity((z_max + 1) as usize);
    let mut recommended = None;
    for z in 0..=z_max {
        let params = AttackParams::new(share.clone(), z, window_l)?;
        let p = tr_success_probability(&params, table)?;
        if recommended.is_none() && *p.value() <= *threshold {
            recommended = Some(z);
        }
        rows.push((z, p));
    }
    Ok(DepthScan { rows, recommended })
}

/// Naive expected attacker reward `p_success * value - sunk_cost`.
///
/// Deliberately simplistic (no block rewards, fees, or difficulty effects);
/// inputs are assumed nonnegative.
pub fn expected_reward(p_success: f64, value: f64, sunk_cost: f64) -> f64 {
    p_success * value - sunk_cost
}
