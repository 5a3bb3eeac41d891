//! Implementations of the single-query, simulation, and recommendation
//! commands.

use std::io::Write;

use forkrace::analytics::{
    catch_up_breakdown, catch_up_probability, lead_distribution, min_confirmation_depth,
    table_for_attack, table_for_race, tr_success_probability, tu_success_probability,
    AttackParams, HashShare, RaceQuery,
};
use forkrace::numeric::{big_rational_to_f64, rational_from_decimal, Scalar};
use forkrace::simulator::{simulate_attack, simulate_race, EmpiricalEstimate, SimConfig};
use num_rational::BigRational;

use crate::args::{
    Backend, LeadArgs, QArgs, RecommendArgs, SimulateAttackArgs, SimulateRaceArgs, TrArgs, TuArgs,
};
use crate::output::{resolve_parallelism, resolve_seed, CliError, CliResult};

/// Human-facing rendering of a backend value: floats print their shortest
/// round-trip form; rationals print the exact fraction with a decimal
/// approximation alongside.
pub trait DisplayValue: Scalar {
    fn value_line(&self) -> String;
}

impl DisplayValue for f64 {
    fn value_line(&self) -> String {
        format!("{self}")
    }
}

impl DisplayValue for BigRational {
    fn value_line(&self) -> String {
        if self.is_integer() {
            format!("{self}")
        } else {
            format!("{self} (~{})", big_rational_to_f64(self))
        }
    }
}

/// Parse a share argument ("0.3", ".5", or "3/10") into an exact rational.
fn parse_share_rational(raw: &str) -> CliResult<HashShare<BigRational>> {
    let r = rational_from_decimal(raw).ok_or_else(|| {
        CliError::validation(format!(
            "hash share must be a decimal like 0.3 or a fraction like 3/10, got {raw:?}"
        ))
    })?;
    Ok(HashShare::new(r)?)
}

/// Parse a share argument into the float backend (via the exact parse, so
/// fractions round correctly).
fn parse_share_f64(raw: &str) -> CliResult<HashShare<f64>> {
    let r = rational_from_decimal(raw).ok_or_else(|| {
        CliError::validation(format!(
            "hash share must be a decimal like 0.3 or a fraction like 3/10, got {raw:?}"
        ))
    })?;
    Ok(HashShare::new(big_rational_to_f64(&r))?)
}

pub fn cmd_q(args: &QArgs, w: &mut impl Write) -> CliResult<()> {
    match args.backend {
        Backend::Float => q_generic(parse_share_f64(&args.share)?, args, w),
        Backend::Rational => q_generic(parse_share_rational(&args.share)?, args, w),
    }
}

fn q_generic<S: DisplayValue>(share: HashShare<S>, args: &QArgs, w: &mut impl Write) -> CliResult<()> {
    let query = RaceQuery::new(args.l, args.m, args.n)?;
    let table = table_for_race(&query);
    if args.verbose {
        writeln!(w, "i\twalk_count\tterm")?;
        for (i, count, term) in catch_up_breakdown(&query, &share, &table)? {
            writeln!(w, "{i}\t{count}\t{}", term.value_line())?;
        }
    }
    let p = catch_up_probability(&query, &share, &table)?;
    writeln!(w, "{}", p.value().value_line())?;
    Ok(())
}

pub fn cmd_tr(args: &TrArgs, w: &mut impl Write) -> CliResult<()> {
    match args.backend {
        Backend::Float => tr_generic(parse_share_f64(&args.share)?, args, w),
        Backend::Rational => tr_generic(parse_share_rational(&args.share)?, args, w),
    }
}

fn tr_generic<S: DisplayValue>(share: HashShare<S>, args: &TrArgs, w: &mut impl Write) -> CliResult<()> {
    let params = AttackParams::new(share.clone(), args.z, args.window)?;
    let table = table_for_attack(args.window, args.z);
    if args.verbose {
        let lead = lead_distribution(&share, args.z)?;
        writeln!(w, "lead_k\tpr_lead\tlag_m\tq_catch_up\tcontribution")?;
        for (k, mass) in lead.masses().iter().enumerate() {
            let m = i64::from(args.z) + 1 - k as i64;
            let query = RaceQuery::new(args.window, m, 0)?;
            let q = catch_up_probability(&query, &share, &table)?;
            let contribution = mass.value().mul(q.value());
            writeln!(
                w,
                "{k}\t{}\t{m}\t{}\t{}",
                mass.value().value_line(),
                q.value().value_line(),
                contribution.value_line()
            )?;
        }
        writeln!(w, "tail\t{}\t-\t1\t{}", lead.tail().value().value_line(), lead.tail().value().value_line())?;
    }
    let p = tr_success_probability(&params, &table)?;
    writeln!(w, "{}", p.value().value_line())?;
    Ok(())
}

pub fn cmd_tu(args: &TuArgs, w: &mut impl Write) -> CliResult<()> {
    match args.backend {
        Backend::Float => {
            let share = parse_share_f64(&args.share)?;
            let p = tu_success_probability(&share, args.z)?;
            writeln!(w, "{}", p.value().value_line())?;
        }
        Backend::Rational => {
            let share = parse_share_rational(&args.share)?;
            let p = tu_success_probability(&share, args.z)?;
            writeln!(w, "{}", p.value().value_line())?;
        }
    }
    Ok(())
}

pub fn cmd_lead(args: &LeadArgs, w: &mut impl Write) -> CliResult<()> {
    match args.backend {
        Backend::Float => lead_generic(parse_share_f64(&args.share)?, args, w),
        Backend::Rational => lead_generic(parse_share_rational(&args.share)?, args, w),
    }
}

fn lead_generic<S: DisplayValue>(share: HashShare<S>, args: &LeadArgs, w: &mut impl Write) -> CliResult<()> {
    let lead = lead_distribution(&share, args.z)?;
    writeln!(w, "lead_k\tpr_lead")?;
    for (k, mass) in lead.masses().iter().enumerate() {
        writeln!(w, "{k}\t{}", mass.value().value_line())?;
    }
    writeln!(w, ">{}\t{}", args.z + 1, lead.tail().value().value_line())?;
    Ok(())
}

fn write_estimate(est: &EmpiricalEstimate, w: &mut impl Write) -> CliResult<()> {
    writeln!(w, "p_hat {}", est.p_hat)?;
    writeln!(w, "stderr {}", est.stderr)?;
    writeln!(w, "runs {}", est.runs)?;
    writeln!(w, "seed {}", est.seed)?;
    Ok(())
}

pub fn cmd_simulate_race(args: &SimulateRaceArgs, w: &mut impl Write) -> CliResult<()> {
    let share = parse_share_f64(&args.share)?;
    let query = RaceQuery::new(args.l, args.m, args.n)?;
    let config = SimConfig::new(
        args.runs,
        resolve_seed(args.seed),
        resolve_parallelism(args.parallelism)?,
    )?;
    write_estimate(&simulate_race(&query, &share, &config)?, w)
}

pub fn cmd_simulate_attack(args: &SimulateAttackArgs, w: &mut impl Write) -> CliResult<()> {
    let share = parse_share_f64(&args.share)?;
    let params = AttackParams::new(share, args.z, args.window)?;
    let config = SimConfig::new(
        args.runs,
        resolve_seed(args.seed),
        resolve_parallelism(args.parallelism)?,
    )?;
    write_estimate(&simulate_attack(&params, &config)?, w)
}

pub fn cmd_recommend_z(args: &RecommendArgs, w: &mut impl Write) -> CliResult<()> {
    let share = parse_share_f64(&args.share)?;
    let table = table_for_attack(args.window, args.z_max);
    let scan = min_confirmation_depth(&share, args.window, &args.threshold, args.z_max, &table)?;
    writeln!(w, "z\tp_tr")?;
    for (z, p) in &scan.rows {
        writeln!(w, "{z}\t{}", p.value().value_line())?;
    }
    if scan.has_increase() {
        writeln!(
            w,
            "warning: success probability rises with depth over part of this scan \
             (high attacker share); adding confirmations does not always reduce risk"
        )?;
    }
    match scan.recommended {
        Some(z) => {
            writeln!(w, "recommended_z {z}")?;
            Ok(())
        }
        None => Err(CliError::no_solution(format!(
            "no confirmation depth <= {} keeps the attack's success probability at or below {}",
            args.z_max, args.threshold
        ))),
    }
}
