//! Parameter sweeps: the JSON-loadable spec, its validation, the evaluation
//! loop, and CSV/JSON emission with atomic file output.

use std::io::{self, Write};
use std::path::Path;

use forkrace::analytics::{
    catch_up_probability, lead_pmf, table_for_attack, tr_success_probability,
    tu_catch_up_probability, tu_success_probability, AttackParams, HashShare, RaceQuery,
};
use forkrace::combinatorics::CoefficientTable;
use forkrace::simulator::{simulate_attack, simulate_race, SimConfig};
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::output::{fmt12, resolve_parallelism, resolve_seed, CliError, CliResult};

/// What a sweep evaluates at each axis point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Catch-up probability Q(l, m, n).
    Q,
    /// Time-restricted attack success (emits the unrestricted value
    /// alongside, since every figure comparing the two needs both).
    PTr,
    /// Unrestricted attack success.
    PTu,
    /// One point mass of the lead distribution.
    LeadPmf,
}

/// The parameter being swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ShareI,
    DepthZ,
    WindowL,
    LagM,
    ElapsedN,
    LeadK,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::ShareI => "share_i",
            Axis::DepthZ => "depth_z",
            Axis::WindowL => "window_l",
            Axis::LagM => "lag_m",
            Axis::ElapsedN => "elapsed_n",
            Axis::LeadK => "lead_k",
        }
    }
}

/// Values for the parameters a sweep holds constant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedBindings {
    pub share_i: Option<f64>,
    pub depth_z: Option<u32>,
    pub window_l: Option<u32>,
    pub lag_m: Option<i64>,
    pub elapsed_n: Option<u32>,
    pub lead_k: Option<u32>,
}

/// Simulation settings carried inside a spec file; command-line flags
/// override them field by field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
}

/// One sweep: evaluate `target` at every `values` point of `axis`, all
/// other parameters bound by `fixed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: Target,
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub fixed: FixedBindings,
    /// Attach Monte Carlo columns (valid for `q` and `p_tr` targets).
    #[serde(default)]
    pub with_simulation: bool,
    #[serde(default)]
    pub sim: Option<SimSettings>,
    /// For the `q` target: also emit the deadline-free limit of Q as a
    /// `q_limit` column.
    #[serde(default)]
    pub include_limit: bool,
}

/// Command-line overrides applied on top of every spec in the sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOverrides {
    pub with_sim: bool,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
}

/// One emitted value with its type, so CSV and JSON render it consistently
/// (floats: 12 significant digits in CSV, numbers in JSON).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    UInt(u64),
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Float(v) => fmt12(v),
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(v)
                .map(serde_json::Value::Number)
                .expect("emitted floats are finite"),
            Cell::Int(v) => serde_json::Value::from(v),
            Cell::UInt(v) => serde_json::Value::from(v),
        }
    }
}

/// A fully evaluated sweep, ready for emission.
#[derive(Debug)]
pub struct SweepRun {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Load one spec object or an array of them from JSON text.
pub fn parse_spec_file(text: &str) -> CliResult<Vec<SweepSpec>> {
    let trimmed = text.trim_start();
    let specs: Vec<SweepSpec> = if trimmed.starts_with('[') {
        serde_json::from_str(text)
            .map_err(|e| CliError::validation(format!("invalid sweep spec file: {e}")))?
    } else {
        vec![serde_json::from_str(text)
            .map_err(|e| CliError::validation(format!("invalid sweep spec file: {e}")))?]
    };
    if specs.is_empty() {
        return Err(CliError::validation("sweep spec file holds no specs"));
    }
    Ok(specs)
}

/// The parameters a target requires (axis or fixed, never both).
fn required_params(target: Target) -> &'static [Axis] {
    match target {
        Target::Q => &[Axis::ShareI, Axis::WindowL, Axis::LagM, Axis::ElapsedN],
        Target::PTr => &[Axis::ShareI, Axis::DepthZ, Axis::WindowL],
        Target::PTu => &[Axis::ShareI, Axis::DepthZ],
        Target::LeadPmf => &[Axis::ShareI, Axis::DepthZ, Axis::LeadK],
    }
}

fn binding_present(fixed: &FixedBindings, param: Axis) -> bool {
    match param {
        Axis::ShareI => fixed.share_i.is_some(),
        Axis::DepthZ => fixed.depth_z.is_some(),
        Axis::WindowL => fixed.window_l.is_some(),
        Axis::LagM => fixed.lag_m.is_some(),
        Axis::ElapsedN => fixed.elapsed_n.is_some(),
        Axis::LeadK => fixed.lead_k.is_some(),
    }
}

/// Domain check for one axis value.
fn check_axis_value(axis: Axis, v: f64) -> CliResult<()> {
    if !v.is_finite() {
        return Err(CliError::validation(format!("axis {} value must be finite", axis.name())));
    }
    match axis {
        Axis::ShareI => {
            if !(0.0..1.0).contains(&v) {
                return Err(CliError::validation(format!(
                    "axis share_i value {v} outside [0, 1)"
                )));
            }
        }
        Axis::LagM => {
            check_integral(axis, v)?;
            if v < -1.0 {
                return Err(CliError::validation(format!("axis lag_m value {v} below -1")));
            }
        }
        Axis::WindowL => {
            check_integral(axis, v)?;
            if v < 1.0 {
                return Err(CliError::validation(format!("axis window_l value {v} below 1")));
            }
        }
        Axis::DepthZ | Axis::ElapsedN | Axis::LeadK => {
            check_integral(axis, v)?;
            if v < 0.0 {
                return Err(CliError::validation(format!(
                    "axis {} value {v} below 0",
                    axis.name()
                )));
            }
        }
    }
    Ok(())
}

fn check_integral(axis: Axis, v: f64) -> CliResult<()> {
    if v.fract() != 0.0 || v.abs() > 2f64.powi(32) {
        return Err(CliError::validation(format!(
            "axis {} value {v} must be a small integer",
            axis.name()
        )));
    }
    Ok(())
}

/// Structural validation of one spec: axis fits the target, values are
/// strictly increasing and in domain, fixed bindings cover exactly the
/// non-axis parameters, and the option flags fit the target.
pub fn validate_spec(spec: &SweepSpec) -> CliResult<()> {
    let required = required_params(spec.target);
    if !required.contains(&spec.axis) {
        return Err(CliError::validation(format!(
            "axis {} is not a parameter of this target",
            spec.axis.name()
        )));
    }
    if spec.values.is_empty() {
        return Err(CliError::validation("axis values must be non-empty"));
    }
    for &v in &spec.values {
        check_axis_value(spec.axis, v)?;
    }
    if !spec.values.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::validation("axis values must be strictly increasing"));
    }
    for &param in required {
        let bound = binding_present(&spec.fixed, param);
        if param == spec.axis && bound {
            return Err(CliError::validation(format!(
                "parameter {} is both the axis and a fixed binding",
                param.name()
            )));
        }
        if param != spec.axis && !bound {
            return Err(CliError::validation(format!(
                "fixed bindings must cover parameter {}",
                param.name()
            )));
        }
    }
    for param in [
        Axis::ShareI,
        Axis::DepthZ,
        Axis::WindowL,
        Axis::LagM,
        Axis::ElapsedN,
        Axis::LeadK,
    ] {
        if !required.contains(&param) && binding_present(&spec.fixed, param) {
            return Err(CliError::validation(format!(
                "parameter {} is not used by this target",
                param.name()
            )));
        }
    }
    if let Some(share) = spec.fixed.share_i {
        if !(0.0..1.0).contains(&share) {
            return Err(CliError::validation(format!("fixed share_i {share} outside [0, 1)")));
        }
    }
    if let Some(m) = spec.fixed.lag_m {
        if m < -1 {
            return Err(CliError::validation(format!("fixed lag_m {m} below -1")));
        }
    }
    if spec.fixed.window_l == Some(0) {
        return Err(CliError::validation("fixed window_l must be >= 1"));
    }
    if spec.with_simulation && !matches!(spec.target, Target::Q | Target::PTr) {
        return Err(CliError::validation(
            "simulation columns are only available for the q and p_tr targets",
        ));
    }
    if spec.include_limit && spec.target != Target::Q {
        return Err(CliError::validation(
            "include_limit only applies to the q target",
        ));
    }
    Ok(())
}

fn columns_for(spec: &SweepSpec, with_sim: bool) -> Vec<&'static str> {
    let mut cols: Vec<&'static str> = match spec.target {
        Target::Q => vec!["share_i", "window_l", "lag_m", "elapsed_n", "q_closed"],
        Target::PTr => vec!["share_i", "depth_z", "window_l", "p_tr", "p_tu"],
        Target::PTu => vec!["share_i", "depth_z", "p_tu"],
        Target::LeadPmf => vec!["share_i", "depth_z", "lead_k", "lead_pmf"],
    };
    if spec.include_limit {
        cols.push("q_limit");
    }
    if with_sim {
        cols.extend(["p_hat", "stderr", "runs", "seed"]);
    }
    cols
}

/// Per-row parameter bindings after merging the axis value in.
#[derive(Debug, Clone, Copy)]
struct Binding {
    share_i: f64,
    depth_z: u32,
    window_l: u32,
    lag_m: i64,
    elapsed_n: u32,
    lead_k: u32,
}

fn bind_row(spec: &SweepSpec, value: f64) -> Binding {
    let f = &spec.fixed;
    let mut b = Binding {
        share_i: f.share_i.unwrap_or(0.0),
        depth_z: f.depth_z.unwrap_or(0),
        window_l: f.window_l.unwrap_or(1),
        lag_m: f.lag_m.unwrap_or(0),
        elapsed_n: f.elapsed_n.unwrap_or(0),
        lead_k: f.lead_k.unwrap_or(0),
    };
    match spec.axis {
        Axis::ShareI => b.share_i = value,
        Axis::DepthZ => b.depth_z = value as u32,
        Axis::WindowL => b.window_l = value as u32,
        Axis::LagM => b.lag_m = value as i64,
        Axis::ElapsedN => b.elapsed_n = value as u32,
        Axis::LeadK => b.lead_k = value as u32,
    }
    b
}

/// Largest value a parameter takes across the sweep, for table sizing.
fn param_max(spec: &SweepSpec, param: Axis) -> i64 {
    if spec.axis == param {
        spec.values.last().copied().unwrap_or(0.0) as i64
    } else {
        match param {
            Axis::ShareI => 0,
            Axis::DepthZ => spec.fixed.depth_z.unwrap_or(0) as i64,
            Axis::WindowL => spec.fixed.window_l.unwrap_or(1) as i64,
            Axis::LagM => spec.fixed.lag_m.unwrap_or(0),
            Axis::ElapsedN => spec.fixed.elapsed_n.unwrap_or(0) as i64,
            Axis::LeadK => spec.fixed.lead_k.unwrap_or(0) as i64,
        }
    }
}

fn effective_sim(spec: &SweepSpec, overrides: &SimOverrides, fallback_seed: u64) -> CliResult<SimConfig> {
    let file = spec.sim.unwrap_or_default();
    let runs = overrides.runs.or(file.runs).unwrap_or(10_000);
    let seed = overrides.seed.or(file.seed).unwrap_or(fallback_seed);
    let parallelism = resolve_parallelism(overrides.parallelism.or(file.parallelism))?;
    Ok(SimConfig::new(runs, seed, parallelism)?)
}

/// Evaluate a list of specs into one row stream. All specs must emit the
/// same column set — rows of different shapes cannot share one table.
pub fn run_sweep(specs: &[SweepSpec], overrides: &SimOverrides) -> CliResult<SweepRun> {
    // One fallback seed for the whole sweep, so an unseeded sweep is still
    // internally consistent and fully reported by its seed column.
    let fallback_seed = resolve_seed(overrides.seed);
    let mut columns: Option<Vec<&'static str>> = None;
    let mut rows = Vec::new();
    for spec in specs {
        validate_spec(spec)?;
        let with_sim = spec.with_simulation || overrides.with_sim;
        if with_sim && !matches!(spec.target, Target::Q | Target::PTr) {
            return Err(CliError::validation(
                "simulation columns are only available for the q and p_tr targets",
            ));
        }
        let cols = columns_for(spec, with_sim);
        match &columns {
            None => columns = Some(cols),
            Some(existing) if *existing == cols => {}
            Some(_) => {
                return Err(CliError::validation(
                    "column set must be constant within one sweep; split differing specs \
                     into separate invocations",
                ));
            }
        }
        let sim = if with_sim { Some(effective_sim(spec, overrides, fallback_seed)?) } else { None };
        evaluate_spec(spec, sim, &mut rows)?;
    }
    Ok(SweepRun { columns: columns.expect("at least one spec"), rows })
}

fn evaluate_spec(
    spec: &SweepSpec,
    sim: Option<SimConfig>,
    rows: &mut Vec<Vec<Cell>>,
) -> CliResult<()> {
    // One coefficient table sized for the whole spec, not per row.
    let table = match spec.target {
        Target::Q => {
            let max_l = param_max(spec, Axis::WindowL).max(1) as u32;
            let max_m = param_max(spec, Axis::LagM).max(0) as usize;
            CoefficientTable::new(max_l.saturating_sub(1) as usize, max_m)
        }
        Target::PTr => {
            let max_l = param_max(spec, Axis::WindowL).max(1) as u32;
            let max_z = param_max(spec, Axis::DepthZ).max(0) as u32;
            table_for_attack(max_l, max_z)
        }
        Target::PTu | Target::LeadPmf => CoefficientTable::new(0, 0),
    };

    for &value in &spec.values {
        let b = bind_row(spec, value);
        let share = HashShare::new(b.share_i)?;
        let mut cells: Vec<Cell> = Vec::new();
        match spec.target {
            Target::Q => {
                let query = RaceQuery::new(b.window_l, b.lag_m, b.elapsed_n)?;
                let q = catch_up_probability(&query, &share, &table)?;
                cells.extend([
                    Cell::Float(b.share_i),
                    Cell::UInt(b.window_l.into()),
                    Cell::Int(b.lag_m),
                    Cell::UInt(b.elapsed_n.into()),
                    Cell::Float(q.to_f64()),
                ]);
                if spec.include_limit {
                    let limit = tu_catch_up_probability(b.lag_m, &share)?;
                    cells.push(Cell::Float(limit.to_f64()));
                }
                if let Some(config) = sim {
                    let est = simulate_race(&query, &share, &config)?;
                    cells.extend([
                        Cell::Float(est.p_hat),
                        Cell::Float(est.stderr),
                        Cell::UInt(est.runs),
                        Cell::UInt(est.seed),
                    ]);
                }
            }
            Target::PTr => {
                let params = AttackParams::new(share.clone(), b.depth_z, b.window_l)?;
                let p_tr = tr_success_probability(&params, &table)?;
                let p_tu = tu_success_probability(&share, b.depth_z)?;
                cells.extend([
                    Cell::Float(b.share_i),
                    Cell::UInt(b.depth_z.into()),
                    Cell::UInt(b.window_l.into()),
                    Cell::Float(p_tr.to_f64()),
                    Cell::Float(p_tu.to_f64()),
                ]);
                if let Some(config) = sim {
                    let est = simulate_attack(&params, &config)?;
                    cells.extend([
                        Cell::Float(est.p_hat),
                        Cell::Float(est.stderr),
                        Cell::UInt(est.runs),
                        Cell::UInt(est.seed),
                    ]);
                }
            }
            Target::PTu => {
                let p = tu_success_probability(&share, b.depth_z)?;
                cells.extend([
                    Cell::Float(b.share_i),
                    Cell::UInt(b.depth_z.into()),
                    Cell::Float(p.to_f64()),
                ]);
            }
            Target::LeadPmf => {
                let p = lead_pmf(&share, b.depth_z, b.lead_k)?;
                cells.extend([
                    Cell::Float(b.share_i),
                    Cell::UInt(b.depth_z.into()),
                    Cell::UInt(b.lead_k.into()),
                    Cell::Float(p.to_f64()),
                ]);
            }
        }
        rows.push(cells);
    }
    Ok(())
}

/// Write the run as CSV (12-significant-digit floats) or JSON (an array of
/// objects with the same keys as the CSV columns).
pub fn write_run(run: &SweepRun, format: Format, w: &mut impl Write) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(w);
            writer
                .write_record(&run.columns)
                .and_then(|()| {
                    run.rows.iter().try_for_each(|row| {
                        writer.write_record(row.iter().map(|c| c.csv()))
                    })
                })
                .and_then(|()| writer.flush().map_err(csv::Error::from))
                .map_err(|e| CliError::validation(format!("cannot write csv: {e}")))?;
        }
        Format::Json => {
            let objects: Vec<serde_json::Value> = run
                .rows
                .iter()
                .map(|row| {
                    run.columns
                        .iter()
                        .zip(row)
                        .map(|(name, cell)| (name.to_string(), cell.json()))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            serde_json::to_writer_pretty(&mut *w, &objects)
                .map_err(|e| CliError::validation(format!("cannot write json: {e}")))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Emit to standard output, or atomically to a file: the content is written
/// to a temporary file in the destination directory and renamed into place,
/// so a failed run never leaves partial output.
pub fn emit(run: &SweepRun, format: Format, out: Option<&Path>) -> CliResult<()> {
    match out {
        None => {
            let stdout = io::stdout();
            write_run(run, format, &mut stdout.lock())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| {
                CliError::validation(format!("cannot create temp file in {}: {e}", dir.display()))
            })?;
            write_run(run, format, &mut tmp)?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| {
                CliError::validation(format!("cannot write {}: {}", path.display(), e.error))
            })?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_spec() -> SweepSpec {
        SweepSpec {
            target: Target::Q,
            axis: Axis::LagM,
            values: vec![1.0, 2.0, 3.0],
            fixed: FixedBindings {
                share_i: Some(0.3),
                window_l: Some(5),
                elapsed_n: Some(0),
                ..Default::default()
            },
            with_simulation: false,
            sim: None,
            include_limit: false,
        }
    }

    #[test]
    fn valid_spec_passes() {
        validate_spec(&q_spec()).unwrap();
    }

    #[test]
    fn unsorted_values_are_rejected() {
        let mut spec = q_spec();
        spec.values = vec![2.0, 1.0];
        assert!(validate_spec(&spec).is_err());
        spec.values = vec![1.0, 1.0];
        assert!(validate_spec(&spec).is_err());
    }

    #[test]
    fn missing_and_double_bindings_are_rejected() {
        let mut spec = q_spec();
        spec.fixed.elapsed_n = None;
        assert!(validate_spec(&spec).unwrap_err().message.contains("elapsed_n"));

        let mut spec = q_spec();
        spec.fixed.lag_m = Some(4);
        assert!(validate_spec(&spec).unwrap_err().message.contains("lag_m"));

        let mut spec = q_spec();
        spec.fixed.depth_z = Some(3);
        assert!(validate_spec(&spec).unwrap_err().message.contains("depth_z"));
    }

    #[test]
    fn option_flags_must_fit_the_target() {
        let spec = SweepSpec {
            target: Target::PTu,
            axis: Axis::DepthZ,
            values: vec![0.0, 1.0],
            fixed: FixedBindings { share_i: Some(0.2), ..Default::default() },
            with_simulation: true,
            sim: None,
            include_limit: false,
        };
        assert!(validate_spec(&spec).unwrap_err().message.contains("simulation"));

        let mut spec = q_spec();
        spec.include_limit = true;
        validate_spec(&spec).unwrap();
        let spec = SweepSpec {
            target: Target::PTr,
            axis: Axis::DepthZ,
            values: vec![0.0, 1.0],
            fixed: FixedBindings {
                share_i: Some(0.2),
                window_l: Some(5),
                ..Default::default()
            },
            with_simulation: false,
            sim: None,
            include_limit: true,
        };
        assert!(validate_spec(&spec).unwrap_err().message.contains("include_limit"));
    }

    #[test]
    fn out_of_domain_axis_values_are_rejected() {
        let spec = SweepSpec {
            target: Target::PTu,
            axis: Axis::ShareI,
            values: vec![0.5, 1.0],
            fixed: FixedBindings { depth_z: Some(2), ..Default::default() },
            with_simulation: false,
            sim: None,
            include_limit: false,
        };
        assert!(validate_spec(&spec).unwrap_err().message.contains("share_i"));

        let mut spec = q_spec();
        spec.values = vec![1.5, 2.0];
        assert!(validate_spec(&spec).unwrap_err().message.contains("integer"));
    }

    #[test]
    fn spec_files_accept_object_or_array() {
        let single = r#"{
            "target": "q",
            "axis": "lag_m",
            "values": [1, 2],
            "fixed": {"share_i": 0.3, "window_l": 5, "elapsed_n": 0}
        }"#;
        assert_eq!(parse_spec_file(single).unwrap().len(), 1);
        let array = format!("[{single}, {single}]");
        assert_eq!(parse_spec_file(&array).unwrap().len(), 2);
        assert!(parse_spec_file("[]").is_err());
        assert!(parse_spec_file(r#"{"target": "q", "axis": "lag_m", "values": [1], "bogus": 1}"#)
            .is_err());
    }

    #[test]
    fn q_rows_have_the_documented_shape() {
        let run = run_sweep(&[q_spec()], &SimOverrides::default()).unwrap();
        assert_eq!(run.columns, vec!["share_i", "window_l", "lag_m", "elapsed_n", "q_closed"]);
        assert_eq!(run.rows.len(), 3);
        assert!(matches!(run.rows[0][4], Cell::Float(v) if v > 0.0 && v < 1.0));
    }

    #[test]
    fn csv_round_trips_to_twelve_digits() {
        let mut spec = q_spec();
        spec.include_limit = true;
        let run = run_sweep(&[spec], &SimOverrides::default()).unwrap();
        let mut buf = Vec::new();
        write_run(&run, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(headers.iter().next_back().unwrap(), "q_limit");
        for record in reader.records() {
            let record = record.unwrap();
            let share: f64 = record[0].parse().unwrap();
            let l: u32 = record[1].parse().unwrap();
            let m: i64 = record[2].parse().unwrap();
            let n: u32 = record[3].parse().unwrap();
            let query = RaceQuery::new(l, m, n).unwrap();
            let table = forkrace::analytics::table_for_race(&query);
            let again =
                catch_up_probability(&query, &HashShare::new(share).unwrap(), &table).unwrap();
            assert_eq!(fmt12(again.to_f64()), &record[4]);
        }
    }

    #[test]
    fn json_emits_an_array_of_uniform_objects() {
        let run = run_sweep(&[q_spec()], &SimOverrides::default()).unwrap();
        let mut buf = Vec::new();
        write_run(&run, Format::Json, &mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        for row in rows {
            let obj = row.as_object().unwrap();
            assert_eq!(obj.len(), 5);
            assert!(obj["q_closed"].is_number());
            assert_eq!(obj["elapsed_n"], serde_json::json!(0));
        }
    }

    #[test]
    fn simulation_columns_echo_runs_and_seed() {
        let mut spec = q_spec();
        spec.values = vec![1.0];
        spec.with_simulation = true;
        spec.sim = Some(SimSettings { runs: Some(200), seed: Some(9), parallelism: Some(1) });
        let run = run_sweep(&[spec], &SimOverrides::default()).unwrap();
        assert_eq!(
            run.columns,
            vec!["share_i", "window_l", "lag_m", "elapsed_n", "q_closed", "p_hat", "stderr", "runs", "seed"]
        );
        assert_eq!(run.rows[0][7], Cell::UInt(200));
        assert_eq!(run.rows[0][8], Cell::UInt(9));
    }

    #[test]
    fn mismatched_column_sets_are_rejected() {
        let mut with_limit = q_spec();
        with_limit.include_limit = true;
        let err = run_sweep(&[q_spec(), with_limit], &SimOverrides::default()).unwrap_err();
        assert!(err.message.contains("constant"));
    }

    #[test]
    fn atomic_emission_writes_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let run = run_sweep(&[q_spec()], &SimOverrides::default()).unwrap();
        emit(&run, Format::Csv, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("share_i,window_l,lag_m,elapsed_n,q_closed"));
        assert_eq!(text.lines().count(), 4);
        // The temp file was renamed away, leaving only the target.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
