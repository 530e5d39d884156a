//! The `nci` command line: `derive`, `evaluate`, and `sweep`.
//!
//! Exit codes: 0 on success, 1 on input or parse errors, 2 when the scenario
//! fails the statistical-proof preconditions (the report is still written).
//! A violated inequality is data, never an error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::format::{float, json_float};
use crate::inequality::{evaluate_bound, xu_slope, BoundEvaluation, Derivation, InequalityParameters};
use crate::polytope::write_vertex_csv;
use crate::quantum::{kcbs_realization, QuantumRealization};
use crate::{Rational, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_STATISTICAL: i32 = 2;

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-6;
/// `|p* − 1/3|` below which the n/6-slope form is also reported.
pub const XU_P_STAR_TOLERANCE: f64 = 1e-9;

pub const SWEEP_HEADER: &str = "v,corr,r,p_star,rhs,margin,violated";

#[derive(Debug, Parser)]
#[command(name = "nci", version, about = "Noise-robust noncontextuality inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the inequality for a scenario.
    Derive {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a quantum realization against the derived inequality.
    Evaluate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        realization: RealizationArgs,
        /// Depolarizing visibility applied to the measurements.
        #[arg(long, value_name = "V")]
        visibility: Option<f64>,
        /// Also write the (depolarized) realization as JSON.
        #[arg(long, value_name = "PATH")]
        dump_realization: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate over a visibility grid and locate the critical visibility.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        realization: RealizationArgs,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScenarioArgs {
    /// Built-in n-cycle scenario.
    #[arg(long, value_name = "N")]
    pub n_cycle: Option<usize>,
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RealizationArgs {
    /// Built-in qutrit realization sized to the scenario's contexts.
    #[arg(long)]
    pub kcbs: bool,
    /// Realization JSON file.
    #[arg(long, value_name = "PATH")]
    pub realization: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, A>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Derive { scenario, output } => {
            let scenario = load_scenario(scenario)?;
            let derivation = Derivation::run(&scenario)?;
            let report = derivation.report();
            let text = match output.format {
                Format::Json => json_line(&report)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_vertex_csv(&derivation.vertices, &scenario, &mut buf)?;
                    String::from_utf8(buf)?
                }
            };
            emit(output, &text, stdout)?;
            if let Some(diagnosis) = &report.diagnosis {
                writeln!(stderr, "error: {diagnosis}")?;
                return Ok(EXIT_NOT_STATISTICAL);
            }
            Ok(EXIT_OK)
        }
        Command::Evaluate {
            scenario,
            realization,
            visibility,
            dump_realization,
            output,
        } => {
            let scenario = load_scenario(scenario)?;
            let params = parameters(&scenario, stderr)?;
            let base = load_realization(realization, &scenario)?;
            let v = visibility.unwrap_or(1.0);
            let q = base.depolarize(v)?;
            if let Some(path) = dump_realization {
                fs::write(path, q.to_json() + "\n")
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            let eval = evaluate_at(&base, &scenario, &params, v)?;
            let xu_rhs = if (eval.p_star - 1.0 / 3.0).abs() <= XU_P_STAR_TOLERANCE {
                let slope = xu_slope(&params)?;
                Some(1.0 - slope.to_f64_lossy() * (eval.r - params.r_det.to_f64_lossy()))
            } else {
                None
            };
            let text = match output.format {
                Format::Json => json_line(&EvaluationJson::new(v, &eval, xu_rhs))?,
                Format::Csv => format!("{SWEEP_HEADER}\n{}\n", csv_row(v, &eval)),
            };
            emit(output, &text, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            scenario,
            realization,
            from,
            to,
            steps,
            output,
        } => {
            check_range(*from, *to, *steps)?;
            let scenario = load_scenario(scenario)?;
            let params = parameters(&scenario, stderr)?;
            let base = load_realization(realization, &scenario)?;
            let sweep = sweep(&base, &scenario, &params, *from, *to, *steps)?;
            let text = match output.format {
                Format::Json => json_line(&SweepJson::new(&sweep))?,
                Format::Csv => {
                    let mut s = format!("{SWEEP_HEADER}\n");
                    for (v, eval) in &sweep.rows {
                        s.push_str(&csv_row(*v, eval));
                        s.push('\n');
                    }
                    let v_star = sweep.v_star.map_or_else(|| "none".to_owned(), float);
                    writeln!(stderr, "v* = {v_star}")?;
                    s
                }
            };
            emit(output, &text, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

use crate::scalar::ExactField as _;

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    match (&args.n_cycle, &args.scenario) {
        (Some(n), _) => Ok(Scenario::n_cycle(*n)?),
        (None, Some(path)) => {
            let text = read(path)?;
            Ok(Scenario::from_json(&text).with_context(|| format!("in {}", path.display()))?)
        }
        (None, None) => bail!("a scenario source is required"),
    }
}

fn load_realization(args: &RealizationArgs, scenario: &Scenario) -> Result<QuantumRealization<f64>> {
    let q = match &args.realization {
        Some(path) => {
            let text = read(path)?;
            QuantumRealization::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => kcbs_realization(scenario.contexts.len())?,
    };
    q.check_alignment(scenario)?;
    Ok(q)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parameters for evaluation; precondition failures are input errors here.
fn parameters(scenario: &Scenario, stderr: &mut dyn Write) -> Result<InequalityParameters<Rational>> {
    let derivation = Derivation::run(scenario)?;
    match derivation.parameters() {
        Ok(p) => Ok(p),
        Err(e) => {
            writeln!(stderr, "note: derive reports the full diagnosis")?;
            Err(e.into())
        }
    }
}

/// Depolarizes `base` to visibility `v` and evaluates the bound.
pub fn evaluate_at(
    base: &QuantumRealization<f64>,
    scenario: &Scenario,
    params: &InequalityParameters<Rational>,
    v: f64,
) -> Result<BoundEvaluation<f64>> {
    let values = base.depolarize(v)?.evaluate(scenario)?;
    Ok(evaluate_bound(params, values.corr, values.r, values.p_star)?)
}

pub fn check_range(from: f64, to: f64, steps: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) {
        bail!("visibility range [{from}, {to}] must lie within [0, 1]");
    }
    if from >= to {
        bail!("--from ({from}) must be below --to ({to})");
    }
    if steps < 2 {
        bail!("--steps must be at least 2, got {steps}");
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub rows: Vec<(f64, BoundEvaluation<f64>)>,
    /// Visibility where the margin crosses zero, if the grid brackets one.
    pub v_star: Option<f64>,
}

pub fn sweep(
    base: &QuantumRealization<f64>,
    scenario: &Scenario,
    params: &InequalityParameters<Rational>,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Sweep> {
    check_range(from, to, steps)?;
    let last = (steps - 1) as f64;
    let rows = (0..steps)
        .map(|i| {
            let v = if i == steps - 1 { to } else { from + (to - from) * i as f64 / last };
            Ok((v, evaluate_at(base, scenario, params, v)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let bracket = rows
        .windows(2)
        .rev()
        .find(|w| w[0].1.violated != w[1].1.violated)
        .map(|w| (w[0].0, w[1].0));
    let v_star = match bracket {
        Some((a, b)) => Some(bisect(base, scenario, params, a, b)?),
        None => None,
    };
    Ok(Sweep { rows, v_star })
}

/// Bisects the violation flag of the continuous depolarize-evaluate map on
/// `[a, b]`, whose endpoints differ in violation.
pub fn bisect(
    base: &QuantumRealization<f64>,
    scenario: &Scenario,
    params: &InequalityParameters<Rational>,
    a: f64,
    b: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let lo_violated = evaluate_at(base, scenario, params, lo)?.violated;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if evaluate_at(base, scenario, params, mid)?.violated == lo_violated {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn csv_row(v: f64, e: &BoundEvaluation<f64>) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        float(v),
        float(e.corr),
        float(e.r),
        float(e.p_star),
        float(e.rhs),
        float(e.margin),
        e.violated
    )
}

#[derive(Serialize)]
struct EvaluationJson {
    visibility: Box<RawValue>,
    corr: Box<RawValue>,
    r: Box<RawValue>,
    p_star: Box<RawValue>,
    rhs: Box<RawValue>,
    margin: Box<RawValue>,
    violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    xu_rhs: Option<Box<RawValue>>,
}

impl EvaluationJson {
    fn new(v: f64, e: &BoundEvaluation<f64>, xu_rhs: Option<f64>) -> Self {
        Self {
            visibility: json_float(v),
            corr: json_float(e.corr),
            r: json_float(e.r),
            p_star: json_float(e.p_star),
            rhs: json_float(e.rhs),
            margin: json_float(e.margin),
            violated: e.violated,
            xu_rhs: xu_rhs.map(json_float),
        }
    }
}

#[derive(Serialize)]
struct SweepJson {
    rows: Vec<EvaluationJson>,
    v_star: Option<Box<RawValue>>,
}

impl SweepJson {
    fn new(s: &Sweep) -> Self {
        Self {
            rows: s.rows.iter().map(|(v, e)| EvaluationJson::new(*v, e, None)).collect(),
            v_star: s.v_star.map(json_float),
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
