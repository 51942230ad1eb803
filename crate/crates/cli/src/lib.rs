//! `qecm`: condition checks, recoveries, protocol runs, closed forms and
//! sweeps from one JSON config document.
//!
//! Exit codes: 0 success (a failing verdict is still a success), 2 config or
//! validation error, 3 numerical failure, 1 I/O error.

pub mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qecmetro::analytics::{
    f_factor, p_plus_analytic, phase_moments, sensitivity, standard_ramsey_analytic, Formula, SensitivityParams,
};
use qecmetro::codes::{
    build_recovery_polar, build_syndrome_recovery, check_conditions, CodeSpace, RecoveryOperation, SyndromeKind,
};
use qecmetro::harness::sweep;
use qecmetro::linalg::OperatorMatrix;
use qecmetro::pauli::{materialize, parse_pauli_expr_on};
use qecmetro::protocols::{simulate, EstimationResult, ProtocolKind};
use qecmetro::{Error, Tolerances};

use config::{parse_document, CheckConfig, CodeSpec, Document, GeneratorSpec, RecoveryMethod};
pub use output::write_atomic;

pub const DEFAULT_SEED: u64 = 0xD1CE;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if matches!(e, Error::Output(_)) {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// Machine-readable JSON document.
    #[value(alias = "document")]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "qecm", version, about = "Error-corrected Ramsey metrology toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Config document (JSON with a top-level `kind`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for every stochastic step.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; `-` is standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Code conditions for a generator, channel and code.
    Check(Common),
    /// Recovery operation for a channel and code.
    Recover(Common),
    /// One protocol run.
    Simulate(Common),
    /// Evaluate a closed-form expression.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// Formula name; replaces the config document.
        #[arg(long)]
        formula: Option<String>,
        /// `NAME=VALUE`, repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
    },
    /// Parameter sweep to CSV plus a provenance sidecar.
    Sweep(Common),
}

/// What a subcommand produced.
struct Rendered {
    body: String,
    /// One-line summary for standard error.
    summary: Option<String>,
    /// Provenance document written next to a file output.
    sidecar: Option<String>,
}

impl Rendered {
    fn body(body: String) -> Self {
        Self {
            body,
            summary: None,
            sidecar: None,
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qecm: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (common, rendered) = match cli.command {
        Command::Check(c) => {
            let doc = load(&c)?;
            let r = match doc {
                Document::Check(cfg) | Document::Recover(cfg) => check(&cfg, c.format.unwrap_or(Format::Text))?,
                _ => return Err(kind_mismatch("check")),
            };
            (c, r)
        }
        Command::Recover(c) => {
            let doc = load(&c)?;
            let r = match doc {
                Document::Check(cfg) | Document::Recover(cfg) => recover(&cfg, c.format.unwrap_or(Format::Text))?,
                _ => return Err(kind_mismatch("recover")),
            };
            (c, r)
        }
        Command::Simulate(c) => {
            let Document::Simulate(mut sim) = load(&c)? else {
                return Err(kind_mismatch("simulate"));
            };
            sim.config.seed = match (c.seed, sim.seed_given) {
                (Some(s), _) => s,
                (None, true) => sim.config.seed,
                (None, false) => DEFAULT_SEED,
            };
            let r = run_simulate(sim.protocol, &sim.config, c.format.unwrap_or(Format::Json))?;
            (c, r)
        }
        Command::Analytic {
            common,
            formula,
            params,
        } => {
            let (name, values) = match formula {
                Some(f) => (f, parse_params(&params)?),
                None => {
                    let Document::Analytic(a) = load(&common)? else {
                        return Err(kind_mismatch("analytic"));
                    };
                    let mut values = Vec::new();
                    for (k, v) in a.params {
                        let x = v
                            .as_f64()
                            .ok_or_else(|| CliError::Config(format!("field `{k}`: expected a number")))?;
                        values.push((k, x));
                    }
                    values.extend(parse_params(&params)?);
                    (a.formula, values)
                }
            };
            let r = analytic(&name, &values, common.format.unwrap_or(Format::Text))?;
            (common, r)
        }
        Command::Sweep(c) => {
            let Document::Sweep(mut spec) = load(&c)? else {
                return Err(kind_mismatch("sweep"));
            };
            spec.base_config.seed = c.seed.unwrap_or(DEFAULT_SEED);
            let r = run_sweep(&spec, c.format.unwrap_or(Format::Csv))?;
            (c, r)
        }
    };
    emit(&common.out, rendered)
}

fn kind_mismatch(sub: &str) -> CliError {
    CliError::Config(format!("field `kind`: the config is not a {sub} document"))
}

fn load(c: &Common) -> Result<Document, CliError> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("missing --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_document(&text)
}

fn emit(out: &str, r: Rendered) -> Result<(), CliError> {
    if let Some(s) = &r.summary {
        eprintln!("{s}");
    }
    if out == "-" {
        print!("{}", r.body);
        return Ok(());
    }
    let path = Path::new(out);
    write_atomic(path, r.body.as_bytes())?;
    if let Some(side) = r.sidecar {
        let mut p = path.as_os_str().to_owned();
        p.push(".provenance.json");
        write_atomic(Path::new(&p), side.as_bytes())?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn unsupported(format: Format, sub: &str) -> CliError {
    CliError::Config(format!("field `format`: {format:?} is not available for {sub}"))
}

fn matrix_doc(m: &OperatorMatrix<f64>) -> Vec<Vec<[f64; 2]>> {
    let d = m.dim();
    (0..d)
        .map(|i| (0..d).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

struct Problem {
    g: OperatorMatrix<f64>,
    code: CodeSpace<f64>,
    channel: qecmetro::Channel,
    n: usize,
}

fn build_problem(cfg: &CheckConfig, tol: &Tolerances) -> Result<Problem, CliError> {
    let code = match &cfg.code {
        CodeSpec::Preset(name) => CodeSpace::preset(name, tol).map_err(|e| CliError::Config(format!("field `code`: {e}")))?,
        CodeSpec::Basis { basis } => {
            let rows: Vec<Vec<_>> = basis
                .iter()
                .map(|v| v.iter().map(|&[re, im]| num_complex::Complex::new(re, im)).collect())
                .collect();
            CodeSpace::from_amplitudes(rows, tol).map_err(|e| CliError::Config(format!("field `code`: {e}")))?
        }
    };
    let dim = code.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(CliError::Config(format!("field `code`: dimension {dim} is not a qubit register")));
    }
    let n = dim.trailing_zeros() as usize;
    let g = match &cfg.generator {
        GeneratorSpec::Expr(text) => {
            let e = parse_pauli_expr_on::<f64>(text, n).map_err(|e| CliError::Config(format!("field `generator`: {e}")))?;
            materialize(&e, tol.max_dim)?
        }
        GeneratorSpec::Matrix { matrix } => OperatorMatrix::from_rows(&config::complex_rows(matrix))
            .map_err(|e| CliError::Config(format!("field `generator`: {e}")))?,
    };
    if g.dim() != dim {
        return Err(CliError::Config(format!(
            "field `generator`: dimension {} does not match the code dimension {dim}",
            g.dim()
        )));
    }
    g.ensure_hermitian(tol.herm)
        .map_err(|e| CliError::Config(format!("field `generator`: {e}")))?;
    let channel = cfg
        .channel
        .build::<f64>(n, tol)
        .map_err(|e| CliError::Config(format!("field `channel`: {e}")))?;
    if channel.dim() != dim {
        return Err(CliError::Config(format!(
            "field `channel`: dimension {} does not match the code dimension {dim}",
            channel.dim()
        )));
    }
    Ok(Problem { g, code, channel, n })
}

fn check(cfg: &CheckConfig, format: Format) -> Result<Rendered, CliError> {
    let tol = Tolerances::default();
    let p = build_problem(cfg, &tol)?;
    let rep = check_conditions(&p.g, &p.channel, &p.code, &tol)?;
    let body = match format {
        Format::Text => format!("channel: {}\n{rep}", p.channel.label()),
        Format::Json => to_json(&json!({
            "channel": p.channel.label(),
            "all_pass": rep.all_pass(),
            "condition1": {"pass": rep.condition1, "commutator_residual": rep.commutator_residual},
            "condition2": {"pass": rep.condition2, "residual": rep.condition2_residual, "a_matrix": matrix_doc(&rep.a_matrix)},
            "condition3": {"pass": rep.condition3},
            "xi": {
                "literal": rep.xi.xi,
                "lambda_min": rep.xi.lambda_min,
                "lambda_max": rep.xi.lambda_max,
                "spread": rep.xi.spread(),
                "spread_squared": rep.xi.spread_squared(),
                "maximizer": rep.xi.maximizer.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            },
            "tolerance": rep.tolerances.condition,
            "notes": rep.notes,
        }))?,
        Format::Csv => return Err(unsupported(format, "check")),
    };
    Ok(Rendered::body(body))
}

fn recover(cfg: &CheckConfig, format: Format) -> Result<Rendered, CliError> {
    let tol = Tolerances::default();
    let p = build_problem(cfg, &tol)?;
    let rec: RecoveryOperation<f64> = match cfg.recovery {
        RecoveryMethod::Polar => build_recovery_polar(&p.channel, &p.code, &tol)?,
        RecoveryMethod::Syndrome => {
            let kind = if p.n == 2 && cfg_is_preset(cfg, "two_qubit_plus") {
                SyndromeKind::TwoQubit
            } else {
                SyndromeKind::Ghz
            };
            build_syndrome_recovery(kind, p.n, &tol)?
        }
    };
    let completeness = rec.to_channel(&tol)?.completeness_residual();
    let (orth, unit) = rec.validity_residuals();
    let body = match format {
        Format::Text => {
            let mut s = format!("recovery: {}\n", rec.description);
            for (k, label) in rec.labels.iter().enumerate() {
                let rank = rec.syndrome_projectors[k].trace().re.round();
                let fail = if rec.fail_outcome == Some(k) { " (fail sector)" } else { "" };
                s.push_str(&format!("  outcome {k}: {label}, projector rank {rank}{fail}\n"));
            }
            s.push_str(&format!(
                "completeness residual {completeness:.3e}, projector overlap {orth:.3e}, unitarity residual {unit:.3e}\n"
            ));
            s
        }
        Format::Json => to_json(&json!({
            "description": rec.description,
            "labels": rec.labels,
            "fail_outcome": rec.fail_outcome,
            "projectors": rec.syndrome_projectors.iter().map(matrix_doc).collect::<Vec<_>>(),
            "corrections": rec.corrections.iter().map(matrix_doc).collect::<Vec<_>>(),
            "dropped": rec.dropped,
            "completeness_residual": completeness,
            "projector_overlap": orth,
            "unitarity_residual": unit,
        }))?,
        Format::Csv => return Err(unsupported(format, "recover")),
    };
    Ok(Rendered::body(body))
}

fn cfg_is_preset(cfg: &CheckConfig, name: &str) -> bool {
    matches!(&cfg.code, CodeSpec::Preset(p) if p.trim() == name)
}

fn summary_line(r: &EstimationResult) -> String {
    format!(
        "P+ = {:.6} ({} of {}), omega_hat = {:.6e}, delta_omega = {:.3e}, seed = {}",
        r.p_plus_hat,
        r.n_plus,
        r.n_plus + r.n_minus,
        r.omega_hat,
        r.delta_omega,
        r.config.seed
    )
}

fn run_simulate(kind: ProtocolKind, cfg: &qecmetro::protocols::ProtocolConfig, format: Format) -> Result<Rendered, CliError> {
    let res = simulate(cfg, kind)?;
    Ok(match format {
        Format::Json => Rendered {
            body: to_json(&res)?,
            summary: Some(summary_line(&res)),
            sidecar: None,
        },
        Format::Text => Rendered::body(format!("{}\n", summary_line(&res))),
        Format::Csv => return Err(unsupported(format, "simulate")),
    })
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    raw.iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param {p:?}: expected NAME=VALUE")))?;
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("field `{}`: {v:?} is not a number", k.trim())))?;
            Ok((k.trim().to_string(), x))
        })
        .collect()
}

/// Formula names accepted by `analytic` besides the sensitivity formulas.
pub const EXTRA_FORMULAS: [&str; 6] = ["f_factor", "p_plus", "mean_phase", "second_moment", "standard_ramsey", "optimal_time"];

fn analytic(name: &str, params: &[(String, f64)], format: Format) -> Result<Rendered, CliError> {
    let get = |key: &'static str| -> Result<f64, CliError> {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::from(Error::MissingParam(key)))
    };
    let known = [
        "T", "n", "tau", "gamma", "r", "N", "p_r", "phi0", "omega",
    ];
    if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(CliError::Config(format!("field `{k}`: unknown parameter")));
    }
    let steps = |v: f64| -> Result<usize, CliError> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Config(format!("field `r`: {v} is not a positive integer")))
        }
    };
    let mut extra: Vec<(&str, f64)> = Vec::new();
    let value = if let Some(f) = Formula::from_name(name) {
        let find = |key: &str| params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| *v);
        let sp = SensitivityParams {
            t: find("T"),
            n: find("n"),
            tau: find("tau"),
            gamma: find("gamma"),
            r: find("r"),
            n_qubits: find("N"),
            p_r: find("p_r"),
        };
        sensitivity(f, &sp)?
    } else {
        match name {
            "f_factor" => f_factor(get("p_r")?, steps(get("r")?)?),
            "p_plus" => {
                let fr = p_plus_analytic(get("phi0")?, get("p_r")?, steps(get("r")?)?);
                extra.push(("valid", if fr.valid { 1.0 } else { 0.0 }));
                fr.p_plus
            }
            "mean_phase" => phase_moments(get("phi0")?, get("p_r")?, steps(get("r")?)?).mean,
            "second_moment" => phase_moments(get("phi0")?, get("p_r")?, steps(get("r")?)?).second_moment,
            "standard_ramsey" => {
                let n = get("n")?;
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(CliError::Config(format!("field `n`: {n} is not a positive integer")));
                }
                let s = standard_ramsey_analytic(get("T")?, get("gamma")?, get("omega")?, n as u64);
                extra.push(("delta_omega", s.delta_omega));
                s.p_plus
            }
            "optimal_time" => qecmetro::analytics::standard_optimal_time(get("gamma")?),
            other => {
                let mut names: Vec<&str> = Formula::ALL.iter().map(|f| f.name()).collect();
                names.extend(EXTRA_FORMULAS);
                return Err(CliError::Config(format!(
                    "field `formula`: unknown formula {other:?} (one of {})",
                    names.join(", ")
                )));
            }
        }
    };
    if !value.is_finite() {
        return Err(CliError::Numerical(format!("{name} evaluated to {value}")));
    }
    let body = match format {
        Format::Text => {
            let mut s = format!("{name} = {value}\n");
            for (k, v) in &extra {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s
        }
        Format::Json => {
            let mut doc = json!({"formula": name, "value": value, "params": {}});
            for (k, v) in params {
                doc["params"][k] = Value::from(*v);
            }
            for (k, v) in &extra {
                doc[*k] = Value::from(*v);
            }
            to_json(&doc)?
        }
        Format::Csv => return Err(unsupported(format, "analytic")),
    };
    Ok(Rendered::body(body))
}

fn run_sweep(spec: &qecmetro::harness::SweepSpec, format: Format) -> Result<Rendered, CliError> {
    let res = sweep(spec)?;
    Ok(match format {
        Format::Csv => Rendered {
            body: res.to_csv_string()?,
            summary: None,
            sidecar: Some(res.provenance()? + "\n"),
        },
        Format::Json => Rendered::body(to_json(&res)?),
        Format::Text => return Err(unsupported(format, "sweep")),
    })
}
