//! Config documents. One JSON object per file, discriminated by `kind`.

use num_complex::Complex;
use serde::Deserialize;
use serde_json::{Map, Value};

use qecmetro::channels::ChannelSpec;
use qecmetro::harness::{fig2_spec, fig_si_spec, SweepSpec};
use qecmetro::protocols::{ProtocolConfig, ProtocolKind};

use crate::CliError;

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Expr(String),
    Matrix { matrix: MatrixDoc },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    /// `"two_qubit_plus"` or `"ghz:N"`.
    Preset(String),
    Basis { basis: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    #[default]
    Polar,
    Syndrome,
}

/// Shared by `check` and `recover`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub generator: GeneratorSpec,
    pub code: CodeSpec,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub recovery: RecoveryMethod,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    pub formula: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub protocol: ProtocolKind,
    pub config: ProtocolConfig,
    pub seed_given: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepPreset {
    preset: String,
    #[serde(default = "one")]
    gamma: f64,
    #[serde(default = "default_per_decade")]
    per_decade: usize,
    #[serde(rename = "N", default = "three")]
    n_qubits: usize,
}

fn one() -> f64 {
    1.0
}

fn default_per_decade() -> usize {
    24
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone)]
pub enum Document {
    Check(CheckConfig),
    Recover(CheckConfig),
    Simulate(SimulateConfig),
    Analytic(AnalyticConfig),
    Sweep(Box<SweepSpec>),
}

fn parse_err(e: serde_json::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn take<T: serde::de::DeserializeOwned>(obj: Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(obj)).map_err(parse_err)
}

pub fn parse_document(text: &str) -> Result<Document, CliError> {
    let value: Value = serde_json::from_str(text).map_err(parse_err)?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(CliError::Config("field `kind` must be a string".into())),
        None => return Err(CliError::Config("missing field `kind`".into())),
    };
    match kind.as_str() {
        "check" => Ok(Document::Check(take(obj)?)),
        "recover" => Ok(Document::Recover(take(obj)?)),
        "analytic" => Ok(Document::Analytic(take(obj)?)),
        "simulate" => {
            let protocol = match obj.remove("protocol") {
                Some(v) => serde_json::from_value(v)
                    .map_err(|e| CliError::Config(format!("field `protocol`: {e}")))?,
                None => return Err(CliError::Config("missing field `protocol`".into())),
            };
            let seed_given = obj.contains_key("seed");
            Ok(Document::Simulate(SimulateConfig {
                protocol,
                config: take(obj)?,
                seed_given,
            }))
        }
        "sweep" if obj.contains_key("preset") => {
            let p: SweepPreset = take(obj)?;
            let spec = match p.preset.as_str() {
                "fig2" => fig2_spec(p.gamma, p.per_decade),
                "fig_si" => fig_si_spec(p.gamma, p.n_qubits, p.per_decade),
                other => {
                    return Err(CliError::Config(format!(
                        "field `preset`: unknown preset {other:?} (fig2, fig_si)"
                    )))
                }
            };
            Ok(Document::Sweep(Box::new(spec)))
        }
        "sweep" => Ok(Document::Sweep(Box::new(take(obj)?))),
        other => Err(CliError::Config(format!(
            "field `kind`: unknown value {other:?} (check, recover, simulate, analytic, sweep)"
        ))),
    }
}

pub fn complex_rows(rows: &MatrixDoc) -> Vec<Vec<Complex<f64>>> {
    rows.iter()
        .map(|r| r.iter().map(|&[re, im]| Complex::new(re, im)).collect())
        .collect()
}
