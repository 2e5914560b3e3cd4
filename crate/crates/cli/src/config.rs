//! Run configuration: JSON with a schema version, unknown keys rejected.

use std::path::Path;

use mlz::propagator::PropagationConfig;
use mlz::semiclassics::OracleCase;
use mlz::spec::ModelSpec;
use mlz::spectra::CrossingOptions;
use mlz::sweep::SweepAxis;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Closed-form matrix for a known phase, used instead of a model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<AxisConfig>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    /// Time contour for `pullback`; the bowtie default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<Contour>,
    /// Largest accepted |numeric - semiclassical| when all methods run.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_tolerance() -> f64 {
    1e-2
}

impl RunConfig {
    pub fn for_model(model: ModelSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model: Some(model),
            closed_form: None,
            method: None,
            propagation: PropagationConfig::default(),
            sweep: Vec::new(),
            spectrum: SpectrumConfig::default(),
            contour: None,
            tolerance: default_tolerance(),
            seed: None,
        }
    }

    pub fn model(&self) -> Result<&ModelSpec, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config("config has no model".into()))
    }

    pub fn axes(&self) -> Result<Vec<SweepAxis>, CliError> {
        self.sweep.iter().map(AxisConfig::to_axis).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormRequest {
    pub case: OracleCase,
    /// `p_3, p_4, ...`
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisConfig {
    Values(SweepAxis),
    Range(RangeAxis),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisConfig {
    pub fn to_axis(&self) -> Result<SweepAxis, CliError> {
        match self {
            Self::Values(a) => Ok(a.clone()),
            Self::Range(r) => {
                if r.points == 0 || !(r.start.is_finite() && r.stop.is_finite()) {
                    return Err(CliError::Config(format!("bad range for sweep axis '{}'", r.name)));
                }
                let values = mlz::spectra::uniform_grid(r.start, r.stop, r.points);
                let values = if r.points == 1 { vec![r.start] } else { values };
                Ok(SweepAxis { name: r.name.clone(), values })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Grid used for crossing detection.
    pub grid_points: usize,
    pub exact_tol: f64,
    pub window: Option<(f64, f64)>,
    /// Points in the emitted tracks file.
    pub track_points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let c = CrossingOptions::default();
        Self { grid_points: c.grid_points, exact_tol: c.exact_tol, window: c.window, track_points: 1001 }
    }
}

impl SpectrumConfig {
    pub fn crossing_options(&self) -> CrossingOptions {
        CrossingOptions { grid_points: self.grid_points, exact_tol: self.exact_tol, window: self.window }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contour {
    pub v: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Numbers may be written as decimal strings; they are parsed with correct
/// rounding before typed deserialization.
fn numeric_strings(v: Value) -> Value {
    match v {
        Value::String(s) => {
            let t = s.trim();
            if let Ok(i) = t.parse::<i64>() {
                Value::Number(i.into())
            } else if let Some(n) = t.parse::<f64>().ok().filter(|x| x.is_finite()).and_then(Number::from_f64) {
                Value::Number(n)
            } else {
                Value::String(s)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(numeric_strings).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, numeric_strings(v))).collect()),
        other => other,
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let version = raw.get("schema_version").cloned().map(numeric_strings);
    match version.as_ref().and_then(Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(CliError::Config(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"))),
        None => return Err(CliError::Config("missing or non-integer schema_version".into())),
    }
    serde_json::from_value(numeric_strings(raw)).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strings_become_numbers() {
        let cfg = parse_config(
            r#"{"schema_version": "1", "model": {"family": "raw", "slopes": ["1", "-1.5"], "offsets": [0, "0.1"],
                "couplings": [{"a": 1, "b": 2, "g": "0.1"}]}}"#,
        )
        .unwrap();
        let m = cfg.model().unwrap().build().unwrap();
        assert_eq!(m.slopes(), &[1.0, -1.5]);
        assert_eq!(m.offsets()[1], 0.1);
        assert_eq!(m.coupling(0, 1), 0.1);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(parse_config(r#"{"schema_version": 1, "colour": 2}"#).is_err());
        assert!(parse_config(r#"{"schema_version": 2}"#).is_err());
        assert!(parse_config(r#"{"model": null}"#).is_err());
        assert!(parse_config(r#"{"schema_version": 1, "propagation": {"dt": 0.1, "tmax": 3}}"#).is_err());
    }

    #[test]
    fn range_axis() {
        let cfg =
            parse_config(r#"{"schema_version": 1, "sweep": [{"name": "b3", "start": 2, "stop": 4, "points": 3}]}"#)
                .unwrap();
        assert_eq!(cfg.axes().unwrap()[0].values, vec![2.0, 3.0, 4.0]);
    }
}
