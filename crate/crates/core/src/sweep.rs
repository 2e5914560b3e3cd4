//! Transition matrices along a parameter path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::propagator::{numeric_transition_matrix, PropagationConfig};
use crate::semiclassics::{build_diagram, scattering_product, semiclassical_matrix};
use crate::spec::ModelSpec;
use crate::transition::{fmt_real, TransitionMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMethod {
    Semiclassical,
    Scattering,
    Numeric,
}

/// One named parameter and its values; all axes of a sweep are traversed
/// together, so they must have equal length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub matrix: Option<TransitionMatrix>,
    pub error: Option<String>,
}

pub fn transition_matrix(
    spec: &ModelSpec,
    method: MatrixMethod,
    config: &PropagationConfig,
) -> Result<TransitionMatrix> {
    let model = spec.build()?;
    match method {
        MatrixMethod::Semiclassical => semiclassical_matrix(&build_diagram(&model)?),
        MatrixMethod::Scattering => scattering_product(&build_diagram(&model)?),
        MatrixMethod::Numeric => numeric_transition_matrix(&model, config),
    }
}

/// Rebuilds the model at every point of the path. Points that fail to build
/// or to compute are kept as rows carrying the error.
pub fn sweep(
    base: &ModelSpec,
    axes: &[SweepAxis],
    method: MatrixMethod,
    config: &PropagationConfig,
) -> Result<Vec<SweepRow>> {
    let len = axes.first().map_or(0, |a| a.values.len());
    if axes.iter().any(|a| a.values.len() != len) {
        return Err(MlzError::InvalidConfig("sweep axes must have equal length".into()));
    }
    let rows = (0..len)
        .into_par_iter()
        .map(|i| {
            let params: Vec<(String, f64)> = axes.iter().map(|a| (a.name.clone(), a.values[i])).collect();
            let outcome = params
                .iter()
                .try_fold(base.clone(), |s, (name, v)| s.with_parameter(name, *v))
                .and_then(|s| transition_matrix(&s, method, config));
            let (matrix, error) = match outcome {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow { index: i, params, matrix, error }
        })
        .collect();
    Ok(rows)
}

/// One line per grid point: parameters, status, then `P(final, initial)` row-major.
pub fn sweep_csv(axes: &[SweepAxis], n: usize, rows: &[SweepRow]) -> String {
    let mut s = String::from("index");
    for a in axes {
        s.push(',');
        s.push_str(&a.name);
    }
    s.push_str(",status");
    for f in 1..=n {
        for i in 1..=n {
            s.push_str(&format!(",P{f}_{i}"));
        }
    }
    s.push('\n');
    for r in rows {
        s.push_str(&r.index.to_string());
        for (_, v) in &r.params {
            s.push(',');
            s.push_str(&fmt_real(*v));
        }
        match &r.matrix {
            Some(m) => {
                s.push_str(",ok");
                for x in m.0.transpose().iter() {
                    s.push(',');
                    s.push_str(&fmt_real(*x));
                }
            }
            None => {
                s.push_str(",failed");
                s.push_str(&",".repeat(n * n));
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::TwoBandSpec;

    fn base() -> ModelSpec {
        ModelSpec::TwoBand(TwoBandSpec::with_rho(
            1.0,
            vec![4.0, 2.0, -2.5],
            vec![3.0_f64.sqrt(), 1.0, 7.0_f64.sqrt()],
            1.0,
            vec![1, 1, 1],
            1,
        ))
    }

    #[test]
    fn empty_grid() {
        let rows = sweep(
            &base(),
            &[SweepAxis { name: "coupling_scale".into(), values: vec![] }],
            MatrixMethod::Semiclassical,
            &PropagationConfig::default(),
        )
        .unwrap();
        assert!(rows.is_empty());
        assert!(sweep(&base(), &[], MatrixMethod::Semiclassical, &PropagationConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn failed_points_are_kept() {
        let axes = [SweepAxis { name: "b3".into(), values: vec![3.0, 0.5, 6.0] }];
        let rows = sweep(
            &base().with_parameter("coupling_scale", 0.2).unwrap(),
            &axes,
            MatrixMethod::Semiclassical,
            &PropagationConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].matrix.is_some() && rows[2].matrix.is_some());
        assert!(rows[1].error.is_some());
        assert!(rows[0].matrix.as_ref().unwrap().max_abs_diff(rows[2].matrix.as_ref().unwrap()) < 1e-12);
        let csv = sweep_csv(&axes, 5, &rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().contains(",failed"));
        assert!(csv.lines().all(|l| l.split(',').count() == 3 + 25));
    }
}
