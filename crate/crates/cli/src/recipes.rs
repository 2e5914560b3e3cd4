//! Built-in configurations reproducing the reference figures.

use mlz::families::{solve_coupling_closure, DtcmSpec, TwoBandSpec, TwoByThreeSpec};
use mlz::propagator::PropagationConfig;
use mlz::spec::ModelSpec;

use crate::config::{AxisConfig, RangeAxis, RunConfig};
use crate::error::CliError;

pub const RECIPES: [&str; 13] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig3a", "fig3b", "fig5a", "fig5b", "fig6", "fig7a", "fig7b",
];

fn two_band(slopes: Vec<f64>, g1: Vec<f64>, lambda: Vec<i8>) -> ModelSpec {
    ModelSpec::TwoBand(TwoBandSpec::with_rho(1.0, slopes, g1, 1.0, lambda, 1))
}

fn range(name: &str, start: f64, stop: f64, points: usize) -> AxisConfig {
    AxisConfig::Range(RangeAxis { name: name.into(), start, stop, points })
}

/// `g1i = factor_i g sqrt(|b_i - 1|)`.
fn scaled_couplings(slopes: &[f64], factors: &[f64], g: f64) -> Vec<f64> {
    slopes.iter().zip(factors).map(|(&bi, &f)| f * g * (bi - 1.0).abs().sqrt()).collect()
}

fn spectrum_model(n: usize) -> Result<ModelSpec, CliError> {
    let (slopes, lambda): (Vec<f64>, Vec<i8>) = match n {
        5 => (vec![4.0, 2.0, -2.5], vec![1, -1, -1]),
        6 => (vec![4.0, 2.0, -2.5, -5.0], vec![-1, 1, -1, 1]),
        7 => (vec![5.0, 3.0, 1.5, -2.0, -4.0], vec![1, 1, -1, -1, 1]),
        8 => (vec![6.0, 4.0, 2.5, 1.5, -2.0, -3.5], vec![-1, -1, 1, 1, -1, 1]),
        9 => (vec![7.0, 5.0, 3.0, 1.8, -1.6, -2.5, -4.0], vec![1, 1, 1, 1, -1, 1, -1]),
        _ => (vec![7.0, 5.0, 4.0, 2.5, 2.0, -1.5, -3.0, -3.5], vec![1; 8]),
    };
    let mut g1: Vec<Option<f64>> =
        scaled_couplings(&slopes, &vec![1.0; slopes.len()], 0.2).into_iter().map(Some).collect();
    *g1.last_mut().unwrap() = None;
    let last = solve_coupling_closure(1.0, &slopes, &g1)?;
    let g1 = g1.into_iter().map(|g| g.unwrap_or(last)).collect();
    Ok(two_band(slopes, g1, lambda))
}

fn five_state(g: f64) -> ModelSpec {
    let slopes = vec![4.0, 2.0, -2.5];
    let g1 = scaled_couplings(&slopes, &[1.0, 1.0, 2f64.sqrt()], g);
    two_band(slopes, g1, vec![1, 1, 1])
}

fn six_state(g: f64) -> ModelSpec {
    let slopes = vec![4.0, 2.0, -2.5, -5.0];
    let g1 = scaled_couplings(&slopes, &[1.0, 3.0, 2.0, 6f64.sqrt()], g);
    two_band(slopes, g1, vec![-1, 1, 1, 1])
}

fn ten_state(g: f64) -> ModelSpec {
    let slopes = vec![7.0, 5.0, 4.0, 2.5, 2.0, -1.5, -3.0, -3.5];
    let s2 = 2f64.sqrt();
    let g1 = scaled_couplings(&slopes, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, s2, s2], g);
    two_band(slopes, g1, vec![1; 8])
}

/// Coupling sweeps use `g = 1` in the model and `coupling_scale = g` on the axis.
pub fn recipe(name: &str) -> Result<RunConfig, CliError> {
    let cfg = match name {
        "fig1a" | "fig1b" | "fig1c" | "fig1d" | "fig1e" | "fig1f" => {
            let n = 5 + (name.as_bytes()[4] - b'a') as usize;
            RunConfig::for_model(spectrum_model(n)?)
        }
        "fig3a" => {
            let mut c = RunConfig::for_model(five_state(1.0));
            c.sweep = vec![range("coupling_scale", 0.05, 0.4, 8)];
            c
        }
        "fig3b" => {
            let mut c = RunConfig::for_model(five_state(0.18));
            c.sweep = vec![range("b3", 2.5, 8.0, 12)];
            c
        }
        "fig5a" => {
            let mut c = RunConfig::for_model(six_state(1.0));
            c.sweep = vec![range("coupling_scale", 0.05, 0.4, 8)];
            c
        }
        "fig5b" => {
            let mut c = RunConfig::for_model(six_state(0.22));
            c.sweep = vec![range("b3", 2.5, 8.0, 12)];
            c
        }
        "fig6" => {
            let mut c = RunConfig::for_model(ten_state(1.0));
            c.sweep = vec![range("coupling_scale", 0.05, 0.3, 6)];
            c.propagation = PropagationConfig::window(-100.0, 100.0, 0.01);
            c.tolerance = 2e-2;
            c
        }
        "fig7a" => RunConfig::for_model(ModelSpec::Dtcm(DtcmSpec {
            n_spins: 3,
            n_bosons: 0,
            beta: 1.0,
            gamma_distort: 2.0,
            epsilon: vec![2.4, 0.0, -1.0],
            g: 0.2,
        })),
        "fig7b" => RunConfig::for_model(ModelSpec::TwoByThree(TwoByThreeSpec {
            b1: 4.0,
            b2: 2.0,
            b3: 1.0,
            e2: 1.0,
            e3: 3.0,
            g1: 0.1,
            g2: 0.12,
            g3: 0.15,
            branch: -1,
        })),
        _ => return Err(CliError::Config(format!("unknown recipe '{name}'; known: {}", RECIPES.join(", ")))),
    };
    Ok(cfg)
}
