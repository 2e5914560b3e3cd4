//! Generalized bowtie pair `H_0`, `H_1` with `kappa = sum gamma_i^2 / beta_i = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::mtlz::MtlzFamily;

/// Relative tolerance on `kappa`.
pub const KAPPA_TOL: f64 = 1e-10;

/// Band entries are indexed by `k`, referring to level `k + 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BowtieSpec {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Contour speed `a > 0`.
    pub a: f64,
    /// Contour offset `e`.
    pub e: f64,
}

impl BowtieSpec {
    pub fn n(&self) -> usize {
        self.betas.len() + 2
    }

    /// `kappa` and the largest summand magnitude.
    pub fn kappa(&self) -> (f64, f64) {
        self.betas.iter().zip(&self.gammas).fold((0.0, 0.0_f64), |(s, m), (&b, &g)| {
            let t = g * g / b;
            (s + t, m.max(t.abs()))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.len() != self.gammas.len() || self.betas.is_empty() {
            return Err(MlzError::Dimension("betas and gammas must be nonempty and equal length".into()));
        }
        if let Some(k) = self.betas.iter().position(|&b| b == 0.0 || !b.is_finite()) {
            return Err(MlzError::InvalidModel(format!("beta_{} must be nonzero", k + 3)));
        }
        if !(self.a > 0.0) {
            return Err(MlzError::InvalidModel(format!("contour speed a must be positive, got {}", self.a)));
        }
        let (kappa, scale) = self.kappa();
        if kappa.abs() > KAPPA_TOL * scale {
            return Err(MlzError::KappaNonzero(kappa));
        }
        Ok(())
    }

    /// Contour `tau^0 = a t - e`, `tau^1 = a t + e` as `(v, eps)`.
    pub fn contour(&self) -> ([f64; 2], [f64; 2]) {
        ([self.a, self.a], [-self.e, self.e])
    }

    /// Replaces `gamma` at band index `k` by the magnitude that zeroes `kappa`.
    pub fn close_kappa(mut self, k: usize) -> Result<Self> {
        let partial: f64 = self
            .betas
            .iter()
            .zip(&self.gammas)
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, (&b, &g))| g * g / b)
            .sum();
        let g2 = -partial * self.betas[k];
        if g2 < 0.0 {
            return Err(MlzError::ClosureUnsolvable(format!(
                "beta_{} has the same sign as the partial kappa sum",
                k + 3
            )));
        }
        self.gammas[k] = g2.sqrt();
        Ok(self)
    }
}

fn diag(v: Vec<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(v))
}

/// The commuting pair in linear form: `H_0 = B_00 tau^0 + B_10 tau^1 + A_0`,
/// `H_1 = B_01 tau^0 + B_11 tau^1 + A_1`.
pub fn build_bowtie_family(spec: &BowtieSpec) -> Result<MtlzFamily> {
    spec.validate()?;
    let n = spec.n();
    let band = || spec.betas.iter().zip(&spec.gammas).enumerate().map(|(k, (&b, &g))| (k + 2, b, g));

    let mut b00 = vec![0.0; n];
    let mut b11 = vec![0.0; n];
    let mut b01 = vec![0.0; n];
    b01[0] = 0.5;
    b01[1] = -0.5;
    let mut a0 = DMatrix::zeros(n, n);
    let mut a1 = DMatrix::zeros(n, n);
    for (i, beta, gamma) in band() {
        b00[i] = beta;
        b11[i] = 1.0 / (4.0 * beta);
        for (r, v0, v1) in [(0, gamma, -gamma / (2.0 * beta)), (1, gamma, gamma / (2.0 * beta))] {
            a0[(r, i)] = v0;
            a0[(i, r)] = v0;
            a1[(r, i)] = v1;
            a1[(i, r)] = v1;
        }
    }
    let b01 = diag(b01);
    MtlzFamily::new(vec![vec![diag(b00), b01.clone()], vec![b01, diag(b11)]], vec![a0, a1])
}
