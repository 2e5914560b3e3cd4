//! The linear-in-time Hamiltonian `H(t) = A + B t` written in its diabatic basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};

/// Relative tolerance under which two slopes are treated as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Pairwise Landau-Zener probability to stay on the diabatic level,
/// `exp(-2 pi g^2 / |beta_a - beta_b|)`.
pub fn lz_probability(g: f64, beta_a: f64, beta_b: f64) -> Result<f64> {
    let dv = (beta_a - beta_b).abs();
    if dv == 0.0 {
        return Err(MlzError::DegeneratePair(1, 2));
    }
    Ok((-2.0 * PI * g * g / dv).exp())
}

pub(crate) fn parallel(x: f64, y: f64) -> bool {
    (x - y).abs() <= PARALLEL_TOL * x.abs().max(y.abs()).max(1.0)
}

/// An N-level multistate Landau-Zener model.
///
/// Diabatic energies are `slopes[a] * t + offsets[a]`; `couplings` is the
/// symmetric off-diagonal part of `A` with a zero diagonal. Parallel levels
/// are allowed only when they are not directly coupled.
#[derive(Clone, Debug, PartialEq)]
pub struct MlzModel {
    slopes: Vec<f64>,
    offsets: Vec<f64>,
    couplings: DMatrix<f64>,
}

impl MlzModel {
    pub fn new(slopes: Vec<f64>, offsets: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        let n = slopes.len();
        if n < 2 {
            return Err(MlzError::InvalidModel(format!("need at least 2 levels, got {n}")));
        }
        if offsets.len() != n || couplings.nrows() != n || couplings.ncols() != n {
            return Err(MlzError::Dimension(format!(
                "{} slopes, {} offsets, {}x{} couplings",
                n,
                offsets.len(),
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if slopes.iter().chain(&offsets).chain(couplings.iter()).any(|x| !x.is_finite()) {
            return Err(MlzError::InvalidModel("non-finite parameter".into()));
        }
        for a in 0..n {
            if couplings[(a, a)] != 0.0 {
                return Err(MlzError::InvalidModel(format!("coupling diagonal must be zero (level {})", a + 1)));
            }
            for b in (a + 1)..n {
                if couplings[(a, b)] != couplings[(b, a)] {
                    return Err(MlzError::InvalidModel(format!(
                        "coupling matrix not symmetric at ({}, {})",
                        a + 1,
                        b + 1
                    )));
                }
                if couplings[(a, b)] != 0.0 && parallel(slopes[a], slopes[b]) {
                    return Err(MlzError::CoupledParallelLevels(a + 1, b + 1));
                }
            }
        }
        Ok(Self { slopes, offsets, couplings })
    }

    /// Builds a model from pairwise couplings given as `(a, b, g)` with 0-based indices.
    pub fn from_pairs(slopes: Vec<f64>, offsets: Vec<f64>, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let n = slopes.len();
        let mut c = DMatrix::zeros(n, n);
        for &(a, b, g) in pairs {
            if a >= n || b >= n || a == b {
                return Err(MlzError::Dimension(format!("bad coupling index ({a}, {b})")));
            }
            c[(a, b)] = g;
            c[(b, a)] = g;
        }
        Self::new(slopes, offsets, c)
    }

    pub fn n(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.couplings[(a, b)]
    }

    /// Diabatic energy of level `a` at time `t`.
    pub fn diabatic_energy(&self, a: usize, t: f64) -> f64 {
        self.slopes[a] * t + self.offsets[a]
    }

    /// Time at which diabatic levels `a` and `b` cross, `None` when parallel.
    pub fn crossing_time(&self, a: usize, b: usize) -> Option<f64> {
        if parallel(self.slopes[a], self.slopes[b]) {
            None
        } else {
            Some(-(self.offsets[a] - self.offsets[b]) / (self.slopes[a] - self.slopes[b]))
        }
    }

    /// Directly coupled pairs `(a, b)` with `a < b`.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.couplings[(a, b)] != 0.0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Non-parallel pairs with zero direct coupling.
    pub fn uncoupled_crossing_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.couplings[(a, b)] == 0.0 && !parallel(self.slopes[a], self.slopes[b]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Constant part `A` (offsets on the diagonal).
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let mut a = self.couplings.clone();
        for i in 0..self.n() {
            a[(i, i)] = self.offsets[i];
        }
        a
    }

    /// `H(t) = A + B t`.
    pub fn hamiltonian_at(&self, t: f64) -> DMatrix<f64> {
        let mut h = self.couplings.clone();
        for i in 0..self.n() {
            h[(i, i)] = self.offsets[i] + self.slopes[i] * t;
        }
        h
    }

    /// Largest absolute coupling, zero for an uncoupled model.
    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Returns a copy with one coupling replaced (0-based indices).
    pub fn with_coupling(&self, a: usize, b: usize, g: f64) -> Result<Self> {
        let mut c = self.couplings.clone();
        c[(a, b)] = g;
        c[(b, a)] = g;
        Self::new(self.slopes.clone(), self.offsets.clone(), c)
    }

    pub fn with_offset(&self, a: usize, e: f64) -> Result<Self> {
        let mut o = self.offsets.clone();
        o[a] = e;
        Self::new(self.slopes.clone(), o, self.couplings.clone())
    }
}

/// Serialized form of a model. Couplings are listed as 1-based pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub slopes: Vec<f64>,
    pub offsets: Vec<f64>,
    pub couplings: Vec<CouplingRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CouplingRecord {
    pub a: usize,
    pub b: usize,
    pub g: f64,
}

impl From<&MlzModel> for ModelRecord {
    fn from(m: &MlzModel) -> Self {
        let couplings = m
            .coupled_pairs()
            .into_iter()
            .map(|(a, b)| CouplingRecord { a: a + 1, b: b + 1, g: m.coupling(a, b) })
            .collect();
        Self { slopes: m.slopes.clone(), offsets: m.offsets.clone(), couplings }
    }
}

impl TryFrom<&ModelRecord> for MlzModel {
    type Error = MlzError;

    fn try_from(r: &ModelRecord) -> Result<Self> {
        let mut pairs = Vec::with_capacity(r.couplings.len());
        for c in &r.couplings {
            if c.a == 0 || c.b == 0 {
                return Err(MlzError::Dimension("level indices are 1-based".into()));
            }
            pairs.push((c.a - 1, c.b - 1, c.g));
        }
        MlzModel::from_pairs(r.slopes.clone(), r.offsets.clone(), &pairs)
    }
}

impl Serialize for MlzModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MlzModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ModelRecord::deserialize(d)?;
        MlzModel::try_from(&r).map_err(serde::de::Error::custom)
    }
}
