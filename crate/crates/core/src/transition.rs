use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};

/// `P[(a, b)]` is the probability to end in level `a` having started in `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix(pub DMatrix<f64>);

impl TransitionMatrix {
    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Probability of `initial -> final`.
    pub fn prob(&self, initial: usize, final_level: usize) -> f64 {
        self.0[(final_level, initial)]
    }

    /// Distribution over final levels starting from `initial`.
    pub fn from_level(&self, initial: usize) -> Vec<f64> {
        self.0.column(initial).iter().copied().collect()
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochastic_error(&self) -> f64 {
        let rows = self.0.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.0.column_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(MlzError::Dimension("transition matrix must be square and nonempty".into()));
        }
        Ok(Self(DMatrix::from_fn(n, n, |r, c| rows[r][c])))
    }

    /// CSV with a header; row `a`, column `b` holds `P(b -> a)`.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut s = String::from("final");
        for b in 1..=n {
            let _ = write!(s, ",from_{b}");
        }
        s.push('\n');
        for a in 0..n {
            let _ = write!(s, "{}", a + 1);
            for b in 0..n {
                let _ = write!(s, ",{}", fmt_real(self.0[(a, b)]));
            }
            s.push('\n');
        }
        s
    }
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for TransitionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
