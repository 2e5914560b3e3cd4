//! Distorted direct product of a two-state Landau-Zener and a three-state
//! Demkov-Osherov model.

use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::MlzModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoByThreeSpec {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub e2: f64,
    pub e3: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// `+1` or `-1`, the sign in front of the square root in the offset formula.
    pub branch: i8,
}

impl TwoByThreeSpec {
    /// Common factor relating `e5/e2` and `e6/e3`.
    pub fn offset_factor(&self) -> Result<f64> {
        if self.branch != 1 && self.branch != -1 {
            return Err(MlzError::InvalidModel(format!("branch must be +-1, got {}", self.branch)));
        }
        let (b1, b2, b3) = (self.b1, self.b2, self.b3);
        let den = (b1 + b2) * (b1 + b3);
        if den == 0.0 || b2 + b3 == 0.0 {
            return Err(MlzError::InvalidModel("singular slope combination".into()));
        }
        let radicand = (b1 - b2) * (b1 - b3) / den;
        if radicand < 0.0 {
            return Err(MlzError::NegativeRadicand(radicand));
        }
        Ok((b1 + b3) / (b2 + b3) * (1.0 + f64::from(self.branch) * radicand.sqrt()))
    }
}

/// Six-level model; level order `b1 t`, `-b2 t + e2`, `-b2 t + e3`, `b3 t`,
/// `-b1 t + e5`, `-b1 t + e6`.
pub fn build_2x3(spec: &TwoByThreeSpec) -> Result<MlzModel> {
    let f = spec.offset_factor()?;
    let (b1, b2, b3) = (spec.b1, spec.b2, spec.b3);
    if !(b1 > 0.0 && b2 > 0.0 && b3 > 0.0) {
        return Err(MlzError::InvalidModel("slopes b1, b2, b3 must be positive".into()));
    }
    let r14 = (b1 - b3) / (b1 - b2);
    let r4x = (b1 + b3) / (b1 + b2);
    if !(r14 >= 0.0) {
        return Err(MlzError::NegativeRadicand(r14));
    }
    let slopes = vec![b1, -b2, -b2, b3, -b1, -b1];
    let offsets = vec![0.0, spec.e2, spec.e3, 0.0, f * spec.e2, f * spec.e3];
    let pairs = [
        (0, 1, spec.g2),
        (0, 2, spec.g3),
        (0, 3, spec.g1 * r14.sqrt()),
        (1, 4, spec.g1),
        (2, 5, spec.g1),
        (3, 4, spec.g2 * r4x.sqrt()),
        (3, 5, spec.g3 * r4x.sqrt()),
    ];
    MlzModel::from_pairs(slopes, offsets, &pairs)
}
