//! Family-tagged model descriptions that can be rebuilt after changing a
//! named parameter.

use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::families::{
    build_2x3, build_bowtie_family, build_dtcm, build_two_band, BowtieSpec, DtcmSpec, TwoBandSpec, TwoByThreeSpec,
};
use crate::model::{MlzModel, ModelRecord};
use crate::mtlz::pullback_contour;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    TwoBand(TwoBandSpec),
    /// Pulled back along the contour `tau^0 = a t - e`, `tau^1 = a t + e`.
    Bowtie(BowtieSpec),
    Dtcm(DtcmSpec),
    TwoByThree(TwoByThreeSpec),
    Raw(ModelRecord),
}

/// Splits `"b3"` into `("b", 3)`.
fn indexed(name: &str) -> Option<(&str, usize)> {
    let split = name.find(|c: char| c.is_ascii_digit())?;
    let (stem, digits) = name.split_at(split);
    Some((stem, digits.parse().ok()?))
}

/// Splits `"g1_3"` into `("g", 1, 3)`.
fn pair_indexed(name: &str) -> Option<(&str, usize, usize)> {
    let (head, tail) = name.split_once('_')?;
    let (stem, a) = indexed(head)?;
    Some((stem, a, tail.parse().ok()?))
}

fn slot<'a>(v: &'a mut [f64], index: usize, offset: usize, name: &str) -> Result<&'a mut f64> {
    index.checked_sub(offset).and_then(|k| v.get_mut(k)).ok_or_else(|| MlzError::UnknownParameter(name.to_string()))
}

impl ModelSpec {
    pub fn build(&self) -> Result<MlzModel> {
        match self {
            Self::TwoBand(s) => build_two_band(s),
            Self::Bowtie(s) => {
                let fam = build_bowtie_family(s)?;
                let (v, eps) = s.contour();
                pullback_contour(&fam, &v, &eps)
            }
            Self::Dtcm(s) => build_dtcm(s),
            Self::TwoByThree(s) => build_2x3(s),
            Self::Raw(r) => MlzModel::try_from(r),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::TwoBand(_) => "two_band",
            Self::Bowtie(_) => "bowtie",
            Self::Dtcm(_) => "dtcm",
            Self::TwoByThree(_) => "two_by_three",
            Self::Raw(_) => "raw",
        }
    }

    /// Copy with one named parameter set. Band slopes of the two-band family
    /// (`b3`, `b4`, ...) move with `g1^2/(b_i - b)` held fixed; `coupling_scale`
    /// multiplies every free coupling.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let unknown = || MlzError::UnknownParameter(name.to_string());
        let mut out = self.clone();
        match &mut out {
            Self::TwoBand(s) => match name {
                "e" => s.e = value,
                "b" => s.b = value,
                "coupling_scale" => s.g1.iter_mut().for_each(|g| *g *= value),
                _ => match indexed(name).or_else(|| pair_indexed(name).map(|(st, a, b)| (st, a * 100 + b))) {
                    Some(("b", i)) => {
                        let k = i.checked_sub(3).ok_or_else(unknown)?;
                        *s = s.deform_slope(k, value)?;
                    }
                    Some(("g", i)) if i / 100 == 1 => *slot(&mut s.g1, i % 100, 3, name)? = value,
                    _ => return Err(unknown()),
                },
            },
            Self::Bowtie(s) => match name {
                "a" => s.a = value,
                "e" => s.e = value,
                _ => match indexed(name) {
                    Some(("beta", i)) => *slot(&mut s.betas, i, 3, name)? = value,
                    Some(("gamma", i)) => *slot(&mut s.gammas, i, 3, name)? = value,
                    _ => return Err(unknown()),
                },
            },
            Self::Dtcm(s) => match name {
                "g" => s.g = value,
                "beta" => s.beta = value,
                "gamma" => s.gamma_distort = value,
                _ => match indexed(name) {
                    Some(("epsilon", i)) => *slot(&mut s.epsilon, i, 1, name)? = value,
                    _ => return Err(unknown()),
                },
            },
            Self::TwoByThree(s) => {
                let field = match name {
                    "b1" => &mut s.b1,
                    "b2" => &mut s.b2,
                    "b3" => &mut s.b3,
                    "e2" => &mut s.e2,
                    "e3" => &mut s.e3,
                    "g1" => &mut s.g1,
                    "g2" => &mut s.g2,
                    "g3" => &mut s.g3,
                    _ => return Err(unknown()),
                };
                *field = value;
            }
            Self::Raw(r) => {
                if name == "coupling_scale" {
                    r.couplings.iter_mut().for_each(|c| c.g *= value);
                } else if let Some(("g", a, b)) = pair_indexed(name) {
                    let c = r
                        .couplings
                        .iter_mut()
                        .find(|c| (c.a, c.b) == (a, b) || (c.a, c.b) == (b, a))
                        .ok_or_else(unknown)?;
                    c.g = value;
                } else {
                    match indexed(name) {
                        Some(("slope", i)) => *slot(&mut r.slopes, i, 1, name)? = value,
                        Some(("e", i)) => *slot(&mut r.offsets, i, 1, name)? = value,
                        _ => return Err(unknown()),
                    }
                }
            }
        }
        Ok(out)
    }
}
