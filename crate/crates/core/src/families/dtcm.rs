//! Distorted driven Tavis-Cummings model in a fixed excitation sector.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::MlzModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtcmSpec {
    pub n_spins: usize,
    pub n_bosons: usize,
    pub beta: f64,
    /// Distortion; `1` recovers equidistant slopes.
    pub gamma_distort: f64,
    /// Spin splittings, one per spin.
    pub epsilon: Vec<f64>,
    pub g: f64,
}

impl DtcmSpec {
    /// Slope of a state with `n` up-spins.
    pub fn slope(&self, n: usize) -> Result<f64> {
        match n {
            0 => Ok(0.0),
            1 => Ok(self.beta),
            2 => Ok((1.0 + self.gamma_distort) * self.beta),
            _ => {
                let nf = n as f64;
                let den = 1.0 - (nf - 2.0) / nf * self.gamma_distort;
                if den.abs() < 1e-14 {
                    return Err(MlzError::SingularSlope(n));
                }
                Ok((1.0 + self.gamma_distort) * self.beta / den)
            }
        }
    }

    /// Coupling between states with `n - 1` and `n` up-spins.
    pub fn link_coupling(&self, n: usize) -> Result<f64> {
        let gn = self.g * ((self.n_bosons + n) as f64).sqrt();
        let ratio = (self.slope(n)? - self.slope(n - 1)?) / self.beta;
        if ratio < 0.0 {
            return Err(MlzError::NegativeRadicand(ratio));
        }
        Ok(gn * ratio.sqrt())
    }
}

/// Spin configuration of basis state `index`; spin 1 is the most significant bit.
pub fn dtcm_configuration(n_spins: usize, index: usize) -> Vec<bool> {
    (0..n_spins).map(|i| index >> (n_spins - 1 - i) & 1 == 1).collect()
}

/// Builds the `2^N_s`-level model over all spin bitstrings.
pub fn build_dtcm(spec: &DtcmSpec) -> Result<MlzModel> {
    let ns = spec.n_spins;
    if ns == 0 || ns > 12 {
        return Err(MlzError::InvalidModel(format!("n_spins must be in 1..=12, got {ns}")));
    }
    if spec.epsilon.len() != ns {
        return Err(MlzError::Dimension(format!("expected {ns} spin splittings, got {}", spec.epsilon.len())));
    }
    if spec.beta == 0.0 {
        return Err(MlzError::InvalidModel("beta must be nonzero".into()));
    }
    let dim = 1usize << ns;
    let mut slopes = Vec::with_capacity(dim);
    let mut offsets = Vec::with_capacity(dim);
    for idx in 0..dim {
        let conf = dtcm_configuration(ns, idx);
        let n = conf.iter().filter(|&&s| s).count();
        let bn = spec.slope(n)?;
        let zeeman: f64 = conf.iter().zip(&spec.epsilon).filter(|(s, _)| **s).map(|(_, e)| e).sum();
        slopes.push(bn);
        offsets.push(if n == 0 { 0.0 } else { bn / (n as f64 * spec.beta) * zeeman });
    }
    let mut c = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        for bit in 0..ns {
            let other = idx ^ (1 << bit);
            if other > idx {
                let n_hi = (other.count_ones()) as usize;
                let g = spec.link_coupling(n_hi)?;
                c[(idx, other)] = g;
                c[(other, idx)] = g;
            }
        }
    }
    MlzModel::new(slopes, offsets, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig7a() -> DtcmSpec {
        DtcmSpec { n_spins: 3, n_bosons: 0, beta: 1.0, gamma_distort: 2.0, epsilon: vec![2.4, 0.0, -1.0], g: 0.2 }
    }

    #[test]
    fn fig7a_slopes() {
        let s = fig7a();
        for (n, want) in [0.0, 1.0, 3.0, 9.0].into_iter().enumerate() {
            assert_relative_eq!(s.slope(n).unwrap(), want, epsilon = 1e-14);
        }
        let m = build_dtcm(&s).unwrap();
        assert_eq!(m.n(), 8);
        assert_eq!(m.coupled_pairs().len(), 12);
        assert_eq!(m.uncoupled_crossing_pairs().len(), 10);
        // |111>: e = b_3/(3 beta) * (2.4 + 0 - 1)
        assert_relative_eq!(m.offsets()[7], 9.0 / 3.0 * 1.4, epsilon = 1e-14);
        // g_3 link between |011> and |111>
        assert_relative_eq!(m.coupling(3, 7), 0.2 * 3.0_f64.sqrt() * 6.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn undistorted_limit() {
        let s = DtcmSpec {
            n_spins: 4,
            n_bosons: 2,
            beta: 0.7,
            gamma_distort: 1.0,
            epsilon: vec![0.3, -0.2, 1.0, 0.5],
            g: 0.1,
        };
        for n in 0..=4 {
            assert_relative_eq!(s.slope(n).unwrap(), n as f64 * 0.7, epsilon = 1e-15);
            if n > 0 {
                assert_relative_eq!(s.link_coupling(n).unwrap(), 0.1 * ((2 + n) as f64).sqrt(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn single_spin_is_two_level() {
        let s = DtcmSpec { n_spins: 1, n_bosons: 0, beta: 1.0, gamma_distort: 3.0, epsilon: vec![0.5], g: 0.3 };
        let m = build_dtcm(&s).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.slopes(), &[0.0, 1.0]);
        assert_relative_eq!(m.coupling(0, 1), 0.3);
    }

    #[test]
    fn singular_denominator() {
        // n = 3: 1 - gamma/3 = 0
        let s = DtcmSpec { n_spins: 3, n_bosons: 0, beta: 1.0, gamma_distort: 3.0, epsilon: vec![0.0; 3], g: 0.1 };
        assert!(matches!(build_dtcm(&s), Err(MlzError::SingularSlope(3))));
    }
}
