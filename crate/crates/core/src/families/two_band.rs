//! Two levels with opposite slopes `±b` coupled to a band of `N - 2` mutually
//! uncoupled levels.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::{parallel, MlzModel};

/// Relative tolerance on the coupling closure sum.
pub const CLOSURE_TOL: f64 = 1e-10;

fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Parameters of the two-band family.
///
/// Vectors are indexed by band level, i.e. entry `k` refers to model level `k + 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBandSpec {
    pub b: f64,
    pub slopes: Vec<f64>,
    pub g1: Vec<f64>,
    pub e: f64,
    pub lambda: Vec<i8>,
    pub tau: Vec<i8>,
    #[serde(default = "default_rho")]
    pub rho: i8,
}

fn default_rho() -> i8 {
    1
}

impl TwoBandSpec {
    /// Builds a spec with `tau` fixed by the sign rule `lambda * tau * sgn(b_i) = rho`.
    pub fn with_rho(b: f64, slopes: Vec<f64>, g1: Vec<f64>, e: f64, lambda: Vec<i8>, rho: i8) -> Self {
        let tau = slopes.iter().zip(&lambda).map(|(&bi, &l)| rho * l * sign(bi)).collect();
        Self { b, slopes, g1, e, lambda, tau, rho }
    }

    pub fn n(&self) -> usize {
        self.slopes.len() + 2
    }

    /// `sum_i g1i^2 / (b_i - b)` and the largest summand magnitude.
    pub fn closure_sum(&self) -> (f64, f64) {
        closure_terms(self.b, &self.slopes, &self.g1)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.slopes.len();
        if m < 2 {
            return Err(MlzError::InvalidModel(format!("two-band model needs N >= 4, got {}", m + 2)));
        }
        if self.g1.len() != m || self.lambda.len() != m || self.tau.len() != m {
            return Err(MlzError::Dimension("slopes, g1, lambda and tau must have equal length".into()));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(MlzError::InvalidModel(format!("b must be positive, got {}", self.b)));
        }
        if !(self.e >= 0.0) {
            return Err(MlzError::InvalidModel(format!("e must be nonnegative, got {}", self.e)));
        }
        for s in [self.rho].iter().chain(&self.lambda).chain(&self.tau) {
            if *s != 1 && *s != -1 {
                return Err(MlzError::InvalidModel(format!("sign parameters must be +-1, got {s}")));
            }
        }
        for (k, &bi) in self.slopes.iter().enumerate() {
            if !(bi.abs() > self.b) {
                return Err(MlzError::SlopeBound { level: k + 3, abs_slope: bi.abs(), b: self.b });
            }
            for (l, &bj) in self.slopes.iter().enumerate().skip(k + 1) {
                if parallel(bi, bj) {
                    return Err(MlzError::DegeneratePair(k + 3, l + 3));
                }
            }
        }
        let (sum, scale) = self.closure_sum();
        if sum.abs() > CLOSURE_TOL * scale {
            return Err(MlzError::ClosureViolated { sum, relative: sum.abs() / scale });
        }
        for k in 0..m {
            let product = self.lambda[k] * self.tau[k] * sign(self.slopes[k]);
            if product != self.rho {
                return Err(MlzError::SignCondition { level: k + 3, product, rho: self.rho });
            }
        }
        Ok(())
    }

    /// Offsets `e_i = lambda_i e sqrt(b_i^2/b^2 - 1)` of the band levels.
    pub fn band_offsets(&self) -> Vec<f64> {
        self.slopes
            .iter()
            .zip(&self.lambda)
            .map(|(&bi, &l)| f64::from(l) * self.e * (bi * bi / (self.b * self.b) - 1.0).sqrt())
            .collect()
    }

    /// Couplings `g2i = tau_i g1i sqrt((b_i + b)/(b_i - b))`.
    pub fn g2(&self) -> Vec<f64> {
        self.slopes
            .iter()
            .zip(&self.g1)
            .zip(&self.tau)
            .map(|((&bi, &g), &t)| f64::from(t) * g * ((bi + self.b) / (bi - self.b)).sqrt())
            .collect()
    }

    /// Pairwise stay probabilities `p_i` of the band levels, shared by levels 1 and 2.
    pub fn band_probabilities(&self) -> Vec<f64> {
        self.slopes
            .iter()
            .zip(&self.g1)
            .map(|(&bi, &g)| (-2.0 * std::f64::consts::PI * g * g / (self.b - bi).abs()).exp())
            .collect()
    }

    /// Moves slope `k` (band index) to `new_slope` while keeping `g1^2/(b_i - b)` fixed.
    pub fn deform_slope(&self, k: usize, new_slope: f64) -> Result<Self> {
        if k >= self.slopes.len() {
            return Err(MlzError::Dimension(format!("band index {k} out of range")));
        }
        let old = self.slopes[k];
        let ratio = (new_slope - self.b) / (old - self.b);
        if !(ratio > 0.0) {
            return Err(MlzError::InvalidModel(format!(
                "slope {new_slope} changes the sign of b_i - b for level {}",
                k + 3
            )));
        }
        let mut out = self.clone();
        out.slopes[k] = new_slope;
        out.g1[k] = self.g1[k] * ratio.sqrt();
        // keep the sign rule; sgn(b_i) is unchanged because b_i - b kept its sign and |b_i| > b
        Ok(out)
    }
}

fn closure_terms(b: f64, slopes: &[f64], g1: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut scale = 0.0_f64;
    for (&bi, &g) in slopes.iter().zip(g1) {
        let term = g * g / (bi - b);
        sum += term;
        scale = scale.max(term.abs());
    }
    (sum, scale)
}

/// Builds the two-band Hamiltonian. Level order: `b t`, `-b t`, then the band.
pub fn build_two_band(spec: &TwoBandSpec) -> Result<MlzModel> {
    spec.validate()?;
    let n = spec.n();
    let mut slopes = vec![spec.b, -spec.b];
    slopes.extend_from_slice(&spec.slopes);
    let mut offsets = vec![0.0, 0.0];
    offsets.extend(spec.band_offsets());
    let mut c = DMatrix::zeros(n, n);
    for (k, (g1, g2)) in spec.g1.iter().zip(spec.g2()).enumerate() {
        let i = k + 2;
        c[(0, i)] = *g1;
        c[(i, 0)] = *g1;
        c[(1, i)] = g2;
        c[(i, 1)] = g2;
    }
    MlzModel::new(slopes, offsets, c)
}

/// Magnitude of the single unset coupling `g1` that makes the closure sum vanish.
///
/// `g1` holds `None` at exactly one band index.
pub fn solve_coupling_closure(b: f64, slopes: &[f64], g1: &[Option<f64>]) -> Result<f64> {
    if slopes.len() != g1.len() {
        return Err(MlzError::Dimension("slopes and couplings differ in length".into()));
    }
    let unset: Vec<usize> = g1.iter().enumerate().filter(|(_, g)| g.is_none()).map(|(k, _)| k).collect();
    if unset.len() != 1 {
        return Err(MlzError::ClosureUnsolvable(format!("exactly one coupling must be unset, found {}", unset.len())));
    }
    let u = unset[0];
    let partial: f64 = slopes.iter().zip(g1).filter_map(|(&bi, g)| g.map(|g| g * g / (bi - b))).sum();
    let denom = slopes[u] - b;
    if denom == 0.0 {
        return Err(MlzError::ClosureUnsolvable(format!("level {} has slope b", u + 3)));
    }
    let g2 = -partial * denom;
    if g2 < 0.0 {
        return Err(MlzError::ClosureUnsolvable(format!(
            "partial sum {partial} has the same sign as 1/(b_{} - b)",
            u + 3
        )));
    }
    Ok(g2.sqrt())
}

/// Residuals of the two-band constraints for an arbitrary model in two-band form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBandResiduals {
    /// Largest entry that must vanish by structure (couplings 1-2 and band-band, `e_1`, `e_2`, `b_1 + b_2`).
    pub structure: f64,
    /// `min_i (|b_i| - b) / b`; positive when every band slope exceeds `b`.
    pub slope_margin: f64,
    /// Relative mismatch of `|e_i|` against `e sqrt(b_i^2/b^2 - 1)`.
    pub offsets: f64,
    /// Relative closure sum.
    pub closure: f64,
    /// Relative mismatch of `|g2i|` against `|g1i| sqrt((b_i + b)/(b_i - b))`.
    pub coupling_ratio: f64,
    pub sign_consistent: bool,
    pub e: f64,
    pub rho: i8,
}

impl TwoBandResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.structure <= tol
            && self.slope_margin > 0.0
            && self.offsets <= tol
            && self.closure <= tol
            && self.coupling_ratio <= tol
            && self.sign_consistent
    }
}

/// Measures how well `model` satisfies every two-band constraint.
pub fn two_band_residuals(model: &MlzModel) -> Result<TwoBandResiduals> {
    let n = model.n();
    if n < 4 {
        return Err(MlzError::InvalidModel("two-band form needs N >= 4".into()));
    }
    let s = model.slopes();
    let o = model.offsets();
    let b = s[0];
    if !(b > 0.0) {
        return Err(MlzError::InvalidModel("level 1 must have positive slope".into()));
    }
    let scale_e = o.iter().fold(1e-300_f64, |m, x| m.max(x.abs()));
    let scale_g = model.max_coupling().max(1e-300);
    let mut structure = ((s[1] + b).abs() / b).max(o[0].abs() / scale_e).max(o[1].abs() / scale_e);
    structure = structure.max(model.coupling(0, 1).abs() / scale_g);
    for i in 2..n {
        for j in (i + 1)..n {
            structure = structure.max(model.coupling(i, j).abs() / scale_g);
        }
    }
    let band: Vec<usize> = (2..n).collect();
    let slope_margin = band.iter().map(|&i| (s[i].abs() - b) / b).fold(f64::INFINITY, f64::min);
    let root = |i: usize| (s[i] * s[i] / (b * b) - 1.0).abs().sqrt();
    // least-squares scale for |e_i| = e root_i
    let (num, den) = band.iter().fold((0.0, 0.0), |(n, d), &i| (n + o[i].abs() * root(i), d + root(i) * root(i)));
    let e = if den > 0.0 { num / den } else { 0.0 };
    let offsets = band.iter().map(|&i| (o[i].abs() - e * root(i)).abs() / scale_e).fold(0.0, f64::max);
    let g1: Vec<f64> = band.iter().map(|&i| model.coupling(0, i)).collect();
    let slopes: Vec<f64> = band.iter().map(|&i| s[i]).collect();
    let (sum, scale) = closure_terms(b, &slopes, &g1);
    let closure = if scale > 0.0 { sum.abs() / scale } else { 0.0 };
    let coupling_ratio = band
        .iter()
        .map(|&i| {
            let expect = model.coupling(0, i).abs() * ((s[i] + b) / (s[i] - b)).abs().sqrt();
            (model.coupling(1, i).abs() - expect).abs() / scale_g
        })
        .fold(0.0, f64::max);
    // lambda*tau*sigma must agree wherever lambda and tau are defined
    let mut rho: Option<i8> = None;
    let mut sign_consistent = true;
    for &i in &band {
        if o[i] == 0.0 || model.coupling(0, i) == 0.0 || model.coupling(1, i) == 0.0 {
            continue;
        }
        let p = sign(o[i]) * sign(model.coupling(1, i) / model.coupling(0, i)) * sign(s[i]);
        match rho {
            None => rho = Some(p),
            Some(r) if r != p => sign_consistent = false,
            _ => {}
        }
    }
    Ok(TwoBandResiduals {
        structure,
        slope_margin,
        offsets,
        closure,
        coupling_ratio,
        sign_consistent,
        e,
        rho: rho.unwrap_or(1),
    })
}

/// Recovers the two-band spec from a model in two-band form and validates it.
pub fn two_band_spec_from_model(model: &MlzModel, tol: f64) -> Result<TwoBandSpec> {
    let r = two_band_residuals(model)?;
    if r.structure > tol {
        return Err(MlzError::InvalidModel(format!("not in two-band form (residual {:e})", r.structure)));
    }
    if r.offsets > tol {
        return Err(MlzError::InvalidModel(format!("offset condition violated (residual {:e})", r.offsets)));
    }
    if r.coupling_ratio > tol {
        return Err(MlzError::InvalidModel(format!(
            "coupling ratio condition violated (residual {:e})",
            r.coupling_ratio
        )));
    }
    let n = model.n();
    let s = model.slopes();
    let slopes: Vec<f64> = s[2..].to_vec();
    let g1: Vec<f64> = (2..n).map(|i| model.coupling(0, i)).collect();
    let mut lambda = Vec::with_capacity(n - 2);
    let mut tau = Vec::with_capacity(n - 2);
    for i in 2..n {
        let si = sign(s[i]);
        let t = if model.coupling(0, i) != 0.0 && model.coupling(1, i) != 0.0 {
            Some(sign(model.coupling(1, i) / model.coupling(0, i)))
        } else {
            None
        };
        let l = if model.offsets()[i] != 0.0 { Some(sign(model.offsets()[i])) } else { None };
        let (l, t) = match (l, t) {
            (Some(l), Some(t)) => (l, t),
            (Some(l), None) => (l, r.rho * l * si),
            (None, Some(t)) => (r.rho * t * si, t),
            (None, None) => (1, r.rho * si),
        };
        lambda.push(l);
        tau.push(t);
    }
    let spec = TwoBandSpec { b: s[0], slopes, g1, e: r.e, lambda, tau, rho: r.rho };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn fig2_spec(lambda: [i8; 3]) -> TwoBandSpec {
        let slopes = vec![4.0, 2.0, -3.0];
        let g5 = solve_coupling_closure(1.0, &slopes, &[Some(0.3), Some(0.2), None]).unwrap();
        TwoBandSpec::with_rho(1.0, slopes, vec![0.3, 0.2, g5], 1.0, lambda.to_vec(), 1)
    }

    #[test]
    fn fig2_model_offsets() {
        let m = build_two_band(&fig2_spec([1, 1, 1])).unwrap();
        assert_relative_eq!(m.offsets()[2], 15.0_f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(m.offsets()[3], 3.0_f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(m.offsets()[4], 8.0_f64.sqrt(), epsilon = 1e-14);
        assert_eq!(fig2_spec([1, 1, 1]).tau, vec![1, 1, -1]);
        // |e_i|/|e_j| = sqrt((b^2 - b_i^2)/(b^2 - b_j^2))
        let ratio = m.offsets()[2].abs() / m.offsets()[3].abs();
        assert_relative_eq!(ratio, ((1.0 - 16.0) / (1.0 - 4.0_f64)).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn fig3_recipe_closure() {
        let g = 0.2;
        let b5: f64 = -2.5;
        let g1 = vec![g * 3.0_f64.sqrt(), g, 2.0_f64.sqrt() * g * (1.0 - b5).sqrt()];
        let spec = TwoBandSpec::with_rho(1.0, vec![4.0, 2.0, b5], g1, 1.0, vec![1, 1, 1], 1);
        let (sum, _) = spec.closure_sum();
        assert!(sum.abs() < 1e-15);
        assert!(build_two_band(&spec).is_ok());
    }

    #[test]
    fn rejects_invalid_specs() {
        let all_positive = TwoBandSpec::with_rho(1.0, vec![4.0, 2.0, 3.0], vec![0.1, 0.1, 0.1], 1.0, vec![1, 1, 1], 1);
        assert!(matches!(build_two_band(&all_positive), Err(MlzError::ClosureViolated { .. })));
        let mut s = fig2_spec([1, 1, 1]);
        s.slopes[1] = 0.5;
        assert!(matches!(build_two_band(&s), Err(MlzError::SlopeBound { level: 4, .. })));
        let mut s = fig2_spec([1, 1, 1]);
        s.tau[0] = -1;
        assert!(matches!(build_two_band(&s), Err(MlzError::SignCondition { level: 3, .. })));
        let mut s = fig2_spec([1, 1, 1]);
        s.slopes[1] = 4.0;
        assert!(matches!(build_two_band(&s), Err(MlzError::DegeneratePair(3, 4))));
    }

    #[test]
    fn closure_solver() {
        let g = solve_coupling_closure(1.0, &[4.0, 2.0, -2.5], &[Some(1.0), Some(1.0), None]).unwrap();
        assert_relative_eq!(g, ((1.0 / 3.0 + 1.0) * 3.5_f64).sqrt(), epsilon = 1e-14);
        let g = solve_coupling_closure(1.0, &[4.0, -2.0, -3.0], &[Some(1.0), Some(1.0), None]).unwrap();
        assert_eq!(g, 0.0);
        assert!(solve_coupling_closure(1.0, &[4.0, 2.0, 3.0], &[Some(1.0), Some(1.0), None]).is_err());
        assert!(solve_coupling_closure(1.0, &[4.0, 2.0, 3.0], &[Some(1.0), None, None]).is_err());
    }

    #[test]
    fn two_band_constraints_hold_on_built_models() {
        let spec = fig2_spec([1, -1, 1]);
        let m = build_two_band(&spec).unwrap();
        let r = two_band_residuals(&m).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
        let back = two_band_spec_from_model(&m, 1e-10).unwrap();
        assert_eq!(back.lambda, spec.lambda);
        assert_eq!(back.tau, spec.tau);
        assert_relative_eq!(back.e, 1.0, epsilon = 1e-14);
        // p_{1i} = p_{2i}
        for (k, g2) in spec.g2().iter().enumerate() {
            let bi = spec.slopes[k];
            let p1 = crate::model::lz_probability(spec.g1[k], 1.0, bi).unwrap();
            let p2 = crate::model::lz_probability(*g2, -1.0, bi).unwrap();
            assert!((p1 - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn deformation_keeps_combination() {
        let spec = fig2_spec([1, 1, 1]);
        let d = spec.deform_slope(0, 6.0).unwrap();
        assert_relative_eq!(d.g1[0].powi(2) / (6.0 - 1.0), spec.g1[0].powi(2) / 3.0, epsilon = 1e-15);
        assert!(build_two_band(&d).is_ok());
        assert!(spec.deform_slope(0, 0.5).is_err());
    }
}
