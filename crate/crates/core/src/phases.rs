//! Dynamical and Stokes phases of the asymptotic scattering amplitudes.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{MlzError, Result};
use crate::model::{parallel, MlzModel};

/// Phase mismatch accumulated along a chain of directly coupled levels
/// (0-based), summing `(e_x - e_y)^2 / (2 (b_x - b_y))` over each link `x -> y`.
pub fn dynamical_phase(model: &MlzModel, chain: &[usize]) -> Result<f64> {
    if chain.is_empty() {
        return Err(MlzError::Dimension("chain must contain at least one level".into()));
    }
    let n = model.n();
    if let Some(&bad) = chain.iter().find(|&&l| l >= n) {
        return Err(MlzError::Dimension(format!("level {} out of range", bad + 1)));
    }
    let (b, e) = (model.slopes(), model.offsets());
    let mut phase = 0.0;
    for w in chain.windows(2) {
        let (x, y) = (w[0], w[1]);
        if model.coupling(x, y) == 0.0 {
            return Err(MlzError::MissingLink(x + 1, y + 1));
        }
        if parallel(b[x], b[y]) {
            return Err(MlzError::DegeneratePair(x + 1, y + 1));
        }
        let de = e[x] - e[y];
        phase += de * de / (2.0 * (b[x] - b[y]));
    }
    Ok(phase)
}

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// `ln Gamma(z)` on a continuous branch, for `Re z >= 0`, `z != 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    const SHIFT: usize = 12;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    for _ in 0..SHIFT {
        acc += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - acc
}

/// Principal value of `arg Gamma(z)`.
pub fn arg_gamma(z: Complex64) -> f64 {
    let im = ln_gamma(z).im;
    let wrapped = im.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Stokes phases `(phi_plus, phi_minus)` with
/// `phi_pm = +-sgn(gamma) (pi/4 - arg Gamma(-i |gamma|))`.
pub fn stokes_phase(gamma: f64) -> (f64, f64) {
    if gamma == 0.0 {
        return (0.0, 0.0);
    }
    let base = FRAC_PI_4 - arg_gamma(Complex64::new(0.0, -gamma.abs()));
    let plus = gamma.signum() * base;
    (plus, -plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_link_phase() {
        let m = MlzModel::from_pairs(vec![5.0, 1.0], vec![3.0, 1.0], &[(0, 1, 0.1)]).unwrap();
        assert_relative_eq!(dynamical_phase(&m, &[0, 1]).unwrap(), 0.5);
        assert_relative_eq!(dynamical_phase(&m, &[1, 0]).unwrap(), -0.5);
        assert_eq!(dynamical_phase(&m, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn missing_link() {
        let m = MlzModel::from_pairs(vec![1.0, -1.0, 2.0], vec![0.0; 3], &[(0, 1, 0.1)]).unwrap();
        assert!(matches!(dynamical_phase(&m, &[0, 2]), Err(MlzError::MissingLink(1, 3))));
    }

    #[test]
    fn ln_gamma_real_axis() {
        // Gamma(5) = 24, Gamma(1/2) = sqrt(pi)
        assert_relative_eq!(ln_gamma(Complex64::new(5.0, 0.0)).re, 24.0_f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(Complex64::new(0.5, 0.0)).re, 0.5 * PI.ln(), epsilon = 1e-14);
    }

    #[test]
    fn stokes_sign_structure() {
        for g in [0.01, 0.5, 2.0, 7.3] {
            let (p, m) = stokes_phase(g);
            assert_eq!(p, -m);
            let (pn, mn) = stokes_phase(-g);
            assert_eq!(pn, -p);
            assert_eq!(mn, -m);
        }
    }
}
