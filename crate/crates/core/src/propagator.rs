//! Direct integration of `i dpsi/dt = H(t) psi` for linear models.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::MlzModel;
use crate::transition::TransitionMatrix;

/// Largest tolerated deviation of any column norm from 1.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Fourth-order commutator-free Magnus steps on `H(t)` itself.
    Plain,
    /// Second-order Magnus steps on the residual amplitudes after removing the
    /// diabatic phases, with the oscillatory integrals done exactly.
    #[default]
    InteractionPicture,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// Diabatic basis state (0-based).
    Level(usize),
    /// Arbitrary normalized amplitudes as `(re, im)` pairs.
    Vector(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    pub initial: Initial,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { t_start: -500.0, t_end: 500.0, dt: 0.005, method: Method::default(), initial: Initial::Level(0) }
    }
}

impl PropagationConfig {
    pub fn window(t_start: f64, t_end: f64, dt: f64) -> Self {
        Self { t_start, t_end, dt, ..Self::default() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(MlzError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_start < self.t_end) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(MlzError::InvalidConfig(format!(
                "need t_start < t_end, got {} and {}",
                self.t_start, self.t_end
            )));
        }
        if let Initial::Vector(v) = &self.initial {
            let norm: f64 = v.iter().map(|(re, im)| re * re + im * im).sum();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(MlzError::InvalidConfig(format!("initial vector has squared norm {norm}")));
            }
        }
        Ok(())
    }

    /// Number of steps; the last step is shortened to land on `t_end`.
    fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Diabatic phase `beta t^2 / 2 + e t`.
fn diabatic_phase(model: &MlzModel, a: usize, t: f64) -> f64 {
    model.slopes()[a] * t * t / 2.0 + model.offsets()[a] * t
}

/// Evolves every column of `block` from `t_start` to `t_end`.
pub fn propagate_block(
    model: &MlzModel,
    config: &PropagationConfig,
    block: DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    config.validate()?;
    if block.nrows() != model.n() {
        return Err(MlzError::Dimension(format!("state has {} rows, model has {} levels", block.nrows(), model.n())));
    }
    let out = match config.method {
        Method::Plain => plain(model, config, block),
        Method::InteractionPicture => interaction(model, config, block),
    };
    let drift = out.column_iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max);
    if drift > NORM_TOL {
        return Err(MlzError::NormDrift(drift));
    }
    Ok(out)
}

/// Final state vector for `config.initial`.
pub fn propagate(model: &MlzModel, config: &PropagationConfig) -> Result<DVector<Complex64>> {
    let n = model.n();
    let psi0 = match &config.initial {
        Initial::Level(a) if *a < n => {
            let mut v = DVector::zeros(n);
            v[*a] = Complex64::new(1.0, 0.0);
            v
        }
        Initial::Level(a) => return Err(MlzError::Dimension(format!("initial level {} out of range", a + 1))),
        Initial::Vector(v) if v.len() == n => {
            DVector::from_iterator(n, v.iter().map(|&(re, im)| Complex64::new(re, im)))
        }
        Initial::Vector(v) => return Err(MlzError::Dimension(format!("initial vector has {} entries", v.len()))),
    };
    let block = DMatrix::from_column_slice(n, 1, psi0.as_slice());
    let out = propagate_block(model, config, block)?;
    Ok(out.column(0).into_owned())
}

/// `P^ab = |psi_a(t_end)|^2` for `psi(t_start) = |b>`.
pub fn numeric_transition_matrix(model: &MlzModel, config: &PropagationConfig) -> Result<TransitionMatrix> {
    let n = model.n();
    let u = propagate_block(model, config, DMatrix::identity(n, n))?;
    Ok(TransitionMatrix(u.map(|z| z.norm_sqr())))
}

/// `exp(-i h M) X` for real symmetric `M`.
fn apply_real_exp(m: DMatrix<f64>, h: f64, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(m);
    let v = eig.eigenvectors.map(|r| Complex64::new(r, 0.0));
    let mut y = v.adjoint() * x;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -h * lam);
        for z in y.row_mut(i).iter_mut() {
            *z *= ph;
        }
    }
    v * y
}

fn plain(model: &MlzModel, config: &PropagationConfig, mut x: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let sq3 = 3.0_f64.sqrt();
    let (a1, a2) = (0.25 + sq3 / 6.0, 0.25 - sq3 / 6.0);
    let (c1, c2) = (0.5 - sq3 / 6.0, 0.5 + sq3 / 6.0);
    let steps = config.steps();
    for k in 0..steps {
        let t0 = config.t_start + k as f64 * config.dt;
        let h = (config.t_end - t0).min(config.dt);
        let h1 = model.hamiltonian_at(t0 + c1 * h);
        let h2 = model.hamiltonian_at(t0 + c2 * h);
        x = apply_real_exp(&h1 * a1 + &h2 * a2, h, &x);
        x = apply_real_exp(&h1 * a2 + &h2 * a1, h, &x);
    }
    x
}

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_1,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `int_0^h exp(i z u) du`.
fn expint(z: f64, h: f64) -> Complex64 {
    let s = z * h / 2.0;
    Complex64::new(h * sinc(2.0 * s), h * s.sin() * sinc(s))
}

/// `int_0^h du1 int_0^u1 du2 exp(i x u1 + i y u2)`.
fn ordered_integral(x: f64, y: f64, h: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if (y * h).abs() > 2.0 {
        (expint(x + y, h) - expint(x, h)) / (i * y)
    } else if (x * h).abs() > 2.0 {
        expint(x, h) * expint(y, h) - (expint(x + y, h) - expint(y, h)) / (i * x)
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&node, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            for u in [0.5 * h * (1.0 - node), 0.5 * h * (1.0 + node)] {
                acc += w * Complex64::from_polar(1.0, x * u) * expint(y, u);
            }
        }
        acc * (0.5 * h)
    }
}

/// `int_{-a}^{a} s^2 cos(w s) ds`.
fn quadratic_moment(w: f64, a: f64) -> f64 {
    let th = w * a;
    let a3 = a * a * a;
    if th.abs() < 0.3 {
        let t2 = th * th;
        2.0 * a3 * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0 - t2 * t2 * t2 / 6480.0)
    } else {
        2.0 * a3 * ((th * th - 2.0) * th.sin() + 2.0 * th * th.cos()) / (th * th * th)
    }
}

fn interaction(model: &MlzModel, config: &PropagationConfig, x: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = model.n();
    let (slopes, offsets) = (model.slopes(), model.offsets());
    let pairs = model.coupled_pairs();
    let g = model.couplings();
    let neighbors: Vec<Vec<usize>> = (0..n).map(|a| (0..n).filter(|&b| g[(a, b)] != 0.0).collect()).collect();
    // into the rotating frame
    let mut c = x;
    for a in 0..n {
        let ph = Complex64::from_polar(1.0, diabatic_phase(model, a, config.t_start));
        for z in c.row_mut(a).iter_mut() {
            *z *= ph;
        }
    }
    if pairs.is_empty() {
        return to_lab(model, config.t_end, c);
    }
    let steps = config.steps();
    let mut theta = vec![0.0; n];
    let mut omega = vec![0.0; n];
    let mut k_mat = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..steps {
        let t0 = config.t_start + k as f64 * config.dt;
        let h = (config.t_end - t0).min(config.dt);
        let a = h / 2.0;
        let tm = t0 + a;
        for l in 0..n {
            theta[l] = diabatic_phase(model, l, tm);
            omega[l] = slopes[l] * tm + offsets[l];
        }
        k_mat.fill(Complex64::new(0.0, 0.0));
        // first order: K = i Omega_1 is Hermitian
        for &(p, q) in &pairs {
            let w = omega[p] - omega[q];
            let db = slopes[p] - slopes[q];
            let lin = h * sinc(w * a);
            let integral = Complex64::new(lin, 0.5 * db * quadratic_moment(w, a));
            let v = g[(p, q)] * Complex64::from_polar(1.0, theta[p] - theta[q]) * integral;
            k_mat[(p, q)] += v;
            k_mat[(q, p)] += v.conj();
        }
        // second order: Omega_2 = -1/2 int int_{s1 > s2} [V(s1), V(s2)]
        for j in 0..n {
            for kk in j..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &l in &neighbors[j] {
                    let gl = g[(l, kk)];
                    if gl == 0.0 {
                        continue;
                    }
                    let xw = omega[j] - omega[l];
                    let yw = omega[l] - omega[kk];
                    let diff = ordered_integral(xw, yw, h) - ordered_integral(yw, xw, h);
                    acc += g[(j, l)] * gl * diff;
                }
                if acc == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let sw = omega[j] - omega[kk];
                let phase = Complex64::from_polar(1.0, theta[j] - theta[kk] - sw * a);
                // K = i Omega, Omega_2 = -acc * phase / 2
                let v = Complex64::new(0.0, -0.5) * acc * phase;
                k_mat[(j, kk)] += v;
                if kk != j {
                    k_mat[(kk, j)] += v.conj();
                }
            }
        }
        c = apply_hermitian_exp(&k_mat, &c);
    }
    to_lab(model, config.t_end, c)
}

/// `exp(-i K) X` for Hermitian `K`.
fn apply_hermitian_exp(k: &DMatrix<Complex64>, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(k.clone());
    let v = eig.eigenvectors;
    let mut y = v.adjoint() * x;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -lam);
        for z in y.row_mut(i).iter_mut() {
            *z *= ph;
        }
    }
    v * y
}

fn to_lab(model: &MlzModel, t: f64, mut c: DMatrix<Complex64>) -> DMatrix<Complex64> {
    for a in 0..model.n() {
        let ph = Complex64::from_polar(1.0, -diabatic_phase(model, a, t));
        for z in c.row_mut(a).iter_mut() {
            *z *= ph;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force double integral with a fine midpoint rule.
    fn brute_ordered(x: f64, y: f64, h: f64) -> Complex64 {
        let m = 2000;
        let du = h / m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let u1 = (i as f64 + 0.5) * du;
            let inner: Complex64 = (0..m)
                .map(|j| {
                    let u2 = (j as f64 + 0.5) * du * u1 / h;
                    Complex64::from_polar(1.0, y * u2) * (du * u1 / h)
                })
                .sum();
            acc += Complex64::from_polar(1.0, x * u1) * inner * du;
        }
        acc
    }

    #[test]
    fn ordered_integral_branches() {
        let h = 0.01;
        for (x, y) in [(0.0, 0.0), (30.0, -50.0), (500.0, 1e-9), (1e-9, 700.0), (-400.0, 350.0), (150.0, 0.0)] {
            let got = ordered_integral(x, y, h);
            let want = brute_ordered(x, y, h);
            assert!((got - want).norm() < 1e-7 * h * h, "{x} {y}: {got} vs {want}");
        }
    }

    #[test]
    fn quadratic_moment_branches() {
        let a = 0.01;
        for w in [0.0, 10.0, 29.0, 31.0, 400.0] {
            let m = 20000;
            let ds = 2.0 * a / m as f64;
            let want: f64 = (0..m)
                .map(|i| {
                    let s = -a + (i as f64 + 0.5) * ds;
                    s * s * (w * s).cos() * ds
                })
                .sum();
            assert_relative_eq!(quadratic_moment(w, a), want, max_relative = 1e-7);
        }
    }

    #[test]
    fn expint_matches_closed_form() {
        let (z, h) = (3.7, 0.4);
        let want = (Complex64::from_polar(1.0, z * h) - 1.0) / Complex64::new(0.0, z);
        assert!((expint(z, h) - want).norm() < 1e-15);
        assert_eq!(expint(0.0, h), Complex64::new(h, 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(PropagationConfig::window(1.0, 0.0, 0.1).validate().is_err());
        assert!(PropagationConfig::window(0.0, 1.0, 0.0).validate().is_err());
        let c = PropagationConfig { initial: Initial::Vector(vec![(1.0, 0.0), (0.1, 0.0)]), ..Default::default() };
        assert!(c.validate().is_err());
        assert_eq!(PropagationConfig::window(-1.0, 1.0, 0.3).steps(), 7);
    }
}
