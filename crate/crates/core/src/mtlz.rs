//! Multi-time families `H_j(tau) = B_kj tau^k + A_j` and their pullback onto
//! straight time contours.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::MlzModel;

/// `M + 1` linear Hamiltonians sharing one diabatic basis.
///
/// `b[k][j]` is `B_kj`, `a[j]` is `A_j`. All matrices are real and symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct MtlzFamily {
    b: Vec<Vec<DMatrix<f64>>>,
    a: Vec<DMatrix<f64>>,
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (m - m.transpose()).amax() == 0.0
}

impl MtlzFamily {
    pub fn new(b: Vec<Vec<DMatrix<f64>>>, a: Vec<DMatrix<f64>>) -> Result<Self> {
        let times = a.len();
        if times == 0 {
            return Err(MlzError::Dimension("family needs at least one Hamiltonian".into()));
        }
        let n = a[0].nrows();
        if b.len() != times || b.iter().any(|row| row.len() != times) {
            return Err(MlzError::Dimension(format!("B must be {times}x{times} matrices")));
        }
        for m in b.iter().flatten().chain(&a) {
            if m.nrows() != n || m.ncols() != n {
                return Err(MlzError::Dimension(format!("all matrices must be {n}x{n}")));
            }
            if !is_symmetric(m) {
                return Err(MlzError::InvalidModel("family matrices must be symmetric".into()));
            }
        }
        Ok(Self { b, a })
    }

    /// Level count `N`.
    pub fn n(&self) -> usize {
        self.a[0].nrows()
    }

    /// Number of time variables `M + 1`.
    pub fn times(&self) -> usize {
        self.a.len()
    }

    pub fn b(&self, k: usize, j: usize) -> &DMatrix<f64> {
        &self.b[k][j]
    }

    pub fn a(&self, j: usize) -> &DMatrix<f64> {
        &self.a[j]
    }

    /// Eigen-slope `Lambda^a_kj`, the diagonal of `B_kj` in the diabatic basis.
    pub fn lambda(&self, level: usize, k: usize, j: usize) -> f64 {
        self.b[k][j][(level, level)]
    }

    /// `H_j(tau)`.
    pub fn hamiltonian(&self, j: usize, tau: &[f64]) -> DMatrix<f64> {
        let mut h = self.a[j].clone();
        for (k, &t) in tau.iter().enumerate() {
            h += &self.b[k][j] * t;
        }
        h
    }

    /// Largest magnitude among all matrix entries.
    pub fn scale(&self) -> f64 {
        self.b.iter().flatten().chain(&self.a).fold(0.0_f64, |m, x| m.max(x.amax()))
    }

    /// Largest off-diagonal entry of any `B_kj`.
    pub fn b_offdiagonal(&self) -> f64 {
        let n = self.n();
        let mut out = 0.0_f64;
        for m in self.b.iter().flatten() {
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        out = out.max(m[(r, c)].abs());
                    }
                }
            }
        }
        out
    }
}

/// Restricts `family` to the line `tau(t) = v t + eps`, giving `H(t) = v^j H_j(tau(t))`.
pub fn pullback_contour(family: &MtlzFamily, v: &[f64], eps: &[f64]) -> Result<MlzModel> {
    let times = family.times();
    if v.len() != times || eps.len() != times {
        return Err(MlzError::Dimension(format!("contour vectors must have length {times}")));
    }
    let off = family.b_offdiagonal();
    if off > 1e-12 * family.scale().max(1.0) {
        return Err(MlzError::NotDiabatic(off));
    }
    let n = family.n();
    let mut slopes = vec![0.0; n];
    let mut offsets = vec![0.0; n];
    let mut couplings = DMatrix::zeros(n, n);
    for j in 0..times {
        for k in 0..times {
            for lvl in 0..n {
                let lam = family.lambda(lvl, k, j);
                slopes[lvl] += lam * v[j] * v[k];
                offsets[lvl] += lam * eps[k] * v[j];
            }
        }
        let aj = family.a(j);
        for r in 0..n {
            offsets[r] += aj[(r, r)] * v[j];
            for c in 0..n {
                if r != c {
                    couplings[(r, c)] += aj[(r, c)] * v[j];
                }
            }
        }
    }
    MlzModel::new(slopes, offsets, couplings)
}

fn commutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

/// Residuals of the linear-family integrability conditions.
///
/// Each norm is a Frobenius norm divided by the family scale (largest entry),
/// squared for commutators, so the verdict is scale-free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtlzReport {
    pub times: usize,
    /// `max ||B_kj - B_jk||`.
    pub b_symmetry: f64,
    /// `max ||[B_jk, B_lm]||`.
    pub b_commutators: f64,
    /// `max ||[B_sj, A_k] - [B_sk, A_j]||`.
    pub mixed_commutators: f64,
    /// `max ||[A_j, A_k]||`.
    pub a_commutators: f64,
    /// Largest off-diagonal entry of any `B_kj`; the eigen-slopes are read off the diagonal.
    pub b_offdiagonal: f64,
    /// `max |gamma^ab (Lambda^a_kj - Lambda^b_kj) - A_k^ab A_j^ab|` over coupled pairs.
    pub gamma_relation: f64,
    /// Fitted `gamma^ab` for every coupled pair, 1-based.
    pub gamma: Vec<(usize, usize, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

pub const MTLZ_TOL: f64 = 1e-10;

pub fn check_mtlz(family: &MtlzFamily) -> MtlzReport {
    check_mtlz_with_tol(family, MTLZ_TOL)
}

pub fn check_mtlz_with_tol(family: &MtlzFamily, tolerance: f64) -> MtlzReport {
    let m = family.times();
    let n = family.n();
    let s = family.scale().max(1e-300);
    let s2 = s * s;
    let mut b_symmetry = 0.0_f64;
    let mut b_commutators = 0.0_f64;
    let mut mixed = 0.0_f64;
    let mut a_comm = 0.0_f64;
    for k in 0..m {
        for j in 0..m {
            b_symmetry = b_symmetry.max((family.b(k, j) - family.b(j, k)).norm() / s);
            for l in 0..m {
                for q in 0..m {
                    b_commutators = b_commutators.max(commutator(family.b(j, k), family.b(l, q)).norm() / s2);
                }
            }
            a_comm = a_comm.max(commutator(family.a(j), family.a(k)).norm() / s2);
            for sidx in 0..m {
                let r = commutator(family.b(sidx, j), family.a(k)) - commutator(family.b(sidx, k), family.a(j));
                mixed = mixed.max(r.norm() / s2);
            }
        }
    }
    let b_off = family.b_offdiagonal() / s;
    let mut gamma = Vec::new();
    let mut gamma_relation = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            if (0..m).all(|j| family.a(j)[(a, b)] == 0.0) {
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..m {
                for j in 0..m {
                    let dl = family.lambda(a, k, j) - family.lambda(b, k, j);
                    let aa = family.a(k)[(a, b)] * family.a(j)[(a, b)];
                    num += dl * aa;
                    den += dl * dl;
                }
            }
            let g = if den > 0.0 { num / den } else { 0.0 };
            for k in 0..m {
                for j in 0..m {
                    let dl = family.lambda(a, k, j) - family.lambda(b, k, j);
                    let aa = family.a(k)[(a, b)] * family.a(j)[(a, b)];
                    gamma_relation = gamma_relation.max((g * dl - aa).abs() / s2);
                }
            }
            gamma.push((a + 1, b + 1, g));
        }
    }
    let pass = [b_symmetry, b_commutators, mixed, a_comm, b_off, gamma_relation].iter().all(|&x| x < tolerance);
    MtlzReport {
        times: m,
        b_symmetry,
        b_commutators,
        mixed_commutators: mixed,
        a_commutators: a_comm,
        b_offdiagonal: b_off,
        gamma_relation,
        gamma,
        tolerance,
        pass,
    }
}
