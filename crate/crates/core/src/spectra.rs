//! Adiabatic spectra and detection of exact level crossings.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::MlzModel;
use crate::mtlz::MtlzFamily;

/// Eigenvalues of `H(t)` sorted ascending on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTracks {
    pub times: Vec<f64>,
    /// `energies[i][k]` is the `k`-th lowest eigenvalue at `times[i]`.
    pub energies: Vec<Vec<f64>>,
}

impl SpectralTracks {
    pub fn to_csv(&self) -> String {
        let n = self.energies.first().map_or(0, Vec::len);
        let mut s = String::from("t");
        for k in 1..=n {
            s.push_str(&format!(",E{k}"));
        }
        s.push('\n');
        for (t, e) in self.times.iter().zip(&self.energies) {
            s.push_str(&crate::transition::fmt_real(*t));
            for x in e {
                s.push(',');
                s.push_str(&crate::transition::fmt_real(*x));
            }
            s.push('\n');
        }
        s
    }
}

pub fn sorted_eigenvalues(model: &MlzModel, t: f64) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(model.hamiltonian_at(t)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn adiabatic_energies(model: &MlzModel, grid: &[f64]) -> SpectralTracks {
    let energies = grid.par_iter().map(|&t| sorted_eigenvalues(model, t)).collect();
    SpectralTracks { times: grid.to_vec(), energies }
}

/// `points` equally spaced times over `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (t0 + t1)],
        _ => (0..points).map(|i| t0 + (t1 - t0) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Second-order perturbative energy of diabatic level `a`:
/// `beta_a t + e_a + sum_b g_ab^2 / (E_a(t) - E_b(t))`.
pub fn perturbative_energy(model: &MlzModel, a: usize, t: f64) -> f64 {
    let ea = model.diabatic_energy(a, t);
    let mut e = ea;
    for b in 0..model.n() {
        let g = model.coupling(a, b);
        if b != a && g != 0.0 {
            e += g * g / (ea - model.diabatic_energy(b, t));
        }
    }
    e
}

/// Second-order eigenvalue of `H_j(tau)` continuing diabatic level `a`.
pub fn perturbative_energy_family(family: &MtlzFamily, j: usize, a: usize, tau: &[f64]) -> f64 {
    let level = |x: usize| -> f64 {
        let mut e = family.a(j)[(x, x)];
        for (k, &t) in tau.iter().enumerate() {
            e += family.lambda(x, k, j) * t;
        }
        e
    };
    let ea = level(a);
    let mut e = ea;
    for b in 0..family.n() {
        let g = family.a(j)[(a, b)];
        if b != a && g != 0.0 {
            e += g * g / (ea - level(b));
        }
    }
    e
}

pub fn expected_crossing_count(n: usize) -> usize {
    if n < 3 {
        return 0;
    }
    1 + (n - 2) * (n - 3) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Exact,
    Avoided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    /// Sorted-track indices `(k, k + 1)`, 1-based.
    pub tracks: (usize, usize),
    pub time: f64,
    pub gap: f64,
    /// Energy scale the gap is compared against.
    pub scale: f64,
    pub kind: CrossingKind,
    /// Another minimum of the same gap refined to the same time.
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossingOptions {
    pub grid_points: usize,
    /// Exact if `gap < exact_tol * scale`.
    pub exact_tol: f64,
    /// Time window; derived from the diabatic crossing times when absent.
    pub window: Option<(f64, f64)>,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { grid_points: 2001, exact_tol: 1e-8, window: None }
    }
}

/// Window enclosing every diabatic crossing time with a margin.
pub fn auto_window(model: &MlzModel) -> (f64, f64) {
    let n = model.n();
    let times: Vec<f64> =
        (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).filter_map(|(a, b)| model.crossing_time(a, b)).collect();
    let (lo, hi) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let margin = (0.25 * (hi - lo)).max(1.0);
    (lo - margin, hi + margin)
}

const SUBSAMPLES: usize = 32;
const GOLDEN_ITERS: usize = 200;

fn gap_at(model: &MlzModel, k: usize, t: f64) -> f64 {
    let ev = sorted_eigenvalues(model, t);
    ev[k + 1] - ev[k]
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()).max(1e-300) * 4.0 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn interior_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1)).filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1]).collect()
}

/// Local minima of the gaps between adjacent sorted eigenvalues, refined and
/// classified. Records are ordered by time, then by track.
pub fn locate_crossings(model: &MlzModel, options: &CrossingOptions) -> Result<Vec<CrossingRecord>> {
    if options.grid_points < 3 {
        return Err(MlzError::InvalidConfig("spectrum grid needs at least 3 points".into()));
    }
    let (t0, t1) = options.window.unwrap_or_else(|| auto_window(model));
    if !(t0 < t1) {
        return Err(MlzError::InvalidConfig(format!("empty window [{t0}, {t1}]")));
    }
    let n = model.n();
    let grid = uniform_grid(t0, t1, options.grid_points);
    let tracks = adiabatic_energies(model, &grid);
    let a_scale = model.a_matrix().amax();
    let mut candidates = Vec::new();
    for k in 0..n - 1 {
        let gaps: Vec<f64> = tracks.energies.iter().map(|e| e[k + 1] - e[k]).collect();
        for i in interior_minima(&gaps) {
            // resample the bracket so that nearby minima are not merged
            let sub = uniform_grid(grid[i - 1], grid[i + 1], SUBSAMPLES + 1);
            let sub_gaps: Vec<f64> = sub.iter().map(|&t| gap_at(model, k, t)).collect();
            let mut found = interior_minima(&sub_gaps);
            if found.is_empty() {
                found.push(
                    sub_gaps.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0.clamp(1, SUBSAMPLES - 1),
                );
            }
            for j in found {
                candidates.push((k, sub[j - 1], sub[j + 1]));
            }
        }
    }
    let refined: Vec<(usize, f64, f64)> = candidates
        .par_iter()
        .map(|&(k, lo, hi)| {
            let (t, g) = golden_min(|t| gap_at(model, k, t), lo, hi);
            (k, t, g)
        })
        .collect();
    let time_tol = 1e-9 * (t1 - t0);
    let mut records: Vec<CrossingRecord> = Vec::new();
    for (k, t, gap) in refined {
        if let Some(prev) = records.iter_mut().find(|r| r.tracks.0 == k + 1 && (r.time - t).abs() < time_tol) {
            prev.ambiguous = true;
            continue;
        }
        let ev = sorted_eigenvalues(model, t);
        let scale = (ev[n - 1] - ev[0]).max(a_scale);
        let kind = if gap < options.exact_tol * scale { CrossingKind::Exact } else { CrossingKind::Avoided };
        records.push(CrossingRecord { tracks: (k + 1, k + 2), time: t, gap, scale, kind, ambiguous: false });
    }
    records.sort_by(|x, y| x.time.total_cmp(&y.time).then(x.tracks.cmp(&y.tracks)));
    Ok(records)
}

/// Exact crossings only.
pub fn locate_exact_crossings(model: &MlzModel, options: &CrossingOptions) -> Result<Vec<CrossingRecord>> {
    Ok(locate_crossings(model, options)?.into_iter().filter(|r| r.kind == CrossingKind::Exact).collect())
}
