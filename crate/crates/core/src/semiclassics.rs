//! Semiclassical transition amplitudes built from the diabatic level diagram.
//!
//! A trajectory moves forward in time along diabatic levels; at each crossing
//! of a coupled pair it stays with amplitude `sqrt(p)` or switches with
//! amplitude `i sgn(g) sqrt(q)`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MlzError, Result};
use crate::model::{lz_probability, MlzModel};
use crate::transition::TransitionMatrix;

/// Default limit on the number of enumerated trajectories.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// Relative tolerance for treating two crossing times as simultaneous.
const TIME_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Lower level index of the pair (0-based).
    pub a: usize,
    /// Higher level index of the pair (0-based).
    pub b: usize,
    pub time: f64,
    pub coupling: f64,
    pub p: f64,
    pub q: f64,
    pub sign: f64,
}

impl Crossing {
    pub fn involves(&self, level: usize) -> bool {
        self.a == level || self.b == level
    }

    pub fn other(&self, level: usize) -> usize {
        if self.a == level {
            self.b
        } else {
            self.a
        }
    }

    /// Amplitude for switching levels at this crossing.
    pub fn switch_amplitude(&self) -> Complex64 {
        Complex64::new(0.0, self.sign * self.q.sqrt())
    }

    pub fn stay_amplitude(&self) -> Complex64 {
        Complex64::new(self.p.sqrt(), 0.0)
    }
}

/// Coupled crossings in chronological order; simultaneous crossings are
/// ordered by level pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiabaticDiagram {
    pub n: usize,
    pub crossings: Vec<Crossing>,
    /// Index ranges into `crossings` of groups sharing one time.
    pub ties: Vec<(usize, usize)>,
}

fn same_time(x: f64, y: f64) -> bool {
    (x - y).abs() <= TIME_TIE_TOL * x.abs().max(y.abs()).max(1.0)
}

pub fn build_diagram(model: &MlzModel) -> Result<DiabaticDiagram> {
    let mut crossings = Vec::new();
    for (a, b) in model.coupled_pairs() {
        let time = model.crossing_time(a, b).ok_or(MlzError::CoupledParallelLevels(a + 1, b + 1))?;
        let coupling = model.coupling(a, b);
        let p = lz_probability(coupling, model.slopes()[a], model.slopes()[b])?;
        crossings.push(Crossing { a, b, time, coupling, p, q: 1.0 - p, sign: coupling.signum() });
    }
    crossings.sort_by(|x, y| x.time.total_cmp(&y.time).then((x.a, x.b).cmp(&(y.a, y.b))));
    // group ties, then restore pair order inside each group
    let mut ties = Vec::new();
    let mut start = 0;
    while start < crossings.len() {
        let mut end = start + 1;
        while end < crossings.len() && same_time(crossings[start].time, crossings[end].time) {
            end += 1;
        }
        if end - start > 1 {
            crossings[start..end].sort_by_key(|c| (c.a, c.b));
            ties.push((start, end));
        }
        start = end;
    }
    Ok(DiabaticDiagram { n: model.n(), crossings, ties })
}

impl DiabaticDiagram {
    /// Fails if two simultaneous crossings share a level.
    pub fn check_order(&self) -> Result<()> {
        for &(s, e) in &self.ties {
            for i in s..e {
                for j in (i + 1)..e {
                    let (x, y) = (&self.crossings[i], &self.crossings[j]);
                    if x.involves(y.a) || x.involves(y.b) {
                        return Err(MlzError::AmbiguousOrder(x.a + 1, x.b + 1, y.a + 1, y.b + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Crossing involving the given pair, in any order.
    pub fn find(&self, a: usize, b: usize) -> Option<&Crossing> {
        let (a, b) = (a.min(b), a.max(b));
        self.crossings.iter().find(|c| c.a == a && c.b == b)
    }
}

/// One forward-in-time path through the diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(crossing index, switched)` for every crossing met on the way.
    pub decisions: Vec<(usize, bool)>,
    /// Levels occupied, starting with the initial level.
    pub levels: Vec<usize>,
}

impl Trajectory {
    pub fn from_level(&self) -> usize {
        self.levels[0]
    }

    pub fn to_level(&self) -> usize {
        *self.levels.last().unwrap()
    }
}

/// Number of trajectories from each `(crossing index, level)` to `to`.
fn path_counts(diagram: &DiabaticDiagram, to: usize) -> Vec<Vec<f64>> {
    let k = diagram.crossings.len();
    let mut counts = vec![vec![0.0; diagram.n]; k + 1];
    counts[k][to] = 1.0;
    for i in (0..k).rev() {
        let c = &diagram.crossings[i];
        for l in 0..diagram.n {
            counts[i][l] = if c.involves(l) { counts[i + 1][l] + counts[i + 1][c.other(l)] } else { counts[i + 1][l] };
        }
    }
    counts
}

pub fn enumerate_paths(diagram: &DiabaticDiagram, from: usize, to: usize, cap: usize) -> Result<Vec<Trajectory>> {
    if from >= diagram.n || to >= diagram.n {
        return Err(MlzError::Dimension(format!("levels must be below {}", diagram.n)));
    }
    diagram.check_order()?;
    let counts = path_counts(diagram, to);
    if counts[0][from] > cap as f64 {
        return Err(MlzError::PathCap(cap));
    }
    let mut out = Vec::new();
    let mut current = Trajectory { decisions: Vec::new(), levels: vec![from] };
    walk(diagram, &counts, 0, from, &mut current, &mut out);
    Ok(out)
}

fn walk(
    diagram: &DiabaticDiagram,
    counts: &[Vec<f64>],
    start: usize,
    level: usize,
    current: &mut Trajectory,
    out: &mut Vec<Trajectory>,
) {
    if counts[start][level] == 0.0 {
        return;
    }
    let next = (start..diagram.crossings.len()).find(|&i| diagram.crossings[i].involves(level));
    let Some(i) = next else {
        out.push(current.clone());
        return;
    };
    // stay first, so output is lexicographic with stay < switch
    current.decisions.push((i, false));
    walk(diagram, counts, i + 1, level, current, out);
    current.decisions.pop();

    let other = diagram.crossings[i].other(level);
    current.decisions.push((i, true));
    current.levels.push(other);
    walk(diagram, counts, i + 1, other, current, out);
    current.levels.pop();
    current.decisions.pop();
}

pub fn path_amplitude(diagram: &DiabaticDiagram, path: &Trajectory) -> Complex64 {
    path.decisions.iter().fold(Complex64::new(1.0, 0.0), |amp, &(i, switched)| {
        let c = &diagram.crossings[i];
        amp * if switched { c.switch_amplitude() } else { c.stay_amplitude() }
    })
}

/// Sum of all trajectory amplitudes, memoized over `(crossing index, level)`.
///
/// `memo[(i, l)]` holds the amplitudes into every final level for a
/// trajectory sitting on `l` just before crossing `i`.
struct PathSum<'a> {
    diagram: &'a DiabaticDiagram,
    memo: HashMap<(usize, usize), Vec<Complex64>>,
}

impl PathSum<'_> {
    fn amplitudes(&mut self, start: usize, level: usize) -> Vec<Complex64> {
        let next = (start..self.diagram.crossings.len()).find(|&i| self.diagram.crossings[i].involves(level));
        let Some(i) = next else {
            let mut v = vec![Complex64::new(0.0, 0.0); self.diagram.n];
            v[level] = Complex64::new(1.0, 0.0);
            return v;
        };
        if let Some(v) = self.memo.get(&(i, level)) {
            return v.clone();
        }
        let c = self.diagram.crossings[i].clone();
        let stay = self.amplitudes(i + 1, level);
        let switch = self.amplitudes(i + 1, c.other(level));
        let (ps, qs) = (c.stay_amplitude(), c.switch_amplitude());
        let v: Vec<Complex64> = stay.iter().zip(&switch).map(|(s, w)| ps * s + qs * w).collect();
        self.memo.insert((i, level), v.clone());
        v
    }
}

/// `P^ab = |sum over trajectories b -> a|^2`.
pub fn semiclassical_matrix(diagram: &DiabaticDiagram) -> Result<TransitionMatrix> {
    diagram.check_order()?;
    let n = diagram.n;
    let mut sum = PathSum { diagram, memo: HashMap::new() };
    let mut p = DMatrix::zeros(n, n);
    for from in 0..n {
        for (to, amp) in sum.amplitudes(0, from).into_iter().enumerate() {
            p[(to, from)] = amp.norm_sqr();
        }
    }
    Ok(TransitionMatrix(p))
}

/// Truncated scattering matrix: product of per-crossing two-level factors,
/// earliest crossing rightmost.
pub fn scattering_amplitudes(diagram: &DiabaticDiagram) -> Result<DMatrix<Complex64>> {
    diagram.check_order()?;
    let n = diagram.n;
    let mut s = DMatrix::<Complex64>::identity(n, n);
    for c in &diagram.crossings {
        let mut f = DMatrix::<Complex64>::identity(n, n);
        f[(c.a, c.a)] = c.stay_amplitude();
        f[(c.b, c.b)] = c.stay_amplitude();
        f[(c.a, c.b)] = c.switch_amplitude();
        f[(c.b, c.a)] = c.switch_amplitude();
        s = f * s;
    }
    Ok(s)
}

pub fn scattering_product(diagram: &DiabaticDiagram) -> Result<TransitionMatrix> {
    let s = scattering_amplitudes(diagram)?;
    Ok(TransitionMatrix(s.map(|z| z.norm_sqr())))
}

/// Closed-form matrices of the two-band family, indexed by sign case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCase {
    /// Five levels, `b3 > b4 > 0 > b5`, sign case 1..=8 of `(lambda_3, lambda_4, lambda_5)`.
    FiveState(u8),
    /// Six levels with `-lambda_3 = lambda_4 = lambda_5 = lambda_6 = 1`, from level 1.
    SixStateFrom1,
    /// As above, from level 3.
    SixStateFrom3,
    /// Ten levels, all `lambda = 1`, from level 1.
    TenStateFrom1,
}

impl OracleCase {
    /// Signs `(lambda_3, lambda_4, lambda_5)` of a five-level case.
    pub fn five_state_lambdas(case: u8) -> Option<[i8; 3]> {
        Some(match case {
            1 => [1, 1, 1],
            2 => [-1, 1, 1],
            3 => [1, -1, 1],
            4 => [1, 1, -1],
            5 => [-1, -1, 1],
            6 => [-1, 1, -1],
            7 => [1, -1, -1],
            8 => [-1, -1, -1],
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    Matrix(TransitionMatrix),
    /// Distribution over final levels from one initial level (0-based).
    FromLevel {
        initial: usize,
        probabilities: Vec<f64>,
    },
}

/// Evaluates the closed form at `p[k] = p_{k+3}`, the probability to stay at
/// the crossing of levels 1 and `k + 3`.
pub fn closed_form_oracle(case: OracleCase, p: &[f64]) -> Result<ClosedForm> {
    let need = match case {
        OracleCase::FiveState(_) => 3,
        OracleCase::SixStateFrom1 | OracleCase::SixStateFrom3 => 4,
        OracleCase::TenStateFrom1 => 8,
    };
    if p.len() != need {
        return Err(MlzError::Dimension(format!("closed form needs {need} probabilities, got {}", p.len())));
    }
    let q: Vec<f64> = p.iter().map(|x| 1.0 - x).collect();
    Ok(match case {
        OracleCase::FiveState(c) => ClosedForm::Matrix(five_state(c, p, &q)?),
        OracleCase::SixStateFrom1 => {
            let (p3, p4, p6) = (p[0], p[1], p[3]);
            let (q3, q4, q5, q6) = (q[0], q[1], q[2], q[3]);
            let d = p3 * p4 - q3 * q4;
            ClosedForm::FromLevel {
                initial: 0,
                probabilities: vec![d * d, p4 * q3 * q3, p3 * q3, p4 * q4, p3 * p6 * q5, p3 * q6],
            }
        }
        OracleCase::SixStateFrom3 => {
            let (p3, p4, p6) = (p[0], p[1], p[3]);
            let (q3, q5, q6) = (q[0], q[2], q[3]);
            ClosedForm::FromLevel {
                initial: 2,
                probabilities: vec![p3 * q3, p3 * p4 * q3, p3 * p3, 0.0, p6 * q3 * q5, q3 * q6],
            }
        }
        OracleCase::TenStateFrom1 => {
            // levels 3..=7 above b, 8..=10 below -b
            let pr = |ks: &[usize]| ks.iter().map(|&k| p[k - 3]).product::<f64>();
            let low = pr(&[8, 9, 10]);
            ClosedForm::FromLevel {
                initial: 0,
                probabilities: vec![
                    pr(&[3, 4, 5, 6, 7]) * low,
                    0.0,
                    low * q[0],
                    pr(&[3]) * low * q[1],
                    pr(&[3, 4]) * low * q[2],
                    pr(&[3, 4, 5]) * low * q[3],
                    pr(&[3, 4, 5, 6]) * low * q[4],
                    pr(&[9, 10]) * q[5],
                    pr(&[10]) * q[6],
                    q[7],
                ],
            }
        }
    })
}

fn five_state(case: u8, p: &[f64], q: &[f64]) -> Result<TransitionMatrix> {
    let (p3, p4) = (p[0], p[1]);
    let (q3, q4, q5) = (q[0], q[1], q[2]);
    let s = p3 * p3 * p4 * p4;
    let d = p3 * p4 - q3 * q4;
    let rows: Vec<Vec<f64>> = match case {
        1 | 8 => vec![
            vec![s, 0.0, p3 * p4 * q3, p3 * p3 * p4 * q4, q5],
            vec![0.0, s, q3, p3 * q4, p3 * p4 * q5],
            vec![p3 * p4 * q3, q3, p3 * p3, p3 * q3 * q4, 0.0],
            vec![p3 * p3 * p4 * q4, p3 * q4, p3 * q3 * q4, (p4 + q3 * q4).powi(2), 0.0],
            vec![q5, p3 * p4 * q5, 0.0, 0.0, s],
        ],
        2 | 7 => vec![
            vec![d * d, p4 * q3 * q3, p3 * q3, p4 * q4, p3 * q5],
            vec![p4 * q3 * q3, s, p3 * p4 * q3, q4, p3 * p4 * q5],
            vec![p3 * q3, p3 * p4 * q3, p3 * p3, 0.0, q3 * q5],
            vec![p4 * q4, q4, 0.0, p4 * p4, 0.0],
            vec![p3 * q5, p3 * p4 * q5, q3 * q5, 0.0, s],
        ],
        3 | 6 => vec![
            vec![d * d, p3 * q4 * q4, p3 * q3, p4 * q4, p4 * q5],
            vec![p3 * q4 * q4, s, q3, p3 * p4 * q4, p3 * p4 * q5],
            vec![p3 * q3, q3, p3 * p3, 0.0, 0.0],
            vec![p4 * q4, p3 * p4 * q4, 0.0, p4 * p4, q4 * q5],
            vec![p4 * q5, p3 * p4 * q5, 0.0, q4 * q5, s],
        ],
        // the (3,3) entry is p3^2; a bare p3 breaks unit row sums
        4 | 5 => vec![
            vec![s, q5 * q5, p3 * p4 * q3, p3 * p3 * p4 * q4, p3 * p4 * q5],
            vec![q5 * q5, s, p3 * p4 * q3, p3 * p3 * p4 * q4, p3 * p4 * q5],
            vec![p3 * p4 * q3, p3 * p4 * q3, p3 * p3, p3 * q3 * q4, q3 * q5],
            vec![p3 * p3 * p4 * q4, p3 * p3 * p4 * q4, p3 * q3 * q4, (p4 + q3 * q4).powi(2), p3 * q4 * q5],
            vec![p3 * p4 * q5, p3 * p4 * q5, q3 * q5, p3 * q4 * q5, s],
        ],
        _ => return Err(MlzError::InvalidModel(format!("five-state case must be 1..=8, got {case}"))),
    };
    TransitionMatrix::from_rows(&rows)
}
