#![allow(dead_code)]

use mlz::families::{build_two_band, solve_coupling_closure, BowtieSpec, DtcmSpec, TwoBandSpec, TwoByThreeSpec};
use mlz::MlzModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

/// Five levels, `b3 = 4`, `b4 = 2`, `b5 = -2.5`, scaled by `g`.
pub fn fig3a_spec(g: f64) -> TwoBandSpec {
    let g1 = vec![g * sqrt(3.0), g, sqrt(2.0) * g * sqrt(3.5)];
    TwoBandSpec::with_rho(1.0, vec![4.0, 2.0, -2.5], g1, 1.0, vec![1, 1, 1], 1)
}

pub fn fig3a(g: f64) -> MlzModel {
    build_two_band(&fig3a_spec(g)).unwrap()
}

/// Five levels with `b3 = 4`, `b4 = 2`, `b5 = -3`, `g13 = 0.3`, `g14 = 0.2`
/// and `g15` from the closure; sign case 1..=8.
pub fn five_state_case(case: u8) -> TwoBandSpec {
    let lambda = mlz::semiclassics::OracleCase::five_state_lambdas(case).unwrap().to_vec();
    let slopes = vec![4.0, 2.0, -3.0];
    let g15 = solve_coupling_closure(1.0, &slopes, &[Some(0.3), Some(0.2), None]).unwrap();
    TwoBandSpec::with_rho(1.0, slopes, vec![0.3, 0.2, g15], 1.0, lambda, 1)
}

pub fn fig5_spec(g: f64) -> TwoBandSpec {
    let slopes = vec![4.0, 2.0, -2.5, -5.0];
    let g1 = vec![
        g * sqrt(slopes[0] - 1.0),
        3.0 * g * sqrt(slopes[1] - 1.0),
        2.0 * g * sqrt(1.0 - slopes[2]),
        sqrt(6.0) * g * sqrt(1.0 - slopes[3]),
    ];
    TwoBandSpec::with_rho(1.0, slopes, g1, 1.0, vec![-1, 1, 1, 1], 1)
}

pub fn fig6_spec(g: f64) -> TwoBandSpec {
    let slopes = vec![7.0, 5.0, 4.0, 2.5, 2.0, -1.5, -3.0, -3.5];
    let g1 = slopes
        .iter()
        .enumerate()
        .map(|(k, &bi)| {
            let f = if k >= 6 { sqrt(2.0) } else { 1.0 };
            f * g * sqrt((bi - 1.0_f64).abs())
        })
        .collect();
    TwoBandSpec::with_rho(1.0, slopes, g1, 1.0, vec![1; 8], 1)
}

/// Sign choices of the adiabatic-spectrum figure for `N = 5..=10`.
pub fn fig1_lambdas(n: usize) -> Vec<i8> {
    match n {
        5 => vec![1, -1, -1],
        6 => vec![-1, 1, -1, 1],
        7 => vec![1, 1, -1, -1, 1],
        8 => vec![-1, -1, 1, 1, -1, 1],
        9 => vec![1, 1, 1, 1, -1, 1, -1],
        10 => vec![1; 8],
        _ => panic!("no spectrum figure for N = {n}"),
    }
}

pub fn fig1_slopes(n: usize) -> Vec<f64> {
    match n {
        5 => vec![4.0, 2.0, -2.5],
        6 => vec![4.0, 2.0, -2.5, -5.0],
        7 => vec![5.0, 3.0, 1.5, -2.0, -4.0],
        8 => vec![6.0, 4.0, 2.5, 1.5, -2.0, -3.5],
        9 => vec![7.0, 5.0, 3.0, 1.8, -1.6, -2.5, -4.0],
        10 => vec![7.0, 5.0, 4.0, 2.5, 2.0, -1.5, -3.0, -3.5],
        _ => panic!("no spectrum figure for N = {n}"),
    }
}

/// Spectrum-figure model: `g1i = 0.2 sqrt(|b_i - 1|)` with the last coupling
/// fixed by the closure.
pub fn fig1_spec(n: usize) -> TwoBandSpec {
    let slopes = fig1_slopes(n);
    let mut g1: Vec<Option<f64>> = slopes.iter().map(|&bi| Some(0.2 * sqrt((bi - 1.0_f64).abs()))).collect();
    *g1.last_mut().unwrap() = None;
    let last = solve_coupling_closure(1.0, &slopes, &g1).unwrap();
    let g1 = g1.into_iter().map(|g| g.unwrap_or(last)).collect();
    TwoBandSpec::with_rho(1.0, slopes, g1, 1.0, fig1_lambdas(n), 1)
}

pub fn fig7a() -> DtcmSpec {
    DtcmSpec { n_spins: 3, n_bosons: 0, beta: 1.0, gamma_distort: 2.0, epsilon: vec![2.4, 0.0, -1.0], g: 0.2 }
}

pub fn fig7b() -> TwoByThreeSpec {
    TwoByThreeSpec { b1: 4.0, b2: 2.0, b3: 1.0, e2: 1.0, e3: 3.0, g1: 0.1, g2: 0.12, g3: 0.15, branch: -1 }
}

fn sign_draw(rng: &mut ChaCha8Rng) -> i8 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// Random spec satisfying every two-band constraint. Slopes are kept apart,
/// crossing times distinct and couplings weak next to `e`, so that no pair of
/// exact crossings has merged.
pub fn random_two_band(rng: &mut ChaCha8Rng, n: usize) -> TwoBandSpec {
    let m = n - 2;
    'draw: loop {
        let b = rng.gen_range(0.6..1.4);
        let n_pos = rng.gen_range(1..m);
        let mut slopes: Vec<f64> = Vec::with_capacity(m);
        while slopes.len() < m {
            let mag = b * rng.gen_range(1.3..7.0);
            let s = if slopes.len() < n_pos { mag } else { -mag };
            if slopes.iter().all(|&x: &f64| (x - s).abs() > 0.3 * b) {
                slopes.push(s);
            }
        }
        let g: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..0.3)).collect();
        let lambda: Vec<i8> = (0..m).map(|_| sign_draw(rng)).collect();
        let rho = sign_draw(rng);
        let e = rng.gen_range(1.0..2.0);
        // close on the first level whose sign admits a real solution
        for k in (0..m).rev() {
            let mut opts: Vec<Option<f64>> = g.iter().map(|&x| Some(x)).collect();
            opts[k] = None;
            if let Ok(gk) = solve_coupling_closure(b, &slopes, &opts) {
                if !(0.05..0.4).contains(&gk) {
                    continue;
                }
                let mut g1 = g.clone();
                g1[k] = gk;
                let spec = TwoBandSpec::with_rho(b, slopes.clone(), g1, e, lambda.clone(), rho);
                let model = build_two_band(&spec).unwrap();
                if !well_separated(&model) {
                    continue 'draw;
                }
                return spec;
            }
        }
    }
}

/// All diabatic crossing times pairwise at least 0.05 apart.
fn well_separated(model: &MlzModel) -> bool {
    let n = model.n();
    let mut times = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if let Some(t) = model.crossing_time(a, b) {
                times.push(t);
            }
        }
    }
    times.sort_by(f64::total_cmp);
    times.windows(2).all(|w| w[1] - w[0] > 0.05)
}

/// Random bowtie spec with `kappa = 0`, avoiding `beta = +-1/2` where a band
/// slope would equal `+-b`.
pub fn random_bowtie(rng: &mut ChaCha8Rng, band: usize) -> BowtieSpec {
    loop {
        let betas: Vec<f64> = (0..band)
            .map(|k| {
                let mag = rng.gen_range(0.6..3.0);
                if k == 0 || rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        if betas.iter().all(|&b| b > 0.0) {
            continue;
        }
        let distinct_slopes = betas
            .iter()
            .enumerate()
            .all(|(i, &x)| betas[..i].iter().all(|&y| (x - y).abs() > 0.05 && (x * y - 0.25).abs() > 0.05));
        if !distinct_slopes {
            continue;
        }
        let gammas: Vec<f64> = (0..band).map(|_| rng.gen_range(0.1..0.8)).collect();
        let a = rng.gen_range(0.5..2.0);
        let e = rng.gen_range(0.2..2.0);
        let last_neg = betas.iter().rposition(|&b| b < 0.0).unwrap();
        let Ok(spec) = (BowtieSpec { betas, gammas, a, e }).close_kappa(last_neg) else { continue };
        if spec.gammas[last_neg] > 0.05 {
            return spec;
        }
    }
}

/// Named models used by the structural and integrability tests.
pub fn corpus() -> Vec<(String, MlzModel)> {
    use mlz::families::{build_2x3, build_dtcm};
    let mut out = Vec::new();
    for case in 1..=8 {
        out.push((format!("five-state case {case}"), build_two_band(&five_state_case(case)).unwrap()));
    }
    out.push(("fig3a g=0.2".into(), fig3a(0.2)));
    out.push(("fig5 g=0.22".into(), build_two_band(&fig5_spec(0.22)).unwrap()));
    out.push(("fig6 g=0.15".into(), build_two_band(&fig6_spec(0.15)).unwrap()));
    for n in 5..=10 {
        out.push((format!("fig1 N={n}"), build_two_band(&fig1_spec(n)).unwrap()));
    }
    out.push(("dtcm".into(), build_dtcm(&fig7a()).unwrap()));
    out.push(("2x3".into(), build_2x3(&fig7b()).unwrap()));
    out
}
