mod common;

use common::*;
use mlz::families::build_two_band;
use mlz::integrability::{
    check_ic1, check_ic2_perturbative, fundamental_cycles, ic_report, AREA_TOL, PERTURBATIVE_TOL,
};
use mlz::phases::{arg_gamma, dynamical_phase, stokes_phase};
use mlz::MlzModel;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

fn passes(m: &MlzModel) -> bool {
    ic_report(m).map(|r| r.pass).unwrap_or(false)
}

#[test]
fn corpus_satisfies_both_conditions() {
    for (name, m) in corpus() {
        let areas = check_ic1(&m).unwrap();
        assert!(!areas.is_empty(), "{name}: no loops");
        for l in &areas {
            assert!(l.relative < AREA_TOL, "{name}: loop {:?} relative area {:e}", l.cycle, l.relative);
        }
        for r in check_ic2_perturbative(&m).unwrap() {
            assert!(r.residual < PERTURBATIVE_TOL, "{name}: pair {:?} residual {:e}", r.pair, r.residual);
        }
        let rep = ic_report(&m).unwrap();
        assert!(rep.pass, "{name}: {:?}", rep.notes);
    }
}

/// Every single coupling, slope and offset moved by 1% of its magnitude (or of
/// the model scale when it is zero).
fn single_parameter_violations(m: &MlzModel) -> Vec<(String, MlzModel)> {
    let n = m.n();
    let scale = m.slopes().iter().chain(m.offsets()).fold(0.0_f64, |a, x| a.max(x.abs()));
    let nudge = |x: f64| if x != 0.0 { x * 1.01 } else { 0.01 * scale };
    let mut out = Vec::new();
    for (a, b) in m.coupled_pairs() {
        out.push((format!("g{}_{}", a + 1, b + 1), m.with_coupling(a, b, nudge(m.coupling(a, b))).unwrap()));
    }
    for a in 0..n {
        out.push((format!("e{}", a + 1), m.with_offset(a, nudge(m.offsets()[a])).unwrap()));
        let mut slopes = m.slopes().to_vec();
        slopes[a] = nudge(slopes[a]);
        if let Ok(v) = MlzModel::new(slopes, m.offsets().to_vec(), m.couplings().clone()) {
            out.push((format!("b{}", a + 1), v));
        }
    }
    out
}

#[test]
fn one_percent_violations_fail() {
    for (name, m) in corpus() {
        for (param, v) in single_parameter_violations(&m) {
            assert!(!passes(&v), "{name}: changing {param} by 1% still passes");
        }
    }
}

#[test]
fn flipping_one_band_sign_fails() {
    for case in 1..=8 {
        let spec = five_state_case(case);
        for k in 0..3 {
            let mut s = spec.clone();
            s.tau[k] = -s.tau[k];
            let g2 = s.g2();
            let m = build_two_band(&spec).unwrap().with_coupling(1, k + 2, g2[k]).unwrap();
            assert!(!passes(&m), "case {case} band {k}");
        }
    }
}

#[test]
fn dynamical_phase_is_chain_independent() {
    for (name, m) in corpus() {
        for cycle in fundamental_cycles(&m) {
            let mut closed = cycle.clone();
            closed.push(cycle[0]);
            let total = dynamical_phase(&m, &closed).unwrap();
            let scale: f64 = closed.windows(2).map(|w| dynamical_phase(&m, w).unwrap().abs()).sum();
            assert!(total.abs() <= 1e-10 * scale.max(1.0), "{name}: loop {cycle:?} phase {total:e}");
            // the two arcs of the loop between its first level and any other
            for split in 1..cycle.len() {
                let forward = dynamical_phase(&m, &closed[..=split]).unwrap();
                let mut back: Vec<usize> = closed[split..].to_vec();
                back.reverse();
                let backward = dynamical_phase(&m, &back).unwrap();
                assert!((forward - backward).abs() <= 1e-10 * scale.max(1.0), "{name}: {cycle:?} split {split}");
            }
        }
    }
}

#[test]
fn dynamical_phase_rejects_missing_links() {
    let m = fig3a(0.2);
    assert!(dynamical_phase(&m, &[0, 1]).is_err());
    assert!(dynamical_phase(&m, &[2, 3]).is_err());
    assert!(dynamical_phase(&m, &[0, 2, 1]).is_ok());
}

#[test]
fn zero_offsets_are_flagged() {
    let mut spec = fig3a_spec(0.2);
    spec.e = 0.0;
    let rep = ic_report(&build_two_band(&spec).unwrap()).unwrap();
    assert!(rep.ic1_pass);
    assert!(!rep.ic2_pass);
    assert!(!rep.notes.is_empty());
}

#[test]
fn stokes_phase_oracle() {
    // arg Gamma(-i y), 30-digit reference values
    let oracle = [
        (0.1, 1.62811926721162),
        (0.5, 1.81485462570032),
        (1.0, 1.87243664726243),
        (3.0, 0.517445555726283),
        (10.0, 0.334253966924169),
    ];
    for (y, want) in oracle {
        let got = arg_gamma(Complex64::new(0.0, -y));
        assert!((got - want).abs() < 1e-12, "y={y}: {got} vs {want}");
        let (plus, minus) = stokes_phase(y);
        assert!((plus - (FRAC_PI_4 - want)).abs() < 1e-12);
        assert_eq!(minus, -plus);
        let (p2, m2) = stokes_phase(-y);
        assert_eq!((p2, m2), (minus, plus));
    }
    assert_eq!(stokes_phase(0.0), (0.0, 0.0));
}
