use std::path::PathBuf;

use mlz::families::{build_bowtie_family, two_band_residuals, two_band_spec_from_model};
use mlz::integrability::ic_report;
use mlz::semiclassics::{closed_form_oracle, ClosedForm};
use mlz::spec::ModelSpec;
use mlz::spectra::{adiabatic_energies, auto_window, locate_crossings, uniform_grid, CrossingKind};
use mlz::sweep::{sweep, sweep_csv, transition_matrix, MatrixMethod};
use mlz::{check_mtlz, pullback_contour, TransitionMatrix};
use serde_json::{json, Value};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::CliError;

/// Residual threshold for the two-band constraints of a pulled-back model.
const PULLBACK_TOL: f64 = 1e-10;

/// Files go to the output directory when one is given; otherwise the primary
/// artifact is printed to stdout. Summaries always go to stderr.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    fn emit(&self, name: &str, contents: &str, primary: bool) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => std::fs::write(d.join(name), contents)?,
            None if primary => print!("{contents}"),
            None => {}
        }
        Ok(())
    }

    fn emit_json(&self, name: &str, value: &Value, primary: bool) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable report");
        s.push('\n');
        self.emit(name, &s, primary)
    }
}

fn report(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Value::Object(head), Value::Object(rest)) = (&mut v, body) {
        head.extend(rest);
    }
    v
}

fn bowtie(cfg: &RunConfig) -> Result<&mlz::families::BowtieSpec, CliError> {
    match cfg.model()? {
        ModelSpec::Bowtie(s) => Ok(s),
        other => Err(CliError::Config(format!("this command needs a bowtie model, got '{}'", other.family_name()))),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn validate(cfg: &RunConfig, out: &Output) -> Result<u8, CliError> {
    let model = cfg.model()?.build()?;
    let rep = ic_report(&model)?;
    out.emit_json(
        "ic_report.json",
        &report("validate", json!({ "family": cfg.model()?.family_name(), "report": rep })),
        true,
    )?;
    let max_area = rep.loop_areas.iter().map(|l| l.relative).fold(0.0, f64::max);
    let max_res = rep.perturbative_residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    eprintln!("loop areas: {} loops, max relative {max_area:.3e} ({})", rep.loop_areas.len(), verdict(rep.ic1_pass));
    eprintln!(
        "zero-coupling crossings: {} pairs, max residual {max_res:.3e} ({})",
        rep.perturbative_residuals.len(),
        verdict(rep.ic2_pass)
    );
    for n in &rep.notes {
        eprintln!("note: {n}");
    }
    Ok(if rep.pass { 0 } else { 1 })
}

fn parse_method(name: &str) -> Result<MatrixMethod, CliError> {
    match name {
        "semiclassical" => Ok(MatrixMethod::Semiclassical),
        "scattering" => Ok(MatrixMethod::Scattering),
        "numeric" => Ok(MatrixMethod::Numeric),
        _ => Err(CliError::Config(format!("unknown method '{name}' (semiclassical, scattering, numeric, all)"))),
    }
}

fn method_name(m: MatrixMethod) -> &'static str {
    match m {
        MatrixMethod::Semiclassical => "semiclassical",
        MatrixMethod::Scattering => "scattering",
        MatrixMethod::Numeric => "numeric",
    }
}

pub fn probabilities(cfg: &RunConfig, method: Option<&str>, out: &Output) -> Result<u8, CliError> {
    if let Some(req) = &cfg.closed_form {
        return closed_form(req, out);
    }
    let spec = cfg.model()?;
    let method = method.or(cfg.method.as_deref()).unwrap_or("semiclassical");
    let methods = if method == "all" {
        vec![MatrixMethod::Semiclassical, MatrixMethod::Scattering, MatrixMethod::Numeric]
    } else {
        vec![parse_method(method)?]
    };
    let mut matrices: Vec<(MatrixMethod, TransitionMatrix)> = Vec::new();
    for m in methods {
        let p = transition_matrix(spec, m, &cfg.propagation)?;
        out.emit(&format!("P_{}.csv", method_name(m)), &p.to_csv(), false)?;
        matrices.push((m, p));
    }
    let mut body = json!({
        "family": spec.family_name(),
        "orientation": "rows are final levels, columns initial levels",
        "matrices": matrices.iter().map(|(m, p)| (method_name(*m).to_string(), json!(p))).collect::<serde_json::Map<_, _>>(),
    });
    let mut code = 0;
    if matrices.len() == 3 {
        let sc = &matrices[0].1;
        let scattering = matrices[1].1.max_abs_diff(sc);
        let numeric = matrices[2].1.max_abs_diff(sc);
        let pass = numeric <= cfg.tolerance && scattering <= 1e-12;
        body["summary"] = json!({
            "max_numeric_vs_semiclassical": numeric,
            "max_scattering_vs_semiclassical": scattering,
            "tolerance": cfg.tolerance,
            "pass": pass,
        });
        eprintln!("max |numeric - semiclassical| = {numeric:.3e} (tolerance {:.1e})", cfg.tolerance);
        eprintln!("max |scattering - semiclassical| = {scattering:.3e}");
        if !pass {
            code = 3;
        }
    }
    for (m, p) in &matrices {
        eprintln!("{}: stochastic error {:.1e}", method_name(*m), p.stochastic_error());
    }
    out.emit_json("probabilities.json", &report("probabilities", body), true)?;
    Ok(code)
}

fn closed_form(req: &crate::config::ClosedFormRequest, out: &Output) -> Result<u8, CliError> {
    let body = match closed_form_oracle(req.case, &req.p)? {
        ClosedForm::Matrix(p) => {
            out.emit("P_closed_form.csv", &p.to_csv(), false)?;
            json!({ "case": req.case, "p": req.p, "matrix": p })
        }
        ClosedForm::FromLevel { initial, probabilities } => {
            let mut csv = format!("final,from_{}\n", initial + 1);
            for (k, x) in probabilities.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", k + 1, mlz::transition::fmt_real(*x)));
            }
            out.emit("P_closed_form.csv", &csv, false)?;
            json!({ "case": req.case, "p": req.p, "initial": initial + 1, "probabilities": probabilities })
        }
    };
    out.emit_json("probabilities.json", &report("probabilities", body), true)?;
    Ok(0)
}

pub fn spectrum(cfg: &RunConfig, out: &Output) -> Result<u8, CliError> {
    let model = cfg.model()?.build()?;
    let options = cfg.spectrum.crossing_options();
    let (t0, t1) = options.window.unwrap_or_else(|| auto_window(&model));
    let tracks = adiabatic_energies(&model, &uniform_grid(t0, t1, cfg.spectrum.track_points));
    out.emit("tracks.csv", &tracks.to_csv(), false)?;
    let crossings = locate_crossings(&model, &options)?;
    let exact = crossings.iter().filter(|c| c.kind == CrossingKind::Exact).count();
    let expected = model.uncoupled_crossing_pairs().len();
    let body = json!({
        "family": cfg.model()?.family_name(),
        "window": [t0, t1],
        "exact_count": exact,
        "expected_count": expected,
        "crossings": crossings,
    });
    out.emit_json("crossings.json", &report("spectrum", body), true)?;
    eprintln!("exact crossings: {exact} (expected {expected})");
    Ok(if exact == expected { 0 } else { 1 })
}

pub fn run_sweep(cfg: &RunConfig, method: Option<&str>, out: &Output) -> Result<u8, CliError> {
    let spec = cfg.model()?;
    let axes = cfg.axes()?;
    if axes.is_empty() {
        return Err(CliError::Config("sweep needs at least one axis".into()));
    }
    let method = parse_method(method.or(cfg.method.as_deref()).unwrap_or("semiclassical"))?;
    let rows = sweep(spec, &axes, method, &cfg.propagation)?;
    let n = match rows.iter().find_map(|r| r.matrix.as_ref()) {
        Some(m) => m.n(),
        None => spec.build()?.n(),
    };
    out.emit("sweep.csv", &sweep_csv(&axes, n, &rows), true)?;
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    eprintln!("{} points, {} failed ({})", rows.len(), failed.len(), method_name(method));
    for r in &failed {
        eprintln!("point {}: {}", r.index, r.error.as_deref().unwrap_or_default());
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

pub fn pullback(cfg: &RunConfig, out: &Output) -> Result<u8, CliError> {
    let spec = bowtie(cfg)?;
    let family = build_bowtie_family(spec)?;
    let (v, eps) = match &cfg.contour {
        Some(c) => (c.v.clone(), c.eps.clone()),
        None => {
            let (v, eps) = spec.contour();
            (v.to_vec(), eps.to_vec())
        }
    };
    let model = pullback_contour(&family, &v, &eps)?;
    let generated = RunConfig::for_model(ModelSpec::Raw((&model).into()));
    out.emit_json("model.json", &serde_json::to_value(&generated).expect("serializable config"), false)?;
    let residuals = two_band_residuals(&model)?;
    let pass = residuals.passes(PULLBACK_TOL);
    let recovered = two_band_spec_from_model(&model, PULLBACK_TOL);
    let body = json!({
        "contour": { "v": v, "eps": eps },
        "model": generated.model,
        "residuals": residuals,
        "tolerance": PULLBACK_TOL,
        "pass": pass,
        "two_band": recovered.as_ref().ok(),
    });
    out.emit_json("residuals.json", &report("pullback", body), true)?;
    eprintln!(
        "two-band residuals: structure {:.1e}, offsets {:.1e}, closure {:.1e}, couplings {:.1e} ({})",
        residuals.structure,
        residuals.offsets,
        residuals.closure,
        residuals.coupling_ratio,
        verdict(pass)
    );
    Ok(if pass { 0 } else { 1 })
}

pub fn mtlz_check(cfg: &RunConfig, out: &Output) -> Result<u8, CliError> {
    let family = build_bowtie_family(bowtie(cfg)?)?;
    let rep = check_mtlz(&family);
    out.emit_json("mtlz_report.json", &report("mtlz-check", json!({ "report": rep })), true)?;
    eprintln!(
        "commutators: B {:.1e}, mixed {:.1e}, A {:.1e}; gamma relation {:.1e} ({})",
        rep.b_commutators,
        rep.mixed_commutators,
        rep.a_commutators,
        rep.gamma_relation,
        verdict(rep.pass)
    );
    Ok(if rep.pass { 0 } else { 1 })
}
