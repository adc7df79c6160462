//! The five subcommands. Each returns an [`Outcome`]: an exit code, a
//! structured report and a short human-readable rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Method, RunConfig, SourceProfile};
use super::fieldfile::{read_field_for, write_atomic, write_field};
use super::suite::{audit_suite, family_suite, field_check};
use crate::catalog::{describe, model_ids, model_tag, GridNeeds, PhysicsModel, Profile};
use crate::error::{Error, Result};
use crate::field::{apply_medium, ComponentField};
use crate::grid::{Axis, SpacetimeGrid};
use crate::solver::{
    dispersion_scan, krylov_solve_restarted, manufactured_problem, manufactured_problem_with, neumann_solve,
    reconstruct_potential, CanonicalProblem, SolveReport, DEFAULT_RESTART,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub text: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn write_report(cfg: &RunConfig, report: &Value) -> Result<Option<PathBuf>> {
    let Some(p) = &cfg.output.report else { return Ok(None) };
    let path = cfg.resolve(p, true);
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    write_atomic(&path, text.as_bytes())?;
    Ok(Some(path))
}

pub fn cmd_catalog() -> Result<Outcome> {
    let infos = model_ids().into_iter().map(describe).collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for m in &infos {
        let grid = match m.needs {
            GridNeeds::Time => "time",
            GridNeeds::NoTime => "no time axis",
            GridNeeds::PhaseSpace => "time + momentum axes",
        };
        let _ = writeln!(text, "{:<28} tag {:<9} Γ₁ {:<10} grid: {grid}", m.id, m.tag, m.gamma);
        let _ = writeln!(text, "    {}", m.summary);
        let e: Vec<String> = m.e_blocks.iter().map(|(n, s)| format!("{n}:{s}")).collect();
        let j: Vec<String> = m.j_blocks.iter().map(|(n, s)| format!("{n}:{s}")).collect();
        let _ = writeln!(text, "    E [{}]  J [{}]  sources [{}]", e.join(" "), j.join(" "), m.source_slots.join(" "));
        for p in &m.params {
            let req = if p.required { "required".to_string() } else { format!("default {}", p.default) };
            let _ = writeln!(text, "    {:<10} {:<16} {req:<16} {}", p.name, format!("{:?}", p.kind), p.doc);
        }
    }
    Ok(Outcome { code: EXIT_OK, report: json!({ "models": to_value(&infos) }), text })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let v = &cfg.verify;
    if v.grid.is_empty() || v.samples == 0 {
        return Err(Error::Config("verify.grid and verify.samples must be nonempty".into()));
    }
    let families = family_suite(v.families.as_deref(), v.samples, v.projection_tol, v.faulty.as_deref())?;
    let ids: Vec<String> = match &v.models {
        Some(ids) => {
            for id in ids {
                if !model_ids().contains(&id.as_str()) {
                    return Err(Error::UnknownModel(id.clone()));
                }
            }
            ids.clone()
        }
        None => model_ids().into_iter().map(String::from).collect(),
    };
    let mut fields = Vec::new();
    if v.field_tests {
        for (i, id) in ids.iter().enumerate() {
            fields.push(field_check(id, &v.grid, v.nt, cfg.seed.wrapping_add(2 * i as u64), v.field_tol)?);
        }
    }
    let (audits, maps) = if v.audit { audit_suite(&ids, &[2, 2], 2)? } else { (Vec::new(), Vec::new()) };
    let mut audit_path = None;
    if let Some(p) = &cfg.output.audit {
        let path = cfg.resolve(p, true);
        write_atomic(&path, serde_json::to_string_pretty(&maps).expect("maps serialize").as_bytes())?;
        audit_path = Some(path);
    }

    let mut failures = Vec::new();
    let mut text = String::new();
    for f in &families {
        let r = &f.report;
        let _ = writeln!(
            text,
            "{} family {:<10} hermiticity {:.2e} idempotency {:.2e} factorization {} ({} duals)",
            if f.passed { "PASS" } else { "FAIL" },
            r.family,
            r.hermiticity,
            r.idempotency,
            r.factorization.map_or("n/a".into(), |x| format!("{x:.2e}")),
            r.samples
        );
        if !f.passed {
            failures.push(format!("family {}", r.family));
        }
    }
    for f in &fields {
        let _ = writeln!(
            text,
            "{} fields {:<28} self-adjointness {:.2e} orthogonality {:.2e}",
            if f.passed { "PASS" } else { "FAIL" },
            f.model,
            f.self_adjointness,
            f.orthogonality
        );
        if !f.passed {
            failures.push(format!("fields {}", f.model));
        }
    }
    for a in &audits {
        let r = &a.report;
        let _ = writeln!(
            text,
            "{} audit  {:<28} tag {:<9} {}/{} entries covered, {} mismatched points",
            if a.passed { "PASS" } else { "FAIL" },
            r.model,
            r.tag,
            r.covered_entries,
            r.nonzero_entries,
            r.mismatched_points
        );
        if !a.passed {
            failures.push(format!("audit {}", r.model));
        }
    }
    let code = if failures.is_empty() { EXIT_OK } else { EXIT_VERIFY_FAILED };
    if !failures.is_empty() {
        let _ = writeln!(text, "verification failed: {}", failures.join(", "));
    }
    let report = json!({
        "command": "verify",
        "seed": cfg.seed,
        "passed": failures.is_empty(),
        "failures": failures,
        "families": to_value(&families),
        "fields": to_value(&fields),
        "audits": to_value(&audits),
        "audit_file": audit_path,
    });
    write_report(cfg, &report)?;
    Ok(Outcome { code, report, text })
}

fn solve(model: &PhysicsModel, source: ComponentField, cfg: &RunConfig) -> Result<(ComponentField, SolveReport)> {
    let s = &cfg.solver;
    s.validate()?;
    let problem = CanonicalProblem::new(model, source, s.reference())?;
    match s.method {
        Method::Krylov => krylov_solve_restarted(&problem, s.tol, s.max_iter, s.restart.unwrap_or(DEFAULT_RESTART)),
        Method::Neumann => neumann_solve(&problem, s.tol, s.max_iter),
    }
}

fn relative_error(e: &ComponentField, exact: &ComponentField) -> Result<f64> {
    Ok(e.sub(exact)?.norm() / exact.norm().max(f64::MIN_POSITIVE))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    cfg.solver.validate()?;
    let spec = cfg.source.as_ref().ok_or_else(|| Error::Config("missing [source] section".into()))?;
    let mut exact = None;
    let source = match spec.profile {
        SourceProfile::Manufactured => {
            let mp = manufactured_problem_with(&model, cfg.seed, spec.max_mode, spec.window)?;
            exact = Some(mp.e_exact);
            mp.source
        }
        SourceProfile::File => {
            let p = spec.path.as_ref().ok_or_else(|| Error::Config("source.path is required for file sources".into()))?;
            read_field_for(&cfg.resolve(p, false), model.grid(), &model.j_labels())?
        }
        _ => spec.analytic(&model)?,
    };
    let (e, solve_report) = solve(&model, source.clone(), cfg)?;

    let mut outputs = Vec::new();
    let e_path = cfg.resolve(cfg.output.e.as_deref().unwrap_or(Path::new("E.cf")), true);
    write_field(&e_path, &e)?;
    outputs.push(e_path);
    if let Some(p) = &cfg.output.j {
        let j = apply_medium(&model.medium, &e)?.sub(&source)?.with_labels(model.j_labels())?;
        let path = cfg.resolve(p, true);
        write_field(&path, &j)?;
        outputs.push(path);
    }
    let mut potential_note = None;
    if let Some(p) = &cfg.output.psi {
        match reconstruct_potential(&model.gamma, &e) {
            Ok(r) => {
                let path = cfg.resolve(p, true);
                write_field(&path, &r.psi)?;
                outputs.push(path);
            }
            Err(err) => potential_note = Some(err.to_string()),
        }
    }
    if let (Some(p), Some(ex)) = (&cfg.output.e_exact, &exact) {
        let path = cfg.resolve(p, true);
        write_field(&path, ex)?;
        outputs.push(path);
    }
    let error = exact.as_ref().map(|ex| relative_error(&e, ex)).transpose()?;

    let code = if solve_report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    let mut text = format!(
        "{} `{}` (tag {}) {}: {} iterations, residual {:.3e}, constraint defect {:.3e}, c = {}\n",
        if solve_report.converged { "solved" } else { "NOT CONVERGED" },
        model.id,
        model.tag,
        solve_report.method,
        solve_report.iterations,
        solve_report.final_residual,
        solve_report.constraint_defect,
        solve_report.reference.c
    );
    if let Some(err) = error {
        let _ = writeln!(text, "relative error against the manufactured solution {err:.3e}");
    }
    if let Some(n) = &potential_note {
        let _ = writeln!(text, "potential not written: {n}");
    }
    for p in &outputs {
        let _ = writeln!(text, "wrote {}", p.display());
    }
    let report = json!({
        "command": "solve",
        "model": model.id,
        "tag": model.tag,
        "seed": cfg.seed,
        "grid": model.grid().shape(),
        "source": format!("{:?}", spec.profile).to_lowercase(),
        "solve": to_value(&solve_report),
        "error": error,
        "potential_note": potential_note,
        "outputs": outputs,
    });
    write_report(cfg, &report)?;
    Ok(Outcome { code, report, text })
}

#[derive(Debug, Clone, Serialize)]
pub struct MmsRow {
    pub grid: Vec<usize>,
    pub contrast: f64,
    pub iterations: usize,
    pub error: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Spatial lengths then (unless the model has no time) the time length.
fn mms_grid(needs: GridNeeds, dims: &[usize], spacing: f64, dt: f64) -> Result<Arc<SpacetimeGrid>> {
    let (spatial, nt) = match needs {
        GridNeeds::NoTime => (dims, None),
        _ => match dims.split_last() {
            Some((nt, s)) if !s.is_empty() => (s, Some(*nt)),
            _ => return Err(Error::Config(format!("mms grid {dims:?} needs spatial lengths and a time length"))),
        },
    };
    let mut axes: Vec<Axis> = spatial.iter().map(|&n| Axis::spatial(n, spacing)).collect();
    if needs == GridNeeds::PhaseSpace {
        axes.extend(spatial.iter().map(|&n| Axis::momentum(n, 0.5)));
    }
    if let Some(nt) = nt {
        axes.push(Axis::time(nt, dt));
    }
    SpacetimeGrid::new(axes).map(Arc::new).map_err(|e| Error::Config(e.to_string()))
}

/// Default time step of `mms` grids, chosen so no discrete frequency of a
/// unit-speed wave sits on a resonance of the periodic grid.
pub const MMS_DEFAULT_DT: f64 = 0.37;

pub fn cmd_mms(cfg: &RunConfig) -> Result<Outcome> {
    let mms = cfg.mms.as_ref().ok_or_else(|| Error::Config("missing [mms] section".into()))?;
    if mms.grids.is_empty() || mms.contrasts.is_empty() {
        return Err(Error::Config("mms.grids and mms.contrasts must be nonempty".into()));
    }
    let ms = cfg.model_spec()?;
    let needs = describe(&ms.id)?.needs;
    cfg.solver.validate()?;
    let mut rows = Vec::new();
    for dims in &mms.grids {
        let grid = mms_grid(needs, dims, mms.spacing, mms.dt.unwrap_or(MMS_DEFAULT_DT))?;
        let base = ms.record(&grid)?;
        if base.get(&mms.parameter).is_none() {
            return Err(Error::Config(format!("mms.parameter `{}` has no value in [model]", mms.parameter)));
        }
        for &contrast in &mms.contrasts {
            let rec = if contrast == 0.0 {
                base.clone()
            } else {
                base.clone().modulate(&mms.parameter, contrast, Profile::Cosine { axis: mms.axis, mode: mms.mode })
            };
            let model = crate::catalog::build_model(&ms.id, grid.clone(), &rec)?;
            let mp = manufactured_problem(&model, cfg.seed, mms.max_mode)?;
            let (e, r) = solve(&model, mp.source, cfg)?;
            rows.push(MmsRow {
                grid: dims.clone(),
                contrast,
                iterations: r.iterations,
                error: relative_error(&e, &mp.e_exact)?,
                residual: r.final_residual,
                converged: r.converged,
            });
        }
    }
    let all_converged = rows.iter().all(|r| r.converged);
    let mut text = format!("{:<16} {:>9} {:>10} {:>12} {:>12}\n", "grid", "contrast", "iterations", "error", "residual");
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<16} {:>9.3} {:>10} {:>12.3e} {:>12.3e}{}",
            format!("{:?}", r.grid),
            r.contrast,
            r.iterations,
            r.error,
            r.residual,
            if r.converged { "" } else { "  not converged" }
        );
    }
    let report = json!({
        "command": "mms",
        "model": ms.id,
        "tag": model_tag(&ms.id),
        "seed": cfg.seed,
        "parameter": mms.parameter,
        "rows": to_value(&rows),
    });
    write_report(cfg, &report)?;
    Ok(Outcome { code: if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED }, report, text })
}

pub fn cmd_dispersion(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.dispersion.as_ref().ok_or_else(|| Error::Config("missing [dispersion] section".into()))?;
    let model = cfg.model()?;
    if !model.medium.is_constant() {
        return Err(Error::Config(format!("dispersion needs constant parameters; `{}` varies over the grid", model.id)));
    }
    let scan = dispersion_scan(&model, &spec.k, (spec.omega[0], spec.omega[1]), spec.samples)
        .map_err(|e| Error::Config(e.to_string()))?;
    let empty_range = scan.samples.iter().all(|s| s.sigma_min.is_none());
    let mut text = format!("`{}` (tag {}) at k = {:?}\n", model.id, model.tag, spec.k);
    if empty_range {
        text.push_str("range of Γ₁ is empty at every sampled ω\n");
    }
    for r in &scan.roots {
        let _ = writeln!(text, "root ω = {:.9} (σ_min {:.2e})", r.omega, r.sigma_min);
    }
    if scan.roots.is_empty() && !empty_range {
        text.push_str("no roots in range\n");
    }
    let report = json!({
        "command": "dispersion",
        "model": model.id,
        "tag": model.tag,
        "empty_range": empty_range,
        "scan": to_value(&scan),
    });
    write_report(cfg, &report)?;
    Ok(Outcome { code: EXIT_OK, report, text })
}
