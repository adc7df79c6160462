//! Verification suites behind `verify`: projection certification, field
//! identities of `Γ₁` on random fields, and transcription audits.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{audit_map, audit_model, build_model, example_grid, example_params, model_dim, model_ids};
use crate::catalog::{AuditMap, AuditReport};
use crate::error::{Error, Result};
use crate::field::{inner_product, ComponentField, Representation};
use crate::grid::SpacetimeGrid;
use crate::projections::{certify, family_by_name, ProjectionFamily, ProjectionReport};
use crate::C64;

/// Short names accepted by [`family_by_name`].
pub const BUILTIN_FAMILIES: [&str; 9] = ["G", "N", "S", "Y", "EM", "BGK", "Gs", "Kl", "Dp"];

/// Every distinct family: the built-ins in three dimensions, then each
/// catalog `Γ₁` not already listed, keyed by name.
pub fn all_families() -> Result<Vec<ProjectionFamily>> {
    let mut out: Vec<ProjectionFamily> =
        BUILTIN_FAMILIES.iter().map(|n| family_by_name(n, 3, 3).expect("built-in name")).collect();
    for id in model_ids() {
        let grid = Arc::new(example_grid(id, &[2, 2, 2], 2)?);
        let d = model_dim(id, &grid)?;
        let model = build_model(id, grid, &example_params(id, d)?)?;
        if !out.iter().any(|f| f.name() == model.gamma.name()) {
            out.push(model.gamma);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCheck {
    #[serde(flatten)]
    pub report: ProjectionReport,
    pub injected_fault: bool,
    pub passed: bool,
}

/// Certify the selected families (all when `names` is `None`) at `samples`
/// dual points each. `faulty` scales one family by 1.1 first.
pub fn family_suite(
    names: Option<&[String]>,
    samples: usize,
    tol: f64,
    faulty: Option<&str>,
) -> Result<Vec<FamilyCheck>> {
    let all = all_families()?;
    let find = |n: &str| all.iter().find(|f| f.name() == n).cloned().ok_or_else(|| Error::UnknownFamily(n.into()));
    let chosen: Vec<ProjectionFamily> = match names {
        Some(ns) => ns.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => all.clone(),
    };
    if let Some(f) = faulty {
        if !chosen.iter().any(|c| c.name() == f) {
            return Err(Error::UnknownFamily(f.into()));
        }
    }
    Ok(chosen
        .into_par_iter()
        .map(|fam| {
            let injected = faulty == Some(fam.name());
            let fam = if injected { fam.scaled(1.1).with_name(fam.name().to_string()) } else { fam };
            let report = certify(&fam, samples);
            let passed = report.passes(tol);
            FamilyCheck { report, injected_fault: injected, passed }
        })
        .collect())
}

/// Uniform complex entries in `[-1, 1]²` on every point and component.
pub fn random_field(grid: &Arc<SpacetimeGrid>, labels: Vec<String>, seed: u64) -> Result<ComponentField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.npts() * labels.len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComponentField::new(grid.clone(), labels, values, Representation::Real)
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldCheck {
    pub model: String,
    pub tag: String,
    pub family: String,
    /// `|(a, Γ₁b) − (Γ₁a, b)| / (‖a‖‖b‖)`.
    pub self_adjointness: f64,
    /// `|(Γ₁a, Γ₂b)| / (‖Γ₁a‖‖Γ₂b‖)`.
    pub orthogonality: f64,
    pub passed: bool,
}

/// Grid for the field checks: `spatial` lengths, momentum axes where the
/// model needs them, and `nt` time steps unless the model has no time.
pub fn field_grid(id: &str, spatial: &[usize], nt: usize) -> Result<Arc<SpacetimeGrid>> {
    Ok(Arc::new(example_grid(id, spatial, nt)?))
}

pub fn field_check(id: &str, spatial: &[usize], nt: usize, seed: u64, tol: f64) -> Result<FieldCheck> {
    let grid = field_grid(id, spatial, nt)?;
    let d = model_dim(id, &grid)?;
    let model = build_model(id, grid.clone(), &example_params(id, d)?)?;
    let gamma = model.gamma.on_grid(&grid);
    let a = random_field(&grid, model.e_labels(), seed)?;
    let b = random_field(&grid, model.e_labels(), seed.wrapping_add(1))?;
    let ga = gamma.apply(&a)?;
    let gb = gamma.apply(&b)?;
    let sym = (inner_product(&a, &gb)? - inner_product(&ga, &b)?).norm() / (a.norm() * b.norm());
    let jb = b.sub(&gb)?;
    let orth = inner_product(&ga, &jb)?.norm() / (ga.norm() * jb.norm()).max(f64::MIN_POSITIVE);
    Ok(FieldCheck {
        model: id.to_string(),
        tag: model.tag.clone(),
        family: model.gamma.name().to_string(),
        self_adjointness: sym,
        orthogonality: orth,
        passed: sym <= tol && orth <= tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    #[serde(flatten)]
    pub report: AuditReport,
    pub passed: bool,
}

/// Rebuild every selected model from its coordinate map on a small grid.
/// Returns the per-model reports and the maps at the first grid point.
pub fn audit_suite(ids: &[String], spatial: &[usize], nt: usize) -> Result<(Vec<AuditCheck>, Vec<AuditMap>)> {
    let mut checks = Vec::new();
    let mut maps = Vec::new();
    for id in ids {
        let grid = field_grid(id, spatial, nt)?;
        let d = model_dim(id, &grid)?;
        let model = build_model(id, grid, &example_params(id, d)?)?;
        let report = audit_model(&model);
        let map = audit_map(&model, 0);
        let passed = report.passes() && map.nonzero.iter().all(|e| !e.terms.is_empty());
        checks.push(AuditCheck { report, passed });
        maps.push(map);
    }
    Ok((checks, maps))
}
