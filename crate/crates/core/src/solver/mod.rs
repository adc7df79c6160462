//! Reference-medium solution of `J = L E − s`, `Γ₁E = E`, `Γ₁J = 0`.
//!
//! Splitting `L = cI + δL` and applying `Γ₁` gives
//! `E + (1/c) Γ₁(δL E) = (1/c) Γ₁ s` on the range of `Γ₁`. Operators act in
//! dual space: the unknown is `Ê`, and `δL` is applied after an inverse
//! transform.

use std::collections::HashSet;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::PhysicsModel;
use crate::error::{Error, Result};
use crate::field::{apply_medium, ComponentField, MediumField, Representation};
use crate::projections::{ProjectionFamily, ProjectionOperator};
use crate::C64;

mod dispersion;
mod krylov;
mod manufactured;
mod potential;

pub use krylov::DEFAULT_RESTART;
pub use dispersion::{dispersion_scan, DispersionRoot, DispersionScan, DispersionSample};
pub use manufactured::{manufactured_problem, manufactured_problem_with, ManufacturedProblem};
pub use potential::{apply_symbol, reconstruct_potential, PotentialResult};

/// Relative imaginary shift added to the default reference of lossless models.
pub const LOSSLESS_SHIFT: f64 = 0.1;

/// How the reference constant was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    #[serde(serialize_with = "ser_c64")]
    pub c: C64,
    /// Taken from the caller rather than from the medium.
    pub explicit: bool,
    /// A `0.1i·|c|` shift was added for a lossless model.
    pub shifted: bool,
}

pub(crate) fn ser_c64<S: serde::Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

fn hermitian_range(m: &DMatrix<C64>) -> (f64, f64) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let ev = h.symmetric_eigenvalues();
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Mean over grid points of the midpoint of the Hermitian part's eigenvalue
/// range. When the midpoints cancel, the mean half-width is used instead.
/// Lossless models get `+0.1i·|c|`.
pub fn default_reference(model: &PhysicsModel) -> Reference {
    let l = &model.medium;
    let n = l.n();
    let ranges: Vec<(f64, f64)> = if l.is_constant() {
        vec![hermitian_range(&DMatrix::from_row_slice(n, n, l.at(0)))]
    } else {
        (0..l.grid().npts()).into_par_iter().map(|p| hermitian_range(&DMatrix::from_row_slice(n, n, l.at(p)))).collect()
    };
    let count = ranges.len() as f64;
    let mid = ranges.iter().map(|(a, b)| 0.5 * (a + b)).sum::<f64>() / count;
    let half = ranges.iter().map(|(a, b)| 0.5 * (b - a)).sum::<f64>() / count;
    let mut c = if mid.abs() > 1e-12 * half.abs().max(f64::MIN_POSITIVE) { mid } else { half };
    if c == 0.0 {
        c = 1.0;
    }
    if model.lossless {
        Reference { c: C64::new(c, LOSSLESS_SHIFT * c.abs()), explicit: false, shifted: true }
    } else {
        Reference { c: C64::new(c, 0.0), explicit: false, shifted: false }
    }
}

/// Midpoint of the Hermitian eigenvalue range of `U†L(p)U` over every
/// distinct medium value and every dual point with nonzero `k`, where the
/// columns of `U` span `range(Γ₁)`. This is the spectrum the fixed-point
/// iteration actually sees. Lossless models get the same shift as
/// [`default_reference`].
pub fn restricted_reference(model: &PhysicsModel) -> Reference {
    let l = &model.medium;
    let n = l.n();
    let grid = model.grid();
    let mut seen = HashSet::new();
    let media: Vec<DMatrix<C64>> = (0..grid.npts())
        .filter(|&p| seen.insert(l.at(p).iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()]).collect::<Vec<_>>()))
        .map(|p| DMatrix::from_row_slice(n, n, l.at(p)))
        .collect();
    let spatial = grid.spatial_axes();
    let gamma = model.gamma.on_grid(grid);
    let (lo, hi) = (0..grid.npts())
        .into_par_iter()
        .filter(|&q| {
            let idx = grid.unravel(q);
            !spatial.iter().all(|&a| idx[a] == 0)
        })
        .map(|q| {
            let g = DMatrix::from_row_slice(n, n, gamma.at(q));
            let eig = ((&g + g.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
            let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
            let u = DMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
            let mut range = (f64::INFINITY, f64::NEG_INFINITY);
            if cols.is_empty() {
                return range;
            }
            for m in &media {
                let (a, b) = hermitian_range(&(u.adjoint() * m * &u));
                range = (range.0.min(a), range.1.max(b));
            }
            range
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let mut c = if lo.is_finite() { 0.5 * (lo + hi) } else { 1.0 };
    if c == 0.0 {
        c = 0.5 * (hi - lo);
    }
    if c == 0.0 {
        c = 1.0;
    }
    if model.lossless {
        Reference { c: C64::new(c, LOSSLESS_SHIFT * c.abs()), explicit: false, shifted: true }
    } else {
        Reference { c: C64::new(c, 0.0), explicit: false, shifted: false }
    }
}

/// `max_p ‖L(p) − cI‖₂ / |c|`.
pub fn contraction_estimate(medium: &MediumField, c: C64) -> f64 {
    let n = medium.n();
    let delta = medium.shifted(c);
    let norm = |p: usize| {
        DMatrix::from_row_slice(n, n, delta.at(p)).singular_values().iter().cloned().fold(0.0, f64::max)
    };
    let worst = if delta.is_constant() {
        norm(0)
    } else {
        (0..delta.grid().npts()).into_par_iter().map(norm).reduce(|| 0.0, f64::max)
    };
    worst / c.norm()
}

/// The canonical problem for one model, source and reference constant.
pub struct CanonicalProblem<'a> {
    pub model: &'a PhysicsModel,
    pub source: ComponentField,
    pub reference: Reference,
}

impl<'a> CanonicalProblem<'a> {
    /// `reference = None` selects [`default_reference`].
    pub fn new(model: &'a PhysicsModel, source: ComponentField, reference: Option<C64>) -> Result<Self> {
        if source.ncomp() != model.n() {
            return Err(Error::ShapeMismatch(format!(
                "source has {} components, model `{}` has {}",
                source.ncomp(),
                model.id,
                model.n()
            )));
        }
        if **source.grid() != **model.grid() {
            return Err(Error::ShapeMismatch("source and model live on different grids".into()));
        }
        let reference = match reference {
            Some(c) if c == C64::new(0.0, 0.0) || !c.re.is_finite() || !c.im.is_finite() => {
                return Err(Error::InvalidArgument(format!("reference constant must be finite and nonzero, got {c}")))
            }
            Some(c) => Reference { c, explicit: true, shifted: false },
            None => default_reference(model),
        };
        Ok(Self { model, source: source.to_real(), reference })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: &'static str,
    pub iterations: usize,
    pub converged: bool,
    /// Neumann only: the residual grew three iterations in a row.
    pub diverged: bool,
    /// `‖Γ₁(LE − s)‖ / ‖Γ₁s‖`.
    pub final_residual: f64,
    /// `‖Γ₁E − E‖ / ‖E‖`.
    pub constraint_defect: f64,
    pub contraction: f64,
    pub reference: Reference,
    pub wall_time_s: f64,
}

/// Matrix-free `x ↦ x + (1/c) Γ₁(δL x)` on dual data.
pub(crate) struct RestrictedOperator<'a> {
    model: &'a PhysicsModel,
    gamma: ProjectionOperator,
    delta: MediumField,
    inv_c: C64,
}

impl<'a> RestrictedOperator<'a> {
    pub(crate) fn new(model: &'a PhysicsModel, c: C64) -> Self {
        Self { model, gamma: model.gamma.on_grid(model.grid()), delta: model.medium.shifted(c), inv_c: c.inv() }
    }

    fn n(&self) -> usize {
        self.model.n()
    }

    /// `Γ₁ x̂` in place.
    pub(crate) fn project(&self, x: &mut [C64]) {
        self.gamma.apply_dual_raw(x);
    }

    /// `(1/c) Γ₁ (δL x)` for dual `x`.
    fn perturbation(&self, x: &[C64]) -> Vec<C64> {
        let grid = self.model.grid();
        let n = self.n();
        let mut real = x.to_vec();
        grid.transform(&mut real, n, true);
        let mut out = vec![C64::new(0.0, 0.0); real.len()];
        self.delta.apply_raw(&real, &mut out);
        grid.transform(&mut out, n, false);
        self.gamma.apply_dual_raw(&mut out);
        let s = self.inv_c;
        out.par_iter_mut().for_each(|v| *v *= s);
        out
    }

    pub(crate) fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = self.perturbation(x);
        y.par_iter_mut().zip(x).for_each(|(a, b)| *a += b);
        y
    }

    /// `(1/c) Γ₁ ŝ`.
    pub(crate) fn rhs(&self, s: &ComponentField) -> Vec<C64> {
        let mut b = s.to_dual().into_values();
        self.project(&mut b);
        let k = self.inv_c;
        b.par_iter_mut().for_each(|v| *v *= k);
        b
    }
}

pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.par_iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `(‖Γ₁E − E‖, ‖Γ₁(LE − s)‖)` in the spacetime norm.
pub fn canonical_residual(model: &PhysicsModel, e: &ComponentField, s: &ComponentField) -> Result<(f64, f64)> {
    residual_with(&model.gamma, &model.medium, e, s)
}

/// [`canonical_residual`] for an explicit projection family and medium.
pub fn residual_with(
    family: &ProjectionFamily,
    medium: &MediumField,
    e: &ComponentField,
    s: &ComponentField,
) -> Result<(f64, f64)> {
    let n = medium.n();
    if e.ncomp() != n || s.ncomp() != n || family.n() != n {
        return Err(Error::ShapeMismatch(format!("medium has {n} components")));
    }
    let gamma = family.on_grid(medium.grid());
    let e = e.to_real();
    let r1 = gamma.apply(&e)?.sub(&e)?.norm();
    let le = apply_medium(medium, &e)?;
    let j = le.sub(&s.to_real())?;
    let r2 = gamma.apply(&j)?.norm();
    Ok((r1, r2))
}

fn finish(
    problem: &CanonicalProblem,
    op: &RestrictedOperator,
    method: &'static str,
    x: Vec<C64>,
    iterations: usize,
    converged: bool,
    diverged: bool,
    start: Instant,
) -> Result<(ComponentField, SolveReport)> {
    let model = problem.model;
    let mut x = x;
    op.project(&mut x);
    let e = ComponentField::new(model.grid().clone(), model.e_labels(), x, Representation::Dual)?.to_real();
    let (r1, r2) = canonical_residual(model, &e, &problem.source)?;
    let gs = op.gamma.apply(&problem.source)?.norm();
    let en = e.norm();
    let report = SolveReport {
        method,
        iterations,
        converged,
        diverged,
        final_residual: if gs > 0.0 { r2 / gs } else { r2 },
        constraint_defect: if en > 0.0 { r1 / en } else { r1 },
        contraction: contraction_estimate(&model.medium, problem.reference.c),
        reference: problem.reference,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((e, report))
}

/// Fixed-point iteration `E ← (1/c) Γ₁(s − δL E)` from `E₀ = (1/c) Γ₁ s`.
pub fn neumann_solve(problem: &CanonicalProblem, tol: f64, max_iter: usize) -> Result<(ComponentField, SolveReport)> {
    let start = Instant::now();
    let op = RestrictedOperator::new(problem.model, problem.reference.c);
    let b = op.rhs(&problem.source);
    let bn = norm2(&b);
    let mut x = b.clone();
    if bn == 0.0 {
        return finish(problem, &op, "neumann", x, 0, true, false, start);
    }
    let mut last_res = f64::INFINITY;
    let mut growth = 0;
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let p = op.perturbation(&x);
        let next: Vec<C64> = b.par_iter().zip(&p).map(|(bi, pi)| bi - pi).collect();
        // Residual of the restricted system at the current iterate.
        let res = norm2(&next.par_iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        let update = res / norm2(&next).max(f64::MIN_POSITIVE);
        iterations += 1;
        x = next;
        if update < tol {
            converged = true;
            break;
        }
        if res > last_res {
            growth += 1;
            if growth >= 3 {
                diverged = true;
                break;
            }
        } else {
            growth = 0;
        }
        last_res = res;
    }
    finish(problem, &op, "neumann", x, iterations, converged, diverged, start)
}

/// Grid average of `L`.
pub fn mean_medium(medium: &MediumField) -> DMatrix<C64> {
    let n = medium.n();
    let npts = medium.grid().npts();
    let mut sum = DMatrix::<C64>::zeros(n, n);
    let points = if medium.is_constant() { 1 } else { npts };
    for p in 0..points {
        sum += DMatrix::from_row_slice(n, n, medium.at(p));
    }
    sum / C64::new(points as f64, 0.0)
}

/// Right preconditioner `Q(k,ω) = c·U(U†(L̄ + iη)U)⁺U†` with `U` an
/// orthonormal basis of `range(Γ₁(k,ω))` and `L̄` the mean medium. For a
/// varying medium `η = Im(c)` damps the near-resonant modes of lossless
/// media; for a constant one `η = 0` and `Q` is the exact inverse.
pub(crate) struct Preconditioner {
    n: usize,
    mats: Vec<C64>,
}

impl Preconditioner {
    pub(crate) fn new(model: &PhysicsModel, gamma: &ProjectionOperator, c: C64) -> Self {
        let n = model.n();
        let grid = model.grid();
        let mut lbar = mean_medium(&model.medium);
        if !model.medium.is_constant() {
            for i in 0..n {
                lbar[(i, i)] += C64::new(0.0, c.im);
            }
        }
        let blocks: Vec<DMatrix<C64>> = (0..grid.npts())
            .into_par_iter()
            .map(|q| {
                let g = DMatrix::from_row_slice(n, n, gamma.at(q));
                let eig = ((&g + g.adjoint()) * C64::new(0.5, 0.0)).symmetric_eigen();
                let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
                if cols.is_empty() {
                    return DMatrix::zeros(n, n);
                }
                let u = DMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
                let m = u.adjoint() * &lbar * &u;
                let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let inv = m
                    .pseudo_inverse(crate::projections::PINV_CUTOFF * scale.max(f64::MIN_POSITIVE))
                    .unwrap_or_else(|_| DMatrix::zeros(cols.len(), cols.len()));
                &u * inv * u.adjoint() * c
            })
            .collect();
        let mut mats = Vec::with_capacity(grid.npts() * n * n);
        for b in &blocks {
            for i in 0..n {
                for j in 0..n {
                    mats.push(b[(i, j)]);
                }
            }
        }
        Self { n, mats }
    }

    pub(crate) fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        out.par_chunks_mut(n).zip(x.par_chunks(n)).enumerate().for_each(|(q, (y, v))| {
            let m = &self.mats[q * n * n..(q + 1) * n * n];
            for i in 0..n {
                y[i] = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
            }
        });
        out
    }
}

/// Restarted GMRES on the restricted system, right-preconditioned by the
/// mean-medium inverse so that the reported residual is the true one.
pub fn krylov_solve(problem: &CanonicalProblem, tol: f64, max_iter: usize) -> Result<(ComponentField, SolveReport)> {
    krylov_solve_restarted(problem, tol, max_iter, DEFAULT_RESTART)
}

/// [`krylov_solve`] with an explicit restart length.
pub fn krylov_solve_restarted(
    problem: &CanonicalProblem,
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> Result<(ComponentField, SolveReport)> {
    if restart == 0 {
        return Err(Error::InvalidArgument("restart length must be positive".into()));
    }
    let start = Instant::now();
    let op = RestrictedOperator::new(problem.model, problem.reference.c);
    let pre = Preconditioner::new(problem.model, &op.gamma, problem.reference.c);
    let b = op.rhs(&problem.source);
    let out = krylov::gmres(|v| op.apply(&pre.apply(v)), &b, tol, max_iter, restart);
    let x = pre.apply(&out.x);
    finish(problem, &op, "krylov", x, out.iterations, out.converged, false, start)
}
