//! Potentials `Ψ̂ = F⁺D†Ê` and the forward map `Ê = D̂Ψ̂`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ComponentField, Representation};
use crate::projections::{potential_from_symbol_matrix, projection_from_symbol_matrix, ProjectionFamily, Symbol};
use crate::C64;

/// Relative tolerance for the range-membership check.
pub const RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PotentialResult {
    pub psi: ComponentField,
    /// `‖Ê(0) − D̂(0)Ψ̂(0)‖ / ‖Ê‖`: zero-dual content that no potential
    /// represents and that was dropped.
    pub dropped_zero_dual: f64,
    /// `‖Γ₁E − E‖ / ‖E‖` over the nonzero dual points.
    pub range_defect: f64,
}

fn symbol_of(p: &ProjectionFamily) -> Result<&Symbol> {
    p.symbol()
        .ok_or_else(|| Error::InvalidArgument(format!("projection family `{}` carries no symbol", p.name())))
}

fn psi_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("psi{i}")).collect()
}

pub fn reconstruct_potential(p: &ProjectionFamily, e: &ComponentField) -> Result<PotentialResult> {
    let sym = symbol_of(p)?;
    if e.ncomp() != sym.n_e() {
        return Err(Error::ShapeMismatch(format!(
            "symbol of `{}` maps to {} components, field has {}",
            p.name(),
            sym.n_e(),
            e.ncomp()
        )));
    }
    let grid = e.grid().clone();
    let (ne, np) = (sym.n_e(), sym.n_psi());
    let dual = e.to_dual();
    let ev = dual.values();
    // (psi, off-range mass, zero-dual dropped mass) per point
    let per_point: Vec<(Vec<C64>, f64, f64)> = (0..grid.npts())
        .into_par_iter()
        .map(|q| {
            let dp = grid.dual_at(q);
            let d = sym.eval(&dp);
            let x = &ev[q * ne..(q + 1) * ne];
            let psi = potential_from_symbol_matrix(&d, x);
            let back = &d * DVector::from_column_slice(&psi);
            let miss: f64 = back.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum();
            if dp.is_zero() {
                (psi, 0.0, miss)
            } else {
                let g = projection_from_symbol_matrix(&d) * DVector::from_column_slice(x);
                let off: f64 = g.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum();
                (psi, off, 0.0)
            }
        })
        .collect();
    let total: f64 = ev.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let off: f64 = per_point.iter().map(|t| t.1).sum::<f64>().sqrt();
    let dropped: f64 = per_point.iter().map(|t| t.2).sum::<f64>().sqrt();
    let rel = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    let range_defect = rel(off);
    if range_defect > RANGE_TOL {
        return Err(Error::OutsideRange { defect: range_defect });
    }
    let mut values = Vec::with_capacity(grid.npts() * np);
    for (psi, _, _) in per_point {
        values.extend(psi);
    }
    let psi = ComponentField::new(grid, psi_labels(np), values, Representation::Dual)?.to_real();
    Ok(PotentialResult { psi, dropped_zero_dual: rel(dropped), range_defect })
}

/// `Ê = D̂Ψ̂` per dual point.
pub fn apply_symbol(p: &ProjectionFamily, psi: &ComponentField) -> Result<ComponentField> {
    let sym = symbol_of(p)?;
    if psi.ncomp() != sym.n_psi() {
        return Err(Error::ShapeMismatch(format!(
            "symbol of `{}` takes {} potentials, field has {}",
            p.name(),
            sym.n_psi(),
            psi.ncomp()
        )));
    }
    let grid = psi.grid().clone();
    let (ne, np) = (sym.n_e(), sym.n_psi());
    let dual = psi.to_dual();
    let pv = dual.values();
    let out: Vec<C64> = (0..grid.npts())
        .into_par_iter()
        .flat_map_iter(|q| {
            let d = sym.eval(&grid.dual_at(q));
            let e = d * DVector::from_column_slice(&pv[q * np..(q + 1) * np]);
            e.iter().copied().collect::<Vec<_>>()
        })
        .collect();
    let labels = (0..ne).map(|i| format!("e{i}")).collect();
    Ok(ComponentField::new(grid, labels, out, Representation::Dual)?.to_real())
}
