//! Smallest singular value of `Γ₁LΓ₁` restricted to `range(Γ₁)`, scanned in ω.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::PhysicsModel;
use crate::error::{Error, Result};
use crate::grid::DualPoint;
use crate::C64;

/// Relative `σ_min` below which a refined minimum counts as a root.
pub const ROOT_TOL: f64 = 1e-6;
/// Bracket width at which refinement stops.
pub const REFINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionSample {
    pub omega: f64,
    /// `None` when `range(Γ₁)` is empty at this sample.
    pub sigma_min: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionRoot {
    pub omega: f64,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionScan {
    pub k: Vec<f64>,
    pub samples: Vec<DispersionSample>,
    pub roots: Vec<DispersionRoot>,
    /// Largest entry modulus of `L`, the scale for [`ROOT_TOL`].
    pub scale: f64,
}

struct Restricted<'a> {
    model: &'a PhysicsModel,
    l: DMatrix<C64>,
    k: Vec<f64>,
}

impl Restricted<'_> {
    fn sigma(&self, omega: f64) -> Option<f64> {
        let g = &self.model.gamma;
        let dp = DualPoint::new(self.k.clone(), vec![0.0; g.dim_p()], omega);
        let gm = g.eval(&dp);
        let gm = (&gm + gm.adjoint()) * C64::new(0.5, 0.0);
        let eig = gm.symmetric_eigen();
        let cols: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        if cols.is_empty() {
            return None;
        }
        let n = self.l.nrows();
        let u = DMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
        let m = u.adjoint() * &self.l * &u;
        Some(m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Bisection on the sign of the slope of `σ_min` inside `[a, b]`.
    fn refine(&self, mut a: f64, mut b: f64) -> Option<DispersionRoot> {
        while b - a > REFINE_TOL {
            let m = 0.5 * (a + b);
            let h = 1e-3 * REFINE_TOL * (1.0 + m.abs());
            let slope = self.sigma(m + h)? - self.sigma(m - h)?;
            if slope > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let omega = 0.5 * (a + b);
        Some(DispersionRoot { omega, sigma_min: self.sigma(omega)? })
    }
}

/// Scan `n_samples` equispaced ω in `omega_range` at fixed `k`, then refine
/// every interior local minimum of the samples and keep those that reach zero.
pub fn dispersion_scan(
    model: &PhysicsModel,
    k: &[f64],
    omega_range: (f64, f64),
    n_samples: usize,
) -> Result<DispersionScan> {
    if !model.medium.is_constant() {
        return Err(Error::InvalidArgument(format!(
            "dispersion scan needs constant parameters, model `{}` varies over the grid",
            model.id
        )));
    }
    let (lo, hi) = omega_range;
    if n_samples < 3 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("need at least 3 samples over a finite, increasing ω range".into()));
    }
    let n = model.n();
    let l = DMatrix::from_row_slice(n, n, model.medium.at(0));
    let scale = l.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let r = Restricted { model, l, k: k.to_vec() };
    let step = (hi - lo) / (n_samples - 1) as f64;
    let samples: Vec<DispersionSample> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let omega = lo + step * i as f64;
            DispersionSample { omega, sigma_min: r.sigma(omega) }
        })
        .collect();
    let mut roots: Vec<DispersionRoot> = Vec::new();
    for i in 1..n_samples - 1 {
        let (Some(a), Some(m), Some(b)) = (samples[i - 1].sigma_min, samples[i].sigma_min, samples[i + 1].sigma_min)
        else {
            continue;
        };
        if m <= a && m < b {
            if let Some(root) = r.refine(samples[i - 1].omega, samples[i + 1].omega) {
                let dup = roots.last().is_some_and(|p| (p.omega - root.omega).abs() < 10.0 * REFINE_TOL);
                if root.sigma_min <= ROOT_TOL * scale && !dup {
                    roots.push(root);
                }
            }
        }
    }
    // the zero dual point: an empty range at k = 0, ω = 0 is the static mode
    if k.iter().all(|&v| v == 0.0) && lo <= 0.0 && 0.0 <= hi && r.sigma(0.0).is_none() {
        roots.push(DispersionRoot { omega: 0.0, sigma_min: 0.0 });
        roots.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    }
    Ok(DispersionScan { k: k.to_vec(), samples, roots, scale })
}
