//! Manufactured `(E, s)` pairs that satisfy the canonical conditions exactly.

use crate::catalog::PhysicsModel;
use crate::error::{Error, Result};
use crate::field::{apply_medium, outer_time_mass_fraction, random_bandlimited_field, time_window, ComponentField};

const MAX_ATTEMPTS: usize = 8;
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    /// Unit-norm field with `Γ₁E = E`.
    pub e_exact: ComponentField,
    /// `Γ₁ L E_exact`.
    pub source: ComponentField,
    /// Seed of the accepted draw.
    pub seed: u64,
    pub attempts: usize,
    pub windowed: bool,
    /// Fraction of the source mass in the outer 10% of the time axis.
    pub wraparound: f64,
}

/// Windowed manufactured problem. See [`manufactured_problem_with`].
pub fn manufactured_problem(model: &PhysicsModel, seed: u64, max_mode: usize) -> Result<ManufacturedProblem> {
    manufactured_problem_with(model, seed, max_mode, true)
}

/// Draws `E₀`, removes its `k = 0` content, optionally multiplies it by the
/// time window, and projects. Content at zero spatial wavenumber is excluded
/// because the restricted operator of several models is singular there.
pub fn manufactured_problem_with(
    model: &PhysicsModel,
    seed: u64,
    max_mode: usize,
    window: bool,
) -> Result<ManufacturedProblem> {
    let grid = model.grid();
    let n = model.n();
    let gamma = model.gamma.on_grid(grid);
    let spatial = grid.spatial_axes();
    let profile = window.then(|| time_window(grid));
    for attempt in 0..MAX_ATTEMPTS {
        let draw_seed = seed.wrapping_add(SEED_STRIDE.wrapping_mul(attempt as u64));
        let e0 = random_bandlimited_field(grid, n, max_mode, draw_seed)?.with_labels(model.e_labels())?;
        let mut dual = e0.to_dual();
        let vals = dual.values_mut();
        for p in 0..grid.npts() {
            let idx = grid.unravel(p);
            if spatial.iter().all(|&a| idx[a] == 0) {
                vals[p * n..(p + 1) * n].iter_mut().for_each(|v| *v = Default::default());
            }
        }
        let mut e = dual.to_real();
        if let Some(w) = &profile {
            e = e.multiply_profile(w)?;
        }
        let before = e.norm();
        let projected = gamma.apply(&e)?;
        let after = projected.norm();
        if before == 0.0 || after <= 1e-12 * before {
            continue;
        }
        let e_exact = projected.scale((1.0 / after).into());
        let jp = apply_medium(&model.medium, &e_exact)?;
        let source = gamma.apply(&jp)?.with_labels(model.j_labels())?;
        let wraparound = outer_time_mass_fraction(&source);
        return Ok(ManufacturedProblem {
            e_exact,
            source,
            seed: draw_seed,
            attempts: attempt + 1,
            windowed: window,
            wraparound,
        });
    }
    Err(Error::DegenerateManufactured { attempts: MAX_ATTEMPTS })
}
