//! Hand-written builders, one per catalog id.

use super::params::{Kind, ParamSchema, ParameterRecord, Profile, Symmetry, Tensor};
use super::{Env, ModelSpec};
use crate::C64;

pub(crate) mod diffusion;
mod kinetic;
pub(crate) mod quantum;
mod waves;

pub(crate) static ALL: &[&dyn ModelSpec] = &[
    &diffusion::ConvectiveDiffusion,
    &diffusion::DiffusionLaplace,
    &diffusion::LightDiffusion,
    &diffusion::ReactionDiffusionSlaved,
    &diffusion::ReactionDiffusion,
    &diffusion::PredatorPrey,
    &diffusion::NernstPlanck,
    &diffusion::NernstPlanckPoisson,
    &diffusion::Semiconductor,
    &diffusion::Spintronics,
    &diffusion::NmrBlochTorrey,
    &kinetic::RadiativeTransfer,
    &kinetic::BoltzmannBgk,
    &kinetic::Boussinesq,
    &waves::Acoustics,
    &waves::Elastodynamics,
    &waves::Thermoelasticity,
    &waves::Piezoelectricity,
    &waves::Poroelasticity,
    &waves::Electromagnetism,
    &quantum::Schrodinger,
    &quantum::SchrodingerMagnetic,
    &quantum::SuperfluidTwoFluid,
    &waves::AcousticsMoving,
    &waves::ElastodynamicsMoving,
];

pub(super) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(super) const ONE: C64 = c(1.0, 0.0);
pub(super) const HALF_I: C64 = c(0.0, 0.5);
pub(super) const NEG_HALF_I: C64 = c(0.0, -0.5);

pub(super) fn t<'a>(env: &'a Env, name: &str) -> &'a Tensor {
    env.get(name).unwrap_or_else(|| panic!("missing quantity `{name}`"))
}

pub(super) fn s(env: &Env, name: &str) -> C64 {
    t(env, name).value()
}

pub(super) fn col(v: &Tensor) -> Tensor {
    Tensor::cvector(v.data.clone())
}

pub(super) fn row(v: &Tensor) -> Tensor {
    Tensor::cmatrix(1, v.data.len(), v.data.clone())
}

/// Cosine modulation along the first axis, used by the examples.
pub(super) fn wave(contrast: f64) -> (f64, Profile) {
    (contrast, Profile::Cosine { axis: 0, mode: 1 })
}

pub(super) fn modulated(rec: ParameterRecord, name: &str, contrast: f64) -> ParameterRecord {
    let (c, p) = wave(contrast);
    rec.modulate(name, c, p)
}

/// Symmetric positive definite `d×d` example: identity plus a small
/// off-diagonal coupling.
pub(super) fn spd(d: usize, scale: f64) -> Tensor {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = if i == j { scale } else { 0.1 * scale };
        }
    }
    Tensor::matrix(d, d, &m)
}

pub(super) fn ramp(d: usize, base: f64) -> Tensor {
    Tensor::vector(&(0..d).map(|i| base * (1.0 + 0.5 * i as f64)).collect::<Vec<_>>())
}

pub(super) fn schema_matrix(name: &'static str, doc: &'static str) -> ParamSchema {
    ParamSchema::req(name, Kind::Matrix, doc).sym(Symmetry::Symmetric)
}

fn zero() -> C64 {
    c(0.0, 0.0)
}

/// `m v` as a column, summed in index order.
pub(super) fn mat_vec(m: &Tensor, v: &Tensor) -> Tensor {
    Tensor::cvector(
        (0..m.rows).map(|i| (0..m.cols).fold(zero(), |acc, k| acc + m.at(i, k) * v.data[k])).collect(),
    )
}

pub(super) fn outer(u: &Tensor, v: &Tensor) -> Tensor {
    let (r, cc) = (u.data.len(), v.data.len());
    Tensor::cmatrix(r, cc, (0..r * cc).map(|k| u.data[k / cc] * v.data[k % cc]).collect())
}

/// `(1/d) I⊗I` on row-major `d×d` matrices.
pub(super) fn iso_projection(d: usize) -> Tensor {
    let mut t = Tensor::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            t.data[(a * d + a) * d * d + b * d + b] = c(1.0 / d as f64, 0.0);
        }
    }
    t
}

/// `d × d²` with `[i, a·d + i] = v_a`.
pub(super) fn convect_lift(v: &Tensor) -> Tensor {
    let d = v.data.len();
    let mut t = Tensor::zeros(d, d * d);
    for i in 0..d {
        for a in 0..d {
            t.data[i * d * d + a * d + i] = v.data[a];
        }
    }
    t
}

/// `(u vᵀ) ⊗ I_d`.
pub(super) fn outer_lift(u: &Tensor, v: &Tensor) -> Tensor {
    let d = u.data.len();
    let mut t = Tensor::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            for j in 0..d {
                t.data[(a * d + j) * d * d + b * d + j] = u.data[a] * v.data[b];
            }
        }
    }
    t
}

/// `v ⊗ I_d`, `d² × d`.
pub(super) fn col_lift(v: &Tensor) -> Tensor {
    let d = v.data.len();
    let mut t = Tensor::zeros(d * d, d);
    for a in 0..d {
        for j in 0..d {
            t.data[(a * d + j) * d + j] = v.data[a];
        }
    }
    t
}

/// `vᵀ ⊗ I_d`, `d × d²`.
pub(super) fn row_lift(v: &Tensor) -> Tensor {
    let d = v.data.len();
    let mut t = Tensor::zeros(d, d * d);
    for b in 0..d {
        for j in 0..d {
            t.data[j * d * d + b * d + j] = v.data[b];
        }
    }
    t
}

pub(super) fn flat_col(m: &Tensor) -> Tensor {
    Tensor::cvector(m.data.clone())
}

pub(super) fn flat_row(m: &Tensor) -> Tensor {
    Tensor::cmatrix(1, m.data.len(), m.data.clone())
}
