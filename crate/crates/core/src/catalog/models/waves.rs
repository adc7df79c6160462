//! Real-frequency wave models: acoustics, elasticity and its couplings,
//! electromagnetism, and acoustics or elasticity seen from a moving frame.

use super::*;
use crate::catalog::audit::{entry, f, inv, recip, AuditEntry, Shape};
use crate::catalog::{block, matrix_inverse, Block, BlockWriter, Ctx};
use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;
use crate::projections::{
    compose_block_gamma, gamma_acoustic_n, gamma_divergence_pair, gamma_em, gamma_longitudinal, gamma_thermo_y,
    lift_first_index, ProjectionFamily,
};

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn elastic_gamma(d: usize) -> Result<ProjectionFamily> {
    Ok(lift_first_index(&gamma_acoustic_n(d), &[d])?.with_name("N⊗I"))
}

fn stiffness(name: &'static str) -> ParamSchema {
    ParamSchema::req(name, Kind::Stiffness, "elasticity tensor on row-major strain indices").sym(Symmetry::Stiffness)
}

fn example_stiffness(d: usize) -> Tensor {
    Tensor::isotropic_stiffness(d, 1.0, 0.8)
}

/// `w` defaulted to zero and rejected when it is not real.
fn frame_velocity() -> ParamSchema {
    ParamSchema::opt("w", Kind::Vector, 0.0, "frame velocity")
}

pub struct Acoustics;

impl ModelSpec for Acoustics {
    fn id(&self) -> &'static str {
        "acoustics"
    }
    fn summary(&self) -> &'static str {
        "linear acoustics with density and bulk modulus"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("rho", Kind::Scalar, "density"),
            ParamSchema::req("kappa", Kind::Scalar, "bulk modulus"),
        ]
    }
    fn example(&self, _d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with_real("rho", 1.0).with_real("kappa", 2.0);
        modulated(rec, "rho", 0.4)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        vec![block("grad_P", "v_t", ctx.d), block("neg_P_t", "div_v", 1)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_acoustic_n(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.ident("v_t", "grad_P", r(-1.0) * recip(s(env, "rho")));
        w.ident("div_v", "neg_P_t", ONE * recip(s(env, "kappa")));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("v_t", "grad_P", r(-1.0), &[inv("rho")], Shape::Identity),
            entry("div_v", "neg_P_t", ONE, &[inv("kappa")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct Elastodynamics;

impl ModelSpec for Elastodynamics {
    fn id(&self) -> &'static str {
        "elastodynamics"
    }
    fn summary(&self) -> &'static str {
        "linear elastodynamics with anisotropic stiffness"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![stiffness("C"), ParamSchema::req("rho", Kind::Scalar, "density")]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with("C", example_stiffness(d)).with_real("rho", 1.0);
        modulated(rec, "C", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![block("neg_grad_v", "sigma_t", d * d), block("v_t", "div_sigma", d)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        elastic_gamma(ctx.d)
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("sigma_t", "neg_grad_v", r(-1.0), t(env, "C"));
        w.ident("div_sigma", "v_t", ONE * s(env, "rho"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("sigma_t", "neg_grad_v", r(-1.0), &[], Shape::Param("C")),
            entry("div_sigma", "v_t", ONE, &[f("rho")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct Thermoelasticity;

impl ModelSpec for Thermoelasticity {
    fn id(&self) -> &'static str {
        "thermoelasticity"
    }
    fn summary(&self) -> &'static str {
        "elastodynamics coupled to heat flow with a relaxation time"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            stiffness("C"),
            schema_matrix("beta", "thermal stress tensor"),
            ParamSchema::req("rho", Kind::Scalar, "density"),
            ParamSchema::req("c", Kind::Scalar, "specific heat"),
            ParamSchema::req("T0", Kind::Scalar, "reference temperature"),
            ParamSchema::req("tau", Kind::Scalar, "thermal relaxation time"),
            schema_matrix("K", "thermal conductivity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("C", example_stiffness(d))
            .with("beta", spd(d, 0.3))
            .with_real("rho", 1.0)
            .with_real("c", 1.5)
            .with_real("T0", 1.0)
            .with_real("tau", 0.5)
            .with("K", spd(d, 1.0));
        modulated(rec, "rho", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![
            block("neg_grad_v", "sigma_t", d * d),
            block("v_t", "div_sigma", d),
            block("grad_theta", "r", d),
            block("theta_t", "U", 1),
            block("theta", "cons", 1),
        ]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        compose_block_gamma("N⊗I+Y", &[elastic_gamma(ctx.d)?, gamma_thermo_y(ctx.d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let t0 = s(env, "T0");
        w.add("sigma_t", "neg_grad_v", ONE, t(env, "C"));
        w.add("sigma_t", "theta_t", r(-1.0) * t0, &flat_col(t(env, "beta")));
        w.ident("div_sigma", "v_t", r(-1.0) * s(env, "rho"));
        w.add("r", "grad_theta", r(-1.0) * t0 * recip(s(env, "tau")), t(env, "K"));
        w.add("U", "neg_grad_v", r(-1.0) * t0, &flat_row(t(env, "beta")));
        w.ident("U", "theta_t", r(-1.0) * s(env, "rho") * s(env, "c"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("sigma_t", "neg_grad_v", ONE, &[], Shape::Param("C")),
            entry("sigma_t", "theta_t", r(-1.0), &[f("T0")], Shape::Flat("beta")),
            entry("div_sigma", "v_t", r(-1.0), &[f("rho")], Shape::Identity),
            entry("r", "grad_theta", r(-1.0), &[f("T0"), inv("tau")], Shape::Param("K")),
            entry("U", "neg_grad_v", r(-1.0), &[f("T0")], Shape::FlatT("beta")),
            entry("U", "theta_t", r(-1.0), &[f("rho"), f("c")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["div_sigma", "cons"]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct Piezoelectricity;

impl ModelSpec for Piezoelectricity {
    fn id(&self) -> &'static str {
        "piezoelectricity"
    }
    fn summary(&self) -> &'static str {
        "elastodynamics coupled to a quasistatic electric field"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            stiffness("C"),
            ParamSchema::req("A", Kind::ThirdOrder, "piezoelectric coupling tensor"),
            ParamSchema::req("rho", Kind::Scalar, "density"),
            ParamSchema::req("eps", Kind::Matrix, "permittivity").sym(Symmetry::Hermitian),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let a: Vec<f64> = (0..d * d * d).map(|k| 0.05 * ((k % 5) as f64 - 2.0)).collect();
        let rec = ParameterRecord::new()
            .with("C", example_stiffness(d))
            .with("A", Tensor::matrix(d * d, d, &a))
            .with_real("rho", 1.0)
            .with("eps", spd(d, 2.0));
        modulated(rec, "A", 0.5)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![block("neg_sym_grad_v", "sigma_t", d * d), block("v_t", "div_sigma", d), block("e_t", "d_t", d)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        compose_block_gamma("N⊗I+Kl", &[elastic_gamma(ctx.d)?, gamma_longitudinal(ctx.d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("sigma_t", "neg_sym_grad_v", r(-1.0), t(env, "C"));
        w.add("sigma_t", "e_t", r(-1.0), t(env, "A"));
        w.ident("div_sigma", "v_t", ONE * s(env, "rho"));
        w.add("d_t", "neg_sym_grad_v", r(-1.0), &t(env, "A").transpose());
        w.add("d_t", "e_t", ONE, t(env, "eps"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("sigma_t", "neg_sym_grad_v", r(-1.0), &[], Shape::Param("C")),
            entry("sigma_t", "e_t", r(-1.0), &[], Shape::Param("A")),
            entry("div_sigma", "v_t", ONE, &[f("rho")], Shape::Identity),
            entry("d_t", "neg_sym_grad_v", r(-1.0), &[], Shape::ParamT("A")),
            entry("d_t", "e_t", ONE, &[], Shape::Param("eps")),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct Poroelasticity;

impl ModelSpec for Poroelasticity {
    fn id(&self) -> &'static str {
        "poroelasticity"
    }
    fn summary(&self) -> &'static str {
        "Biot poroelasticity with frame displacement and relative fluid flow"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            stiffness("C"),
            schema_matrix("M", "solid–fluid coupling tensor"),
            ParamSchema::req("M_s", Kind::Scalar, "fluid storage modulus"),
            ParamSchema::req("rho", Kind::Scalar, "bulk density"),
            ParamSchema::req("rho_f", Kind::Scalar, "fluid density"),
            ParamSchema::req("m", Kind::Scalar, "effective fluid inertia"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("C", example_stiffness(d))
            .with("M", spd(d, 0.4))
            .with_real("M_s", 1.2)
            .with_real("rho", 2.0)
            .with_real("rho_f", 0.5)
            .with_real("m", 1.5);
        modulated(rec, "rho", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![
            block("neg_grad_v", "sigma_t", d * d),
            block("v_t", "div_sigma", d),
            block("neg_div_w", "neg_P_t", 1),
            block("w_t", "neg_grad_P", d),
        ]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        compose_block_gamma("N⊗I+Dp", &[elastic_gamma(ctx.d)?, gamma_divergence_pair(ctx.d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let rho_f = s(env, "rho_f");
        w.add("sigma_t", "neg_grad_v", r(-1.0), t(env, "C"));
        w.add("sigma_t", "neg_div_w", ONE, &flat_col(t(env, "M")));
        w.ident("div_sigma", "v_t", ONE * s(env, "rho"));
        w.ident("div_sigma", "w_t", ONE * rho_f);
        w.add("neg_P_t", "neg_grad_v", ONE, &flat_row(t(env, "M")));
        w.ident("neg_P_t", "neg_div_w", ONE * s(env, "M_s"));
        w.ident("neg_grad_P", "v_t", ONE * rho_f);
        w.ident("neg_grad_P", "w_t", ONE * s(env, "m"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("sigma_t", "neg_grad_v", r(-1.0), &[], Shape::Param("C")),
            entry("sigma_t", "neg_div_w", ONE, &[], Shape::Flat("M")),
            entry("div_sigma", "v_t", ONE, &[f("rho")], Shape::Identity),
            entry("div_sigma", "w_t", ONE, &[f("rho_f")], Shape::Identity),
            entry("neg_P_t", "neg_grad_v", ONE, &[], Shape::FlatT("M")),
            entry("neg_P_t", "neg_div_w", ONE, &[f("M_s")], Shape::Identity),
            entry("neg_grad_P", "v_t", ONE, &[f("rho_f")], Shape::Identity),
            entry("neg_grad_P", "w_t", ONE, &[f("m")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct Electromagnetism;

impl ModelSpec for Electromagnetism {
    fn id(&self) -> &'static str {
        "em"
    }
    fn summary(&self) -> &'static str {
        "Maxwell's equations with anisotropic permittivity and permeability"
    }
    fn dim(&self, grid: &SpacetimeGrid) -> Result<usize> {
        match grid.spatial_dim() {
            1..=3 => Ok(3),
            d => Err(Error::InvalidGrid(format!("`em` needs 1 to 3 spatial axes, found {d}"))),
        }
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("eps", Kind::Matrix, "permittivity").sym(Symmetry::Hermitian),
            ParamSchema::req("mu", Kind::Matrix, "permeability").sym(Symmetry::Hermitian),
        ]
    }
    fn example(&self, _d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with("eps", spd(3, 2.0)).with("mu", spd(3, 1.0));
        modulated(rec, "eps", 0.4)
    }
    fn blocks(&self, _ctx: &Ctx) -> Vec<Block> {
        vec![block("b", "neg_h", 3), block("e", "d", 3)]
    }
    fn gamma(&self, _ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_em())
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("neg_h", "b", r(-1.0), &matrix_inverse(t(env, "mu")));
        w.add("d", "e", ONE, t(env, "eps"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("neg_h", "b", r(-1.0), &[], Shape::InvMatrix("mu")),
            entry("d", "e", ONE, &[], Shape::Param("eps")),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["neg_h", "d"]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct AcousticsMoving;

impl ModelSpec for AcousticsMoving {
    fn id(&self) -> &'static str {
        "acoustics_moving"
    }
    fn summary(&self) -> &'static str {
        "acoustics seen by an observer moving with constant velocity"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("rho", Kind::Scalar, "density"),
            ParamSchema::req("kappa", Kind::Scalar, "bulk modulus"),
            frame_velocity(),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with_real("rho", 1.0).with_real("kappa", 2.0).with("w", ramp(d, 0.2));
        modulated(rec, "kappa", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        vec![block("grad_P", "v_t", ctx.d), block("neg_P_t", "div_v", 1)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_acoustic_n(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let k = ONE * recip(s(env, "kappa"));
        let v = t(env, "w");
        w.ident("v_t", "grad_P", r(-1.0) * recip(s(env, "rho")));
        w.add("v_t", "grad_P", k, &outer(v, v));
        w.add("v_t", "neg_P_t", k, &col(v));
        w.add("div_v", "grad_P", k, &row(v));
        w.ident("div_v", "neg_P_t", k);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("v_t", "grad_P", r(-1.0), &[inv("rho")], Shape::Identity),
            entry("v_t", "grad_P", ONE, &[inv("kappa")], Shape::Outer("w", "w")),
            entry("v_t", "neg_P_t", ONE, &[inv("kappa")], Shape::Col("w")),
            entry("div_v", "grad_P", ONE, &[inv("kappa")], Shape::Row("w")),
            entry("div_v", "neg_P_t", ONE, &[inv("kappa")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}

pub struct ElastodynamicsMoving;

impl ModelSpec for ElastodynamicsMoving {
    fn id(&self) -> &'static str {
        "elastodynamics_moving"
    }
    fn summary(&self) -> &'static str {
        "elastodynamics seen by an observer moving with constant velocity"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![stiffness("C"), ParamSchema::req("rho", Kind::Scalar, "density"), frame_velocity()]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with("C", example_stiffness(d)).with_real("rho", 1.0).with("w", ramp(d, 0.2));
        modulated(rec, "rho", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![block("neg_grad_v", "sigma_t", d * d), block("v_t", "div_sigma", d)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        elastic_gamma(ctx.d)
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let rho = ONE * s(env, "rho");
        let v = t(env, "w");
        w.add("sigma_t", "neg_grad_v", r(-1.0), t(env, "C"));
        w.add("sigma_t", "neg_grad_v", rho, &outer_lift(v, v));
        w.add("sigma_t", "v_t", rho, &col_lift(v));
        w.add("div_sigma", "neg_grad_v", rho, &row_lift(v));
        w.ident("div_sigma", "v_t", rho);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("sigma_t", "neg_grad_v", r(-1.0), &[], Shape::Param("C")),
            entry("sigma_t", "neg_grad_v", ONE, &[f("rho")], Shape::OuterLift("w", "w")),
            entry("sigma_t", "v_t", ONE, &[f("rho")], Shape::ColLift("w")),
            entry("div_sigma", "neg_grad_v", ONE, &[f("rho")], Shape::RowLift("w")),
            entry("div_sigma", "v_t", ONE, &[f("rho")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &[]
    }
    fn lossless(&self) -> bool {
        true
    }
    fn hermitian(&self) -> bool {
        true
    }
}
