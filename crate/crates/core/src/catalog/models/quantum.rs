//! Schrödinger equations and the two-fluid model of superfluids.

use super::*;
use crate::catalog::audit::{entry, f, inv, recip, AuditEntry, Shape};
use crate::catalog::params::Param;
use crate::catalog::{block, Block, BlockWriter, Ctx};
use crate::error::Result;
use crate::projections::{compose_block_gamma, gamma_divergence_pair, gamma_schrodinger_s, ProjectionFamily};

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn s_blocks(d: usize) -> Vec<Block> {
    vec![block("grad_psi", "q_x", d), block("psi_t", "q_t", 1), block("psi", "cons", 1)]
}

pub struct Schrodinger;

impl ModelSpec for Schrodinger {
    fn id(&self) -> &'static str {
        "schrodinger"
    }
    fn summary(&self) -> &'static str {
        "Schrödinger equation with a potential and an optional effective-mass tensor"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("hbar", Kind::Scalar, "reduced Planck constant"),
            ParamSchema::req("m", Kind::Scalar, "particle mass"),
            ParamSchema::req("V", Kind::Scalar, "potential"),
            ParamSchema::opt("A", Kind::Matrix, 0.0, "kinetic tensor, defaults to ħ²/(2m) I").sym(Symmetry::Hermitian),
        ]
    }
    fn example(&self, _d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with_real("hbar", 1.0).with_real("m", 0.5).with_real("V", 0.3);
        modulated(rec, "V", 0.8)
    }
    fn complete(&self, record: &mut ParameterRecord, _d: usize) {
        if record.get("A").is_some() {
            return;
        }
        if let (Some(h), Some(m)) = (record.get("hbar"), record.get("m")) {
            let (h, m) = (h.base.value(), m.base.value());
            let a = h * h / (r(2.0) * m);
            record.insert_param("A", Param { base: Tensor::scalar(a), modulation: None });
        }
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        s_blocks(ctx.d)
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_schrodinger_s(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let h = s(env, "hbar");
        w.add("q_x", "grad_psi", r(-1.0), t(env, "A"));
        w.ident("q_t", "psi", NEG_HALF_I * h);
        w.ident("cons", "psi_t", HALF_I * h);
        w.ident("cons", "psi", r(-1.0) * s(env, "V"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q_x", "grad_psi", r(-1.0), &[], Shape::Param("A")),
            entry("q_t", "psi", NEG_HALF_I, &[f("hbar")], Shape::Identity),
            entry("cons", "psi_t", HALF_I, &[f("hbar")], Shape::Identity),
            entry("cons", "psi", r(-1.0), &[f("V")], Shape::Identity),
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

pub struct SchrodingerMagnetic;

impl ModelSpec for SchrodingerMagnetic {
    fn id(&self) -> &'static str {
        "schrodinger_magnetic"
    }
    fn summary(&self) -> &'static str {
        "charged particle in a vector potential, in units with ħ = 1"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("m", Kind::Scalar, "particle mass"),
            ParamSchema::req("e", Kind::Scalar, "charge coupling to the vector potential"),
            ParamSchema::opt("Phi", Kind::Vector, 0.0, "magnetic vector potential"),
            ParamSchema::req("q", Kind::Scalar, "charge coupling to the electric potential"),
            ParamSchema::req("V", Kind::Scalar, "electric potential"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with_real("m", 0.5)
            .with_real("e", 1.0)
            .with("Phi", ramp(d, 0.3))
            .with_real("q", 1.0)
            .with_real("V", 0.2);
        modulated(rec, "V", 0.5)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        s_blocks(ctx.d)
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_schrodinger_s(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let im = recip(s(env, "m"));
        let e = s(env, "e");
        let phi = t(env, "Phi");
        w.ident("q_x", "grad_psi", r(-0.5) * im);
        w.add("q_x", "psi", HALF_I * e * im, &col(phi));
        w.ident("q_t", "psi", NEG_HALF_I);
        w.add("cons", "grad_psi", NEG_HALF_I * e * im, &row(phi));
        w.ident("cons", "psi_t", HALF_I);
        w.ident("cons", "psi", r(-1.0) * s(env, "q") * s(env, "V"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q_x", "grad_psi", r(-0.5), &[inv("m")], Shape::Identity),
            entry("q_x", "psi", HALF_I, &[f("e"), inv("m")], Shape::Col("Phi")),
            entry("q_t", "psi", NEG_HALF_I, &[], Shape::Identity),
            entry("cons", "grad_psi", NEG_HALF_I, &[f("e"), inv("m")], Shape::Row("Phi")),
            entry("cons", "psi_t", HALF_I, &[], Shape::Identity),
            entry("cons", "psi", r(-1.0), &[f("q"), f("V")], Shape::Identity),
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

/// Thermodynamic derivatives at the background state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermoDerivatives {
    /// `(∂μ/∂ρ)` at fixed entropy.
    pub dmu_drho: f64,
    /// `(∂T/∂ρ)` at fixed entropy.
    pub dt_drho: f64,
    /// `(∂T/∂S)` at fixed density.
    pub dt_ds: f64,
}

/// Coefficients `(c₁, c₂, c₃)` of the two-fluid `L`.
pub fn compute_two_fluid_coefficients(t: ThermoDerivatives, rho_n: f64, rho_s: f64, entropy: f64) -> (f64, f64, f64) {
    let c1 = -rho_s * rho_s * t.dmu_drho;
    let c2 = -entropy * rho_s * t.dt_drho;
    let c3 = entropy * entropy * t.dt_ds + 2.0 * entropy * rho_n * t.dt_drho;
    (c1, c2, c3)
}

pub struct SuperfluidTwoFluid;

impl ModelSpec for SuperfluidTwoFluid {
    fn id(&self) -> &'static str {
        "superfluid_two_fluid"
    }
    fn summary(&self) -> &'static str {
        "linearized two-fluid model of a superfluid in terms of the fluid displacements"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("c1", Kind::Scalar, "normal compression coefficient"),
            ParamSchema::req("c2", Kind::Scalar, "cross coefficient"),
            ParamSchema::req("c3", Kind::Scalar, "superfluid compression coefficient"),
            ParamSchema::req("rho_n", Kind::Scalar, "normal density"),
            ParamSchema::req("rho_s", Kind::Scalar, "superfluid density"),
        ]
    }
    fn example(&self, _d: usize) -> ParameterRecord {
        let th = ThermoDerivatives { dmu_drho: 1.0, dt_drho: 0.2, dt_ds: 0.5 };
        let (c1, c2, c3) = compute_two_fluid_coefficients(th, 0.4, 0.6, 1.0);
        let rec = ParameterRecord::new()
            .with_real("c1", c1)
            .with_real("c2", c2)
            .with_real("c3", c3)
            .with_real("rho_n", 0.4)
            .with_real("rho_s", 0.6);
        modulated(rec, "rho_n", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![
            block("div_u_n", "entropy", 1),
            block("neg_u_n_t", "p_n", d),
            block("div_u_s", "density", 1),
            block("neg_u_s_t", "p_s", d),
        ]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        compose_block_gamma("Dp+Dp", &[gamma_divergence_pair(ctx.d), gamma_divergence_pair(ctx.d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let c2 = ONE * s(env, "c2");
        w.ident("entropy", "div_u_n", ONE * s(env, "c1"));
        w.ident("entropy", "div_u_s", c2);
        w.ident("p_n", "neg_u_n_t", r(-1.0) * s(env, "rho_n"));
        w.ident("density", "div_u_n", c2);
        w.ident("density", "div_u_s", ONE * s(env, "c3"));
        w.ident("p_s", "neg_u_s_t", r(-1.0) * s(env, "rho_s"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("entropy", "div_u_n", ONE, &[f("c1")], Shape::Identity),
            entry("entropy", "div_u_s", ONE, &[f("c2")], Shape::Identity),
            entry("p_n", "neg_u_n_t", r(-1.0), &[f("rho_n")], Shape::Identity),
            entry("density", "div_u_n", ONE, &[f("c2")], Shape::Identity),
            entry("density", "div_u_s", ONE, &[f("c3")], Shape::Identity),
            entry("p_s", "neg_u_s_t", r(-1.0), &[f("rho_s")], Shape::Identity),
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_fluid_coefficients_vanish_without_derivatives() {
        assert_eq!(compute_two_fluid_coefficients(ThermoDerivatives::default(), 0.3, 0.7, 1.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_fluid_coefficients_match_hand_values() {
        let th = ThermoDerivatives { dmu_drho: 1.0, ..Default::default() };
        assert_eq!(compute_two_fluid_coefficients(th, 0.0, 1.0, 1.0), (-1.0, 0.0, 0.0));
        let th = ThermoDerivatives { dmu_drho: 0.0, dt_drho: 1.0, dt_ds: 1.0 };
        let rho_s = 0.25;
        let (_, c2, c3) = compute_two_fluid_coefficients(th, 1.0, rho_s, 2.0);
        assert_eq!(c2, -2.0 * rho_s);
        assert_eq!(c3, 8.0);
    }
}
