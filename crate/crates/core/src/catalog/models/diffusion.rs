//! Diffusion-type models: heat and particle transport, reaction–diffusion,
//! charged species, carriers in semiconductors, spin transport and NMR.

use super::*;
use crate::catalog::audit::{entry, f, inv, recip, AuditEntry, Shape};
use crate::catalog::{block, Block, BlockWriter, Ctx, GridNeeds};
use crate::error::Result;
use crate::projections::{
    compose_block_gamma, gamma_diffusion_g, gamma_longitudinal, gamma_static_gradient, lift_first_index,
    ProjectionFamily,
};

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

/// `(∇T, i∂T/∂t, T)` paired with `(q, q_t, ∇·q + i∂q_t/∂t)`.
fn g_blocks(d: usize, grad: &'static str, it: &'static str, val: &'static str, q: &'static str, qt: &'static str, cons: &'static str) -> [Block; 3] {
    [block(grad, q, d), block(it, qt, 1), block(val, cons, 1)]
}

pub struct ConvectiveDiffusion;

impl ModelSpec for ConvectiveDiffusion {
    fn id(&self) -> &'static str {
        "convective_diffusion"
    }
    fn summary(&self) -> &'static str {
        "heat or particle diffusion with convection by a velocity field"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("K", "conductivity or diffusivity tensor"),
            ParamSchema::req("alpha", Kind::Scalar, "heat capacity times density (1 for particles)"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "convecting velocity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with("K", spd(d, 1.0)).with_real("alpha", 1.0).with("v", ramp(d, 0.2));
        modulated(rec, "K", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        g_blocks(ctx.d, "grad_T", "i_T_t", "T", "q", "q_t", "cons").to_vec()
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_diffusion_g(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("q", "grad_T", ONE, t(env, "K"));
        w.ident("q_t", "T", HALF_I * s(env, "alpha"));
        w.add("cons", "grad_T", r(-1.0), &row(t(env, "v")));
        w.ident("cons", "i_T_t", NEG_HALF_I * s(env, "alpha"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q", "grad_T", ONE, &[], Shape::Param("K")),
            entry("q_t", "T", HALF_I, &[f("alpha")], Shape::Identity),
            entry("cons", "grad_T", r(-1.0), &[], Shape::Row("v")),
            entry("cons", "i_T_t", NEG_HALF_I, &[f("alpha")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons"]
    }
}

pub struct DiffusionLaplace;

impl ModelSpec for DiffusionLaplace {
    fn id(&self) -> &'static str {
        "diffusion_laplace"
    }
    fn summary(&self) -> &'static str {
        "convective diffusion in the Laplace domain at complex rate p"
    }
    fn needs(&self) -> GridNeeds {
        GridNeeds::NoTime
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("K", "conductivity tensor at rate p"),
            ParamSchema::req("alpha", Kind::Scalar, "capacity at rate p"),
            ParamSchema::req("p", Kind::Scalar, "complex Laplace variable"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "convecting velocity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("K", spd(d, 1.0))
            .with_real("alpha", 1.0)
            .with("p", Tensor::scalar(c(0.5, 1.0)))
            .with("v", ramp(d, 0.1));
        modulated(rec, "alpha", 0.2)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        vec![block("grad_T", "q", ctx.d), block("T", "div_q", 1)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_static_gradient(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("q", "grad_T", ONE, t(env, "K"));
        w.add("div_q", "grad_T", r(-1.0), &row(t(env, "v")));
        w.ident("div_q", "T", ONE * s(env, "p") * s(env, "alpha"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q", "grad_T", ONE, &[], Shape::Param("K")),
            entry("div_q", "grad_T", r(-1.0), &[], Shape::Row("v")),
            entry("div_q", "T", ONE, &[f("p"), f("alpha")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["div_q"]
    }
}

pub struct LightDiffusion;

impl ModelSpec for LightDiffusion {
    fn id(&self) -> &'static str {
        "light_diffusion"
    }
    fn summary(&self) -> &'static str {
        "diffuse light transport with absorption"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("D", "light diffusion tensor"),
            ParamSchema::req("c", Kind::Scalar, "speed of light in the medium"),
            ParamSchema::req("mu_a", Kind::Scalar, "absorption coefficient"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "convecting velocity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("D", spd(d, 0.8))
            .with_real("c", 2.0)
            .with_real("mu_a", 0.3)
            .with("v", ramp(d, 0.1));
        modulated(rec, "mu_a", 0.4)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        g_blocks(ctx.d, "grad_phi", "i_phi_t", "phi", "q", "q_t", "cons").to_vec()
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_diffusion_g(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("q", "grad_phi", ONE, t(env, "D"));
        w.ident("q_t", "phi", HALF_I * s(env, "c"));
        w.add("cons", "grad_phi", r(-1.0), &row(t(env, "v")));
        w.ident("cons", "i_phi_t", NEG_HALF_I * s(env, "c"));
        w.ident("cons", "phi", ONE * s(env, "mu_a"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q", "grad_phi", ONE, &[], Shape::Param("D")),
            entry("q_t", "phi", HALF_I, &[f("c")], Shape::Identity),
            entry("cons", "grad_phi", r(-1.0), &[], Shape::Row("v")),
            entry("cons", "i_phi_t", NEG_HALF_I, &[f("c")], Shape::Identity),
            entry("cons", "phi", ONE, &[f("mu_a")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons"]
    }
}

pub struct ReactionDiffusionSlaved;

impl ModelSpec for ReactionDiffusionSlaved {
    fn id(&self) -> &'static str {
        "reaction_diffusion_slaved"
    }
    fn summary(&self) -> &'static str {
        "species B slaved to a known concentration A of the autocatalytic reaction"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("D_B", "diffusion tensor of B"),
            ParamSchema::req("k", Kind::Scalar, "reaction rate"),
            ParamSchema::req("A", Kind::Scalar, "known concentration of A"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new().with("D_B", spd(d, 1.0)).with_real("k", 0.5).with_real("A", 0.8);
        modulated(rec, "A", 0.5)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        g_blocks(ctx.d, "grad_B", "i_B_t", "B", "q_B", "q_tB", "cons_B").to_vec()
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_diffusion_g(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("q_B", "grad_B", ONE, t(env, "D_B"));
        w.ident("q_tB", "B", HALF_I);
        w.ident("cons_B", "i_B_t", NEG_HALF_I);
        w.ident("cons_B", "B", ONE * s(env, "k") * s(env, "A"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q_B", "grad_B", ONE, &[], Shape::Param("D_B")),
            entry("q_tB", "B", HALF_I, &[], Shape::Identity),
            entry("cons_B", "i_B_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons_B", "B", ONE, &[f("k"), f("A")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons_B"]
    }
}

fn two_species_blocks(d: usize) -> Vec<Block> {
    let mut b = g_blocks(d, "grad_A", "i_A_t", "A", "q_A", "q_tA", "cons_A").to_vec();
    b.extend(g_blocks(d, "grad_B", "i_B_t", "B", "q_B", "q_tB", "cons_B"));
    b
}

fn two_species_gamma(d: usize) -> Result<ProjectionFamily> {
    compose_block_gamma("G+G", &[gamma_diffusion_g(d), gamma_diffusion_g(d)])
}

pub struct ReactionDiffusion;

impl ModelSpec for ReactionDiffusion {
    fn id(&self) -> &'static str {
        "reaction_diffusion"
    }
    fn summary(&self) -> &'static str {
        "linearized two-species autocatalytic reaction with diffusion"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("D_A", "diffusion tensor of A"),
            schema_matrix("D_B", "diffusion tensor of B"),
            ParamSchema::req("k", Kind::Scalar, "reaction rate"),
            ParamSchema::req("A", Kind::Scalar, "background concentration of A"),
            ParamSchema::req("B", Kind::Scalar, "background concentration of B"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("D_A", spd(d, 1.0))
            .with("D_B", spd(d, 0.7))
            .with_real("k", 0.4)
            .with_real("A", 1.0)
            .with_real("B", 0.3);
        modulated(rec, "B", 0.5)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        two_species_blocks(ctx.d)
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        two_species_gamma(ctx.d)
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let (k, a, b) = (s(env, "k"), s(env, "A"), s(env, "B"));
        w.add("q_A", "grad_A", ONE, t(env, "D_A"));
        w.ident("q_tA", "A", HALF_I);
        w.ident("cons_A", "i_A_t", NEG_HALF_I);
        w.ident("cons_A", "A", r(-1.0) * k * b);
        w.ident("cons_A", "B", r(-1.0) * k * a);
        w.add("q_B", "grad_B", ONE, t(env, "D_B"));
        w.ident("q_tB", "B", HALF_I);
        w.ident("cons_B", "A", ONE * k * b);
        w.ident("cons_B", "i_B_t", NEG_HALF_I);
        w.ident("cons_B", "B", ONE * k * a);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q_A", "grad_A", ONE, &[], Shape::Param("D_A")),
            entry("q_tA", "A", HALF_I, &[], Shape::Identity),
            entry("cons_A", "i_A_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons_A", "A", r(-1.0), &[f("k"), f("B")], Shape::Identity),
            entry("cons_A", "B", r(-1.0), &[f("k"), f("A")], Shape::Identity),
            entry("q_B", "grad_B", ONE, &[], Shape::Param("D_B")),
            entry("q_tB", "B", HALF_I, &[], Shape::Identity),
            entry("cons_B", "A", ONE, &[f("k"), f("B")], Shape::Identity),
            entry("cons_B", "i_B_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons_B", "B", ONE, &[f("k"), f("A")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons_A", "cons_B"]
    }
}

pub struct PredatorPrey;

impl ModelSpec for PredatorPrey {
    fn id(&self) -> &'static str {
        "predator_prey"
    }
    fn summary(&self) -> &'static str {
        "linearized two-species population dynamics with migration and diffusion"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("D_A", "diffusion tensor of A"),
            schema_matrix("D_B", "diffusion tensor of B"),
            ParamSchema::opt("c_A", Kind::Vector, 0.0, "migration of A"),
            ParamSchema::opt("c_B", Kind::Vector, 0.0, "migration of B"),
            ParamSchema::req("f_A", Kind::Scalar, "∂f/∂A at the background"),
            ParamSchema::req("f_B", Kind::Scalar, "∂f/∂B at the background"),
            ParamSchema::req("g_A", Kind::Scalar, "∂g/∂A at the background"),
            ParamSchema::req("g_B", Kind::Scalar, "∂g/∂B at the background"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("D_A", spd(d, 1.0))
            .with("D_B", spd(d, 0.6))
            .with("c_A", ramp(d, 0.2))
            .with("c_B", ramp(d, -0.1))
            .with_real("f_A", -0.3)
            .with_real("f_B", -0.5)
            .with_real("g_A", 0.4)
            .with_real("g_B", -0.2);
        modulated(rec, "f_B", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        two_species_blocks(ctx.d)
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        two_species_gamma(ctx.d)
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("q_A", "grad_A", ONE, t(env, "D_A"));
        w.ident("q_tA", "A", HALF_I);
        w.add("cons_A", "grad_A", ONE, &row(t(env, "c_A")));
        w.ident("cons_A", "i_A_t", NEG_HALF_I);
        w.ident("cons_A", "A", r(-1.0) * s(env, "f_A"));
        w.ident("cons_A", "B", r(-1.0) * s(env, "f_B"));
        w.add("q_B", "grad_B", ONE, t(env, "D_B"));
        w.ident("q_tB", "B", HALF_I);
        w.ident("cons_B", "A", r(-1.0) * s(env, "g_A"));
        w.add("cons_B", "grad_B", ONE, &row(t(env, "c_B")));
        w.ident("cons_B", "i_B_t", NEG_HALF_I);
        w.ident("cons_B", "B", r(-1.0) * s(env, "g_B"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q_A", "grad_A", ONE, &[], Shape::Param("D_A")),
            entry("q_tA", "A", HALF_I, &[], Shape::Identity),
            entry("cons_A", "grad_A", ONE, &[], Shape::Row("c_A")),
            entry("cons_A", "i_A_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons_A", "A", r(-1.0), &[f("f_A")], Shape::Identity),
            entry("cons_A", "B", r(-1.0), &[f("f_B")], Shape::Identity),
            entry("q_B", "grad_B", ONE, &[], Shape::Param("D_B")),
            entry("q_tB", "B", HALF_I, &[], Shape::Identity),
            entry("cons_B", "A", r(-1.0), &[f("g_A")], Shape::Identity),
            entry("cons_B", "grad_B", ONE, &[], Shape::Row("c_B")),
            entry("cons_B", "i_B_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons_B", "B", r(-1.0), &[f("g_B")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons_A", "cons_B"]
    }
}

pub struct NernstPlanck;

impl ModelSpec for NernstPlanck {
    fn id(&self) -> &'static str {
        "nernst_planck"
    }
    fn summary(&self) -> &'static str {
        "one charged species drifting in a fixed electric potential"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("D", Kind::Scalar, "diffusion coefficient"),
            ParamSchema::req("beta", Kind::Scalar, "1/(k_B T)"),
            ParamSchema::req("q", Kind::Scalar, "species charge"),
            ParamSchema::opt("grad_phi", Kind::Vector, 0.0, "gradient of the fixed potential"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "fluid velocity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with_real("D", 1.0)
            .with_real("beta", 2.0)
            .with_real("q", -1.0)
            .with("grad_phi", ramp(d, 0.3))
            .with("v", ramp(d, 0.1));
        modulated(rec, "D", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        g_blocks(ctx.d, "neg_grad_rho", "neg_i_rho_t", "neg_rho", "q", "q_t", "cons").to_vec()
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_diffusion_g(ctx.d))
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let dd = s(env, "D");
        w.ident("q", "neg_grad_rho", ONE * dd);
        w.add("q", "neg_rho", ONE * dd * s(env, "beta") * s(env, "q"), &col(t(env, "grad_phi")));
        w.add("q", "neg_rho", r(-1.0), &col(t(env, "v")));
        w.ident("q_t", "neg_rho", HALF_I);
        w.ident("cons", "neg_i_rho_t", NEG_HALF_I);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("q", "neg_grad_rho", ONE, &[f("D")], Shape::Identity),
            entry("q", "neg_rho", ONE, &[f("D"), f("beta"), f("q")], Shape::Col("grad_phi")),
            entry("q", "neg_rho", r(-1.0), &[], Shape::Col("v")),
            entry("q_t", "neg_rho", HALF_I, &[], Shape::Identity),
            entry("cons", "neg_i_rho_t", NEG_HALF_I, &[], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons"]
    }
}

pub struct NernstPlanckPoisson;

impl ModelSpec for NernstPlanckPoisson {
    fn id(&self) -> &'static str {
        "nernst_planck_poisson"
    }
    fn summary(&self) -> &'static str {
        "charged species coupled to its own electric potential"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("eps", "electrical permittivity"),
            ParamSchema::req("D", Kind::Scalar, "diffusion coefficient"),
            ParamSchema::req("beta", Kind::Scalar, "1/(k_B T)"),
            ParamSchema::req("q", Kind::Scalar, "species charge"),
            ParamSchema::req("rho", Kind::Scalar, "background concentration"),
            ParamSchema::opt("grad_phi", Kind::Vector, 0.0, "background potential gradient"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "fluid velocity"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("eps", spd(d, 2.0))
            .with_real("D", 1.0)
            .with_real("beta", 1.5)
            .with_real("q", 1.0)
            .with_real("rho", 0.6)
            .with("grad_phi", ramp(d, 0.2))
            .with("v", ramp(d, 0.1));
        modulated(rec, "rho", 0.4)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        let mut b = vec![block("neg_grad_phi", "d", d), block("neg_phi", "div_d", 1)];
        b.extend(g_blocks(d, "neg_grad_rho", "neg_i_rho_t", "neg_rho", "q", "q_t", "cons"));
        b
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        compose_block_gamma("Gs+G", &[gamma_static_gradient(ctx.d), gamma_diffusion_g(ctx.d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let (dd, beta, q) = (s(env, "D"), s(env, "beta"), s(env, "q"));
        w.add("d", "neg_grad_phi", ONE, t(env, "eps"));
        w.ident("div_d", "neg_rho", r(-1.0) * q);
        w.ident("q", "neg_grad_phi", ONE * dd * beta * q * s(env, "rho"));
        w.ident("q", "neg_grad_rho", ONE * dd);
        w.add("q", "neg_rho", ONE * dd * beta * q, &col(t(env, "grad_phi")));
        w.add("q", "neg_rho", r(-1.0), &col(t(env, "v")));
        w.ident("q_t", "neg_rho", HALF_I);
        w.ident("cons", "neg_i_rho_t", NEG_HALF_I);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("d", "neg_grad_phi", ONE, &[], Shape::Param("eps")),
            entry("div_d", "neg_rho", r(-1.0), &[f("q")], Shape::Identity),
            entry("q", "neg_grad_phi", ONE, &[f("D"), f("beta"), f("q"), f("rho")], Shape::Identity),
            entry("q", "neg_grad_rho", ONE, &[f("D")], Shape::Identity),
            entry("q", "neg_rho", ONE, &[f("D"), f("beta"), f("q")], Shape::Col("grad_phi")),
            entry("q", "neg_rho", r(-1.0), &[], Shape::Col("v")),
            entry("q_t", "neg_rho", HALF_I, &[], Shape::Identity),
            entry("cons", "neg_i_rho_t", NEG_HALF_I, &[], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["div_d", "cons"]
    }
}

pub struct Semiconductor;

impl ModelSpec for Semiconductor {
    fn id(&self) -> &'static str {
        "semiconductor"
    }
    fn summary(&self) -> &'static str {
        "small perturbations of electron and hole drift-diffusion with Poisson coupling"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("eps", "permittivity"),
            ParamSchema::req("q", Kind::Scalar, "electron charge"),
            ParamSchema::req("n", Kind::Scalar, "background electron density"),
            ParamSchema::req("p", Kind::Scalar, "background hole density"),
            schema_matrix("mu_n", "electron mobility"),
            schema_matrix("mu_p", "hole mobility"),
            schema_matrix("D_n", "electron diffusivity"),
            schema_matrix("D_p", "hole diffusivity"),
            ParamSchema::opt("e", Kind::Vector, 0.0, "background electric field"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("eps", spd(d, 2.0))
            .with_real("q", 1.0)
            .with_real("n", 0.5)
            .with_real("p", 0.4)
            .with("mu_n", spd(d, 1.2))
            .with("mu_p", spd(d, 0.5))
            .with("D_n", spd(d, 1.0))
            .with("D_p", spd(d, 0.4))
            .with("e", ramp(d, 0.3));
        modulated(rec, "n", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        let mut b = vec![block("neg_grad_V", "d", d), block("neg_V", "div_d", 1)];
        b.extend(g_blocks(d, "grad_n", "i_n_t", "n", "j_n", "j_nt", "cons_n"));
        b.extend(g_blocks(d, "grad_p", "i_p_t", "p", "j_p", "j_pt", "cons_p"));
        b
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        let d = ctx.d;
        compose_block_gamma("Gs+G+G", &[gamma_static_gradient(d), gamma_diffusion_g(d), gamma_diffusion_g(d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let q = s(env, "q");
        let e = t(env, "e");
        let mv = |m: &Tensor| mat_vec(m, e);
        w.add("d", "neg_grad_V", ONE, t(env, "eps"));
        w.ident("div_d", "n", ONE * q);
        w.ident("div_d", "p", r(-1.0) * q);
        w.add("j_n", "neg_grad_V", ONE * q * s(env, "n"), t(env, "mu_n"));
        w.add("j_n", "grad_n", ONE * q, t(env, "D_n"));
        w.add("j_n", "n", ONE * q, &mv(t(env, "mu_n")));
        w.ident("j_nt", "n", HALF_I * q);
        w.ident("cons_n", "i_n_t", NEG_HALF_I * q);
        w.add("j_p", "neg_grad_V", ONE * q * s(env, "p"), t(env, "mu_p"));
        w.add("j_p", "grad_p", r(-1.0) * q, t(env, "D_p"));
        w.add("j_p", "p", ONE * q, &mv(t(env, "mu_p")));
        w.ident("j_pt", "p", NEG_HALF_I * q);
        w.ident("cons_p", "i_p_t", HALF_I * q);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("d", "neg_grad_V", ONE, &[], Shape::Param("eps")),
            entry("div_d", "n", ONE, &[f("q")], Shape::Identity),
            entry("div_d", "p", r(-1.0), &[f("q")], Shape::Identity),
            entry("j_n", "neg_grad_V", ONE, &[f("q"), f("n")], Shape::Param("mu_n")),
            entry("j_n", "grad_n", ONE, &[f("q")], Shape::Param("D_n")),
            entry("j_n", "n", ONE, &[f("q")], Shape::MatVec("mu_n", "e")),
            entry("j_nt", "n", HALF_I, &[f("q")], Shape::Identity),
            entry("cons_n", "i_n_t", NEG_HALF_I, &[f("q")], Shape::Identity),
            entry("j_p", "neg_grad_V", ONE, &[f("q"), f("p")], Shape::Param("mu_p")),
            entry("j_p", "grad_p", r(-1.0), &[f("q")], Shape::Param("D_p")),
            entry("j_p", "p", ONE, &[f("q")], Shape::MatVec("mu_p", "e")),
            entry("j_pt", "p", NEG_HALF_I, &[f("q")], Shape::Identity),
            entry("cons_p", "i_p_t", HALF_I, &[f("q")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["div_d", "cons_n", "cons_p"]
    }
}

pub struct Spintronics;

impl ModelSpec for Spintronics {
    fn id(&self) -> &'static str {
        "spintronics"
    }
    fn summary(&self) -> &'static str {
        "two-channel spin drift-diffusion with spin-flip relaxation"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            schema_matrix("sigma_up", "spin-up conductivity q n↑ μ"),
            schema_matrix("sigma_down", "spin-down conductivity q n↓ μ"),
            ParamSchema::req("q", Kind::Scalar, "electron charge"),
            schema_matrix("D", "diffusivity"),
            schema_matrix("mu", "mobility"),
            ParamSchema::opt("e", Kind::Vector, 0.0, "background electric field"),
            ParamSchema::req("tau_sf", Kind::Scalar, "spin relaxation time"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("sigma_up", spd(d, 0.6))
            .with("sigma_down", spd(d, 0.4))
            .with_real("q", 1.0)
            .with("D", spd(d, 1.0))
            .with("mu", spd(d, 0.8))
            .with("e", ramp(d, 0.2))
            .with_real("tau_sf", 2.0);
        modulated(rec, "sigma_up", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        let mut b = vec![block("neg_grad_V", "zero", d)];
        b.extend(g_blocks(d, "grad_n_up", "i_n_up_t", "n_up", "j_up", "j_t_up", "cons_up"));
        b.extend(g_blocks(d, "grad_n_down", "i_n_down_t", "n_down", "j_down", "j_t_down", "cons_down"));
        b
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        let d = ctx.d;
        compose_block_gamma("Kl+G+G", &[gamma_longitudinal(d), gamma_diffusion_g(d), gamma_diffusion_g(d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let q = s(env, "q");
        let tau = s(env, "tau_sf");
        let mue = mat_vec(t(env, "mu"), t(env, "e"));
        let flip = c(0.5, 0.0) * q * recip(tau);
        let back = c(-0.5, 0.0) * q * recip(tau);
        w.add("j_up", "neg_grad_V", ONE, t(env, "sigma_up"));
        w.add("j_up", "grad_n_up", ONE * q, t(env, "D"));
        w.add("j_up", "n_up", ONE * q, &mue);
        w.ident("j_t_up", "n_up", NEG_HALF_I * q);
        w.ident("cons_up", "i_n_up_t", HALF_I * q);
        w.ident("cons_up", "n_up", flip);
        w.ident("cons_up", "n_down", back);
        w.add("j_down", "neg_grad_V", ONE, t(env, "sigma_down"));
        w.add("j_down", "grad_n_down", ONE * q, t(env, "D"));
        w.add("j_down", "n_down", ONE * q, &mue);
        w.ident("j_t_down", "n_down", NEG_HALF_I * q);
        w.ident("cons_down", "n_up", back);
        w.ident("cons_down", "i_n_down_t", HALF_I * q);
        w.ident("cons_down", "n_down", flip);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("j_up", "neg_grad_V", ONE, &[], Shape::Param("sigma_up")),
            entry("j_up", "grad_n_up", ONE, &[f("q")], Shape::Param("D")),
            entry("j_up", "n_up", ONE, &[f("q")], Shape::MatVec("mu", "e")),
            entry("j_t_up", "n_up", NEG_HALF_I, &[f("q")], Shape::Identity),
            entry("cons_up", "i_n_up_t", HALF_I, &[f("q")], Shape::Identity),
            entry("cons_up", "n_up", c(0.5, 0.0), &[f("q"), inv("tau_sf")], Shape::Identity),
            entry("cons_up", "n_down", c(-0.5, 0.0), &[f("q"), inv("tau_sf")], Shape::Identity),
            entry("j_down", "neg_grad_V", ONE, &[], Shape::Param("sigma_down")),
            entry("j_down", "grad_n_down", ONE, &[f("q")], Shape::Param("D")),
            entry("j_down", "n_down", ONE, &[f("q")], Shape::MatVec("mu", "e")),
            entry("j_t_down", "n_down", NEG_HALF_I, &[f("q")], Shape::Identity),
            entry("cons_down", "n_up", c(-0.5, 0.0), &[f("q"), inv("tau_sf")], Shape::Identity),
            entry("cons_down", "i_n_down_t", HALF_I, &[f("q")], Shape::Identity),
            entry("cons_down", "n_down", c(0.5, 0.0), &[f("q"), inv("tau_sf")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons_up", "cons_down"]
    }
}

pub struct NmrBlochTorrey;

/// `γ η(h) + I/T₂ − (1/T₁ − 1/T₂)/h² h⊗h`, with `η(h)m = h × m`.
pub(crate) fn bloch_matrix(gamma: C64, t1: C64, t2: C64, h: &[C64]) -> Tensor {
    let eta = [
        [c(0.0, 0.0), -h[2], h[1]],
        [h[2], c(0.0, 0.0), -h[0]],
        [-h[1], h[0], c(0.0, 0.0)],
    ];
    let h2: C64 = h.iter().map(|x| x * x).sum();
    let relax = if h2 == c(0.0, 0.0) { c(0.0, 0.0) } else { (recip(t1) - recip(t2)) / h2 };
    let mut m = Tensor::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let diag = if i == j { recip(t2) } else { c(0.0, 0.0) };
            m.data[i * 3 + j] = gamma * eta[i][j] + diag - relax * h[i] * h[j];
        }
    }
    m
}

impl ModelSpec for NmrBlochTorrey {
    fn id(&self) -> &'static str {
        "nmr_bloch_torrey"
    }
    fn summary(&self) -> &'static str {
        "Bloch–Torrey magnetization dynamics with anisotropic diffusion"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("D", Kind::GradientTensor, "diffusion tensor on (gradient, component) pairs")
                .sym(Symmetry::Symmetric),
            ParamSchema::req("gamma", Kind::Scalar, "gyromagnetic ratio"),
            ParamSchema::req("T1", Kind::Scalar, "longitudinal relaxation time"),
            ParamSchema::req("T2", Kind::Scalar, "transverse relaxation time"),
            ParamSchema::req("h", Kind::Vector3, "magnetic field"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with("D", spd(3 * d, 1.0))
            .with_real("gamma", 0.7)
            .with_real("T1", 2.0)
            .with_real("T2", 0.8)
            .with_vector("h", &[0.2, -0.1, 1.0]);
        modulated(rec, "T2", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        vec![block("grad_m", "Q", 3 * ctx.d), block("i_m_t", "q_t", 3), block("m", "cons", 3)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(lift_first_index(&gamma_diffusion_g(ctx.d), &[3])?.with_name("G⊗I3"))
    }
    fn derive(&self, _ctx: &Ctx, _p: usize, env: &mut Env) {
        let cm = bloch_matrix(s(env, "gamma"), s(env, "T1"), s(env, "T2"), &t(env, "h").data);
        env.insert("C", cm);
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.add("Q", "grad_m", ONE, t(env, "D"));
        w.ident("q_t", "m", HALF_I);
        w.ident("cons", "i_m_t", NEG_HALF_I);
        w.add("cons", "m", r(-1.0), t(env, "C"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("Q", "grad_m", ONE, &[], Shape::Param("D")),
            entry("q_t", "m", HALF_I, &[], Shape::Identity),
            entry("cons", "i_m_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons", "m", r(-1.0), &[], Shape::Param("C")),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["Q", "cons"]
    }
}
