//! Transport on phase space or direction sets, and Boussinesq convection.

use super::*;
use crate::catalog::audit::{entry, f, inv, recip, AuditEntry, Shape};
use crate::catalog::radiative::{build_direction_set, build_radiative_w, DirectionSet, Phase};
use crate::catalog::{block, Block, BlockWriter, Ctx, GridNeeds};
use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;
use crate::projections::{compose_block_gamma, gamma_boltzmann, gamma_diffusion_g, lift_first_index, ProjectionFamily};

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn count(ctx: &Ctx, name: &str) -> Result<usize> {
    let v = ctx.params.get(name).map(|p| p.base.value()).unwrap_or(c(0.0, 0.0));
    if v.im != 0.0 || v.re < 1.0 || v.re.fract() != 0.0 {
        return Err(Error::Parameter {
            model: "radiative_transfer".into(),
            message: format!("`{name}` must be a positive integer, got {v}"),
        });
    }
    Ok(v.re as usize)
}

fn directions(env: &Env) -> DirectionSet {
    let dirs = t(env, "directions");
    let w = t(env, "weights");
    DirectionSet {
        directions: (0..dirs.rows).map(|i| [dirs.at(i, 0).re, dirs.at(i, 1).re, dirs.at(i, 2).re]).collect(),
        weights: w.data.iter().map(|x| x.re).collect(),
    }
}

pub struct RadiativeTransfer;

impl ModelSpec for RadiativeTransfer {
    fn id(&self) -> &'static str {
        "radiative_transfer"
    }
    fn summary(&self) -> &'static str {
        "radiance on a discrete set of directions with absorption and scattering"
    }
    fn dim(&self, grid: &SpacetimeGrid) -> Result<usize> {
        match grid.spatial_dim() {
            1..=3 => Ok(3),
            d => Err(Error::InvalidGrid(format!("`radiative_transfer` needs 1 to 3 spatial axes, found {d}"))),
        }
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("c", Kind::Scalar, "speed of light"),
            ParamSchema::req("mu_a", Kind::Scalar, "absorption coefficient"),
            ParamSchema::req("mu_s", Kind::Scalar, "scattering coefficient"),
            ParamSchema::opt("g", Kind::Scalar, 0.0, "Henyey–Greenstein asymmetry, 0 for isotropic"),
            ParamSchema::opt("n_polar", Kind::Scalar, 2.0, "Gauss–Legendre nodes in the polar cosine"),
            ParamSchema::opt("n_azimuth", Kind::Scalar, 4.0, "uniform azimuthal nodes"),
        ]
    }
    fn example(&self, _d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with_real("c", 1.0)
            .with_real("mu_a", 0.2)
            .with_real("mu_s", 0.8)
            .with_real("g", 0.3)
            .with_real("n_polar", 2.0)
            .with_real("n_azimuth", 2.0);
        modulated(rec, "mu_a", 0.5)
    }
    fn prepare(&self, ctx: &mut Ctx) -> Result<()> {
        let set = build_direction_set(count(ctx, "n_polar")?, count(ctx, "n_azimuth")?)?;
        let n = set.len();
        let mut v = Tensor::zeros(n, 3 * n);
        for (i, dir) in set.directions.iter().enumerate() {
            for a in 0..3 {
                v.data[i * 3 * n + a * n + i] = r(dir[a]);
            }
        }
        let flat: Vec<f64> = set.directions.iter().flatten().copied().collect();
        ctx.constants.insert("V", v);
        ctx.constants.insert("directions", Tensor::matrix(n, 3, &flat));
        ctx.constants.insert("weights", Tensor::vector(&set.weights));
        Ok(())
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let n = ctx.constants["weights"].rows;
        vec![block("grad_L", "j", 3 * n), block("i_L_t", "j_t", n), block("L", "cons", n)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        let n = ctx.constants["weights"].rows;
        Ok(lift_first_index(&gamma_diffusion_g(3), &[n])?.with_name(format!("G⊗I{n}")))
    }
    /// `W` at this point. Inadmissible inputs give a non-finite `W`, which
    /// the medium rejects.
    fn derive(&self, _ctx: &Ctx, _p: usize, env: &mut Env) {
        let set = directions(env);
        let n = set.len();
        let (mu_a, mu_s, g) = (s(env, "mu_a"), s(env, "mu_s"), s(env, "g"));
        let w = if mu_a.im != 0.0 || mu_s.im != 0.0 || g.im != 0.0 {
            None
        } else {
            Phase::from_asymmetry(g.re)
                .and_then(|ph| build_radiative_w(&set, mu_a.re + mu_s.re, mu_s.re, ph))
                .ok()
        };
        let w = w.unwrap_or_else(|| vec![f64::NAN; n * n]);
        env.insert("W", Tensor::matrix(n, n, &w));
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let cc = s(env, "c");
        w.ident("j_t", "L", HALF_I * cc);
        w.add("cons", "grad_L", r(-1.0) * cc, t(env, "V"));
        w.ident("cons", "i_L_t", NEG_HALF_I * cc);
        w.add("cons", "L", r(-1.0), t(env, "W"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("j_t", "L", HALF_I, &[f("c")], Shape::Identity),
            entry("cons", "grad_L", r(-1.0), &[f("c")], Shape::Param("V")),
            entry("cons", "i_L_t", NEG_HALF_I, &[f("c")], Shape::Identity),
            entry("cons", "L", r(-1.0), &[], Shape::Param("W")),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons"]
    }
}

pub struct BoltzmannBgk;

impl ModelSpec for BoltzmannBgk {
    fn id(&self) -> &'static str {
        "boltzmann_bgk"
    }
    fn summary(&self) -> &'static str {
        "linearized Boltzmann equation with BGK relaxation on phase space"
    }
    fn needs(&self) -> GridNeeds {
        GridNeeds::PhaseSpace
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("m", Kind::Scalar, "particle mass"),
            ParamSchema::opt("F", Kind::MomentumVector, 0.0, "external force"),
            ParamSchema::req("nu", Kind::Scalar, "collision frequency"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let rec = ParameterRecord::new()
            .with_real("m", 1.0)
            .with("F", ramp(d, 0.1))
            .with_real("nu", 0.5);
        modulated(rec, "nu", 0.4)
    }
    fn prepare(&self, ctx: &mut Ctx) -> Result<()> {
        let dp = ctx.grid.momentum_dim();
        if dp != ctx.d {
            return Err(Error::InvalidGrid(format!(
                "`boltzmann_bgk` needs as many momentum axes as spatial axes ({dp} vs {})",
                ctx.d
            )));
        }
        Ok(())
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![block("grad_x", "j_x", d), block("grad_p", "j_p", d), block("i_f_t", "j_t", 1), block("f", "cons", 1)]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        Ok(gamma_boltzmann(ctx.d, ctx.d))
    }
    fn derive(&self, ctx: &Ctx, p: usize, env: &mut Env) {
        env.insert("p", Tensor::vector(&ctx.grid.momentum_coordinates(p)));
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        w.ident("j_t", "f", HALF_I);
        w.add("cons", "grad_x", r(-1.0) * recip(s(env, "m")), &row(t(env, "p")));
        w.add("cons", "grad_p", r(-1.0), &row(t(env, "F")));
        w.ident("cons", "i_f_t", NEG_HALF_I);
        w.ident("cons", "f", r(-1.0) * s(env, "nu"));
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("j_t", "f", HALF_I, &[], Shape::Identity),
            entry("cons", "grad_x", r(-1.0), &[inv("m")], Shape::Row("p")),
            entry("cons", "grad_p", r(-1.0), &[], Shape::Row("F")),
            entry("cons", "i_f_t", NEG_HALF_I, &[], Shape::Identity),
            entry("cons", "f", r(-1.0), &[f("nu")], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["cons"]
    }
}

pub struct Boussinesq;

impl ModelSpec for Boussinesq {
    fn id(&self) -> &'static str {
        "boussinesq"
    }
    fn summary(&self) -> &'static str {
        "Boussinesq convection linearized about a steady flow and temperature"
    }
    fn schema(&self) -> Vec<ParamSchema> {
        vec![
            ParamSchema::req("lambda_h", Kind::Scalar, "penalty enforcing incompressibility"),
            ParamSchema::req("rho_b", Kind::Scalar, "background density"),
            ParamSchema::req("alpha", Kind::Scalar, "thermal expansion coefficient"),
            ParamSchema::req("K", Kind::Scalar, "thermal diffusivity"),
            ParamSchema::opt("g", Kind::Vector, 0.0, "gravitational acceleration"),
            ParamSchema::opt("v", Kind::Vector, 0.0, "background velocity"),
            ParamSchema::opt("grad_v", Kind::Matrix, 0.0, "background velocity gradient, [i, j] = ∂v_j/∂x_i"),
            ParamSchema::opt("grad_T", Kind::Vector, 0.0, "background temperature gradient"),
        ]
    }
    fn example(&self, d: usize) -> ParameterRecord {
        let mut gv = vec![0.0; d * d];
        if d > 1 {
            gv[1] = 0.2;
        }
        let rec = ParameterRecord::new()
            .with_real("lambda_h", 5.0)
            .with_real("rho_b", 1.0)
            .with_real("alpha", 0.3)
            .with_real("K", 0.7)
            .with("g", ramp(d, -1.0))
            .with("v", ramp(d, 0.2))
            .with("grad_v", Tensor::matrix(d, d, &gv))
            .with("grad_T", ramp(d, 0.1));
        modulated(rec, "K", 0.3)
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block> {
        let d = ctx.d;
        vec![
            block("grad_v", "neg_P_I", d * d),
            block("i_v_t", "zero", d),
            block("v", "neg_grad_P", d),
            block("grad_T", "q", d),
            block("i_T_t", "q_t", 1),
            block("T", "cons", 1),
        ]
    }
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily> {
        let d = ctx.d;
        let velocity = lift_first_index(&gamma_diffusion_g(d), &[d])?;
        compose_block_gamma("G⊗I+G", &[velocity, gamma_diffusion_g(d)])
    }
    fn build(&self, env: &Env, w: &mut BlockWriter) {
        let d = t(env, "v").data.len();
        w.add("neg_P_I", "grad_v", ONE * s(env, "lambda_h"), &iso_projection(d));
        w.add("neg_grad_P", "grad_v", ONE, &convect_lift(t(env, "v")));
        w.add("neg_grad_P", "v", ONE, &t(env, "grad_v").transpose());
        w.ident("neg_grad_P", "v", ONE * s(env, "rho_b"));
        w.add("neg_grad_P", "T", ONE * s(env, "alpha") * s(env, "rho_b"), &col(t(env, "g")));
        w.ident("q", "grad_T", ONE * s(env, "K"));
        w.ident("q_t", "T", HALF_I);
        w.add("cons", "v", ONE, &row(t(env, "grad_T")));
        w.add("cons", "grad_T", ONE, &row(t(env, "v")));
        w.ident("cons", "i_T_t", NEG_HALF_I);
    }
    fn table(&self) -> Vec<AuditEntry> {
        vec![
            entry("neg_P_I", "grad_v", ONE, &[f("lambda_h")], Shape::IsoProjection),
            entry("neg_grad_P", "grad_v", ONE, &[], Shape::ConvectLift("v")),
            entry("neg_grad_P", "v", ONE, &[], Shape::ParamT("grad_v")),
            entry("neg_grad_P", "v", ONE, &[f("rho_b")], Shape::Identity),
            entry("neg_grad_P", "T", ONE, &[f("alpha"), f("rho_b")], Shape::Col("g")),
            entry("q", "grad_T", ONE, &[f("K")], Shape::Identity),
            entry("q_t", "T", HALF_I, &[], Shape::Identity),
            entry("cons", "v", ONE, &[], Shape::Row("grad_T")),
            entry("cons", "grad_T", ONE, &[], Shape::Row("v")),
            entry("cons", "i_T_t", NEG_HALF_I, &[], Shape::Identity),
        ]
    }
    fn sources(&self) -> &'static [&'static str] {
        &["neg_grad_P"]
    }
}
