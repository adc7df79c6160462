//! Physics catalog: for each model id, the component layout, `Γ₁`, the
//! pointwise medium `L(x, t)` and the slots where a source may enter.
//!
//! Every builder writes `L` by hand and also publishes a declarative table
//! of its entries (see [`audit`]); the two are compared bit for bit.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::MediumField;
use crate::grid::{Axis, SpacetimeGrid};
use crate::projections::ProjectionFamily;
use crate::C64;

pub mod audit;
mod models;
pub mod params;
pub mod radiative;

pub use audit::{audit_map, audit_model, AuditEntry, AuditMap, AuditReport};
pub use params::{Kind, ParamSchema, ParameterRecord, Profile, Symmetry, Tensor};
pub use models::quantum::{compute_two_fluid_coefficients, ThermoDerivatives};
pub use radiative::{build_direction_set, build_radiative_w, DirectionSet, Phase};

/// Named per-point quantities (parameters and derived tensors).
pub type Env = BTreeMap<&'static str, Tensor>;

/// One slot of the layout: an `E` block and the `J` block it pairs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub e: &'static str,
    pub j: &'static str,
    pub size: usize,
}

pub(crate) const fn block(e: &'static str, j: &'static str, size: usize) -> Block {
    Block { e, j, size }
}

/// Which axes a model expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridNeeds {
    /// A time axis, or a time-harmonic grid.
    Time,
    /// No time axis at all (Laplace-domain models).
    NoTime,
    /// Time plus momentum axes matching the spatial ones.
    PhaseSpace,
}

/// Resolved inputs shared by every point of a model.
pub(crate) struct Ctx {
    pub d: usize,
    pub grid: Arc<SpacetimeGrid>,
    pub params: ParameterRecord,
    pub names: Vec<&'static str>,
    /// Point-independent derived quantities.
    pub constants: Env,
}

pub(crate) trait ModelSpec: Sync {
    fn id(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn schema(&self) -> Vec<ParamSchema>;
    /// Valid, nontrivial parameters for dimension `d`, used by the catalog
    /// listing and by tests.
    fn example(&self, d: usize) -> ParameterRecord;
    fn needs(&self) -> GridNeeds {
        GridNeeds::Time
    }
    /// Model dimension on `grid`.
    fn dim(&self, grid: &SpacetimeGrid) -> Result<usize> {
        match grid.spatial_dim() {
            0 => Err(Error::InvalidGrid(format!("`{}` needs at least one spatial axis", self.id()))),
            d => Ok(d),
        }
    }
    /// Fill entries whose default depends on other entries.
    fn complete(&self, _record: &mut ParameterRecord, _d: usize) {}
    fn prepare(&self, _ctx: &mut Ctx) -> Result<()> {
        Ok(())
    }
    fn blocks(&self, ctx: &Ctx) -> Vec<Block>;
    fn gamma(&self, ctx: &Ctx) -> Result<ProjectionFamily>;
    fn derive(&self, _ctx: &Ctx, _p: usize, _env: &mut Env) {}
    fn build(&self, env: &Env, w: &mut BlockWriter);
    fn table(&self) -> Vec<AuditEntry>;
    fn sources(&self) -> &'static [&'static str];
    /// Real-frequency wave model: `L` carries no loss.
    fn lossless(&self) -> bool {
        false
    }
    /// The displayed `L` is Hermitian for admissible parameters.
    fn hermitian(&self) -> bool {
        false
    }
}

/// Accumulates one point's `L` block by block.
pub struct BlockWriter<'a> {
    blocks: &'a [Block],
    n: usize,
    data: Vec<C64>,
}

impl<'a> BlockWriter<'a> {
    fn new(blocks: &'a [Block]) -> Self {
        let n = blocks.iter().map(|b| b.size).sum();
        Self { blocks, n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    fn locate(&self, name: &str, row: bool) -> (usize, usize) {
        let mut off = 0;
        for b in self.blocks {
            if (row && b.j == name) || (!row && b.e == name) {
                return (off, b.size);
            }
            off += b.size;
        }
        panic!("no block named `{name}`")
    }

    /// Add `s · t` to the `(row, col)` cell, skipping zero entries of `t`.
    pub fn add(&mut self, row: &str, col: &str, s: C64, t: &Tensor) {
        let (r0, rs) = self.locate(row, true);
        let (c0, cs) = self.locate(col, false);
        assert_eq!((t.rows, t.cols), (rs, cs), "tensor does not fit cell ({row}, {col})");
        for i in 0..rs {
            for j in 0..cs {
                let v = t.data[i * cs + j];
                if v != C64::new(0.0, 0.0) {
                    self.data[(r0 + i) * self.n + c0 + j] += s * v;
                }
            }
        }
    }

    /// Add `s · I` to a square cell.
    pub fn ident(&mut self, row: &str, col: &str, s: C64) {
        let (_, rs) = self.locate(row, true);
        self.add(row, col, s, &Tensor::identity(rs));
    }
}

/// A catalog model instantiated on a grid.
pub struct PhysicsModel {
    pub id: &'static str,
    pub tag: String,
    pub blocks: Vec<Block>,
    pub gamma: ProjectionFamily,
    pub medium: MediumField,
    pub source_slots: Vec<&'static str>,
    pub params: ParameterRecord,
    pub lossless: bool,
    pub hermitian: bool,
    ctx: Ctx,
    spec: &'static dyn ModelSpec,
    table: Vec<AuditEntry>,
}

impl std::fmt::Debug for PhysicsModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhysicsModel")
            .field("id", &self.id)
            .field("tag", &self.tag)
            .field("blocks", &self.blocks)
            .field("gamma", &self.gamma.name())
            .finish()
    }
}

fn block_span(blocks: &[Block], name: &str, row: bool) -> Option<(usize, usize)> {
    let mut off = 0;
    for b in blocks {
        if (row && b.j == name) || (!row && b.e == name) {
            return Some((off, b.size));
        }
        off += b.size;
    }
    None
}

fn expand_labels(blocks: &[Block], row: bool) -> Vec<String> {
    let mut out = Vec::new();
    for b in blocks {
        let name = if row { b.j } else { b.e };
        if b.size == 1 {
            out.push(name.to_string());
        } else {
            out.extend((0..b.size).map(|i| format!("{name}[{i}]")));
        }
    }
    out
}

impl PhysicsModel {
    pub fn n(&self) -> usize {
        self.medium.n()
    }

    /// Model dimension (spatial, or 3 for models tied to physical space).
    pub fn dim(&self) -> usize {
        self.ctx.d
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.ctx.grid
    }

    pub fn e_labels(&self) -> Vec<String> {
        expand_labels(&self.blocks, false)
    }

    pub fn j_labels(&self) -> Vec<String> {
        expand_labels(&self.blocks, true)
    }

    /// Offset and size of a `J` block.
    pub fn j_block(&self, name: &str) -> Option<(usize, usize)> {
        block_span(&self.blocks, name, true)
    }

    /// Offset and size of an `E` block.
    pub fn e_block(&self, name: &str) -> Option<(usize, usize)> {
        block_span(&self.blocks, name, false)
    }

    /// Component indices where a source may be nonzero.
    pub fn source_components(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for s in &self.source_slots {
            let (o, n) = self.j_block(s).expect("source slot names a block");
            out.extend(o..o + n);
        }
        out
    }

    pub fn audit_table(&self) -> &[AuditEntry] {
        &self.table
    }

    /// Parameters and derived quantities at grid point `p`.
    pub fn env(&self, p: usize) -> Env {
        point_env(self.spec, &self.ctx, p)
    }

    pub fn summary(&self) -> &'static str {
        self.spec.summary()
    }

    pub fn schema(&self) -> Vec<ParamSchema> {
        self.spec.schema()
    }
}

fn point_env(spec: &dyn ModelSpec, ctx: &Ctx, p: usize) -> Env {
    let mut env = ctx.constants.clone();
    for &name in &ctx.names {
        if let Some(v) = ctx.params.get(name) {
            env.insert(name, v.at(&ctx.grid, p));
        }
    }
    spec.derive(ctx, p, &mut env);
    env
}

/// Matrix inverse shared by builders and the audit; non-finite on failure.
pub(crate) fn matrix_inverse(t: &Tensor) -> Tensor {
    let m = nalgebra::DMatrix::from_row_slice(t.rows, t.cols, &t.data);
    match m.try_inverse() {
        Some(inv) => {
            let mut data = Vec::with_capacity(t.rows * t.cols);
            for i in 0..t.rows {
                for j in 0..t.cols {
                    data.push(inv[(i, j)]);
                }
            }
            Tensor::cmatrix(t.rows, t.cols, data)
        }
        None => Tensor::cmatrix(t.rows, t.cols, vec![C64::new(f64::NAN, 0.0); t.rows * t.cols]),
    }
}

static TAGS: &str = include_str!("../../data/model_tags");

/// Reference tag of a model's displayed form.
pub fn model_tag(id: &str) -> String {
    TAGS.lines()
        .filter_map(|l| l.split_once(char::is_whitespace))
        .find(|(k, _)| *k == id)
        .map(|(_, v)| v.trim().to_string())
        .unwrap_or_default()
}

pub(crate) fn spec_by_id(id: &str) -> Result<&'static dyn ModelSpec> {
    models::ALL
        .iter()
        .copied()
        .find(|m| m.id() == id)
        .ok_or_else(|| Error::UnknownModel(id.to_string()))
}

/// All catalog ids in listing order.
pub fn model_ids() -> Vec<&'static str> {
    models::ALL.iter().map(|m| m.id()).collect()
}

fn check_grid(spec: &dyn ModelSpec, grid: &SpacetimeGrid) -> Result<()> {
    let has_time = grid.time_axis().is_some() || grid.fixed_omega().is_some();
    let id = spec.id();
    match spec.needs() {
        GridNeeds::Time if !has_time => {
            Err(Error::InvalidGrid(format!("`{id}` needs a time axis or a time-harmonic grid")))
        }
        GridNeeds::NoTime if has_time => {
            Err(Error::InvalidGrid(format!("`{id}` is posed in the Laplace domain and takes no time axis")))
        }
        GridNeeds::PhaseSpace if !has_time || grid.momentum_dim() == 0 => {
            Err(Error::InvalidGrid(format!("`{id}` needs a time axis and momentum axes")))
        }
        GridNeeds::PhaseSpace if grid.momentum_dim() != grid.spatial_dim() => Err(Error::InvalidGrid(format!(
            "`{id}` needs as many momentum axes as spatial axes ({} vs {})",
            grid.momentum_dim(),
            grid.spatial_dim()
        ))),
        GridNeeds::Time | GridNeeds::NoTime if grid.momentum_dim() > 0 => {
            Err(Error::InvalidGrid(format!("`{id}` does not use momentum axes")))
        }
        _ => Ok(()),
    }
}

/// Instantiate catalog model `id` on `grid`.
pub fn build_model(id: &str, grid: Arc<SpacetimeGrid>, params: &ParameterRecord) -> Result<PhysicsModel> {
    let spec = spec_by_id(id)?;
    check_grid(spec, &grid)?;
    let d = spec.dim(&grid)?;
    let dp = grid.momentum_dim();
    let mut record = params.clone();
    spec.complete(&mut record, d);
    let schema = spec.schema();
    let resolved = params::resolve(spec.id(), &schema, &record, &grid, d, dp)?;
    let mut ctx = Ctx {
        d,
        grid: grid.clone(),
        params: resolved.clone(),
        names: schema.iter().map(|s| s.name).collect(),
        constants: Env::new(),
    };
    spec.prepare(&mut ctx)?;
    let blocks = spec.blocks(&ctx);
    let gamma = spec.gamma(&ctx)?;
    let n: usize = blocks.iter().map(|b| b.size).sum();
    if gamma.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "`{id}`: projection size {} differs from layout size {n}",
            gamma.n()
        )));
    }
    let medium = MediumField::from_fn(grid.clone(), n, |p| {
        let env = point_env(spec, &ctx, p);
        let mut w = BlockWriter::new(&blocks);
        spec.build(&env, &mut w);
        w.data
    })
    .map_err(|e| Error::Parameter { model: id.to_string(), message: format!("medium is not usable: {e}") })?;
    Ok(PhysicsModel {
        id: spec.id(),
        tag: model_tag(spec.id()),
        blocks,
        gamma,
        medium,
        source_slots: spec.sources().to_vec(),
        params: resolved,
        lossless: spec.lossless(),
        hermitian: spec.hermitian(),
        ctx,
        spec,
        table: spec.table(),
    })
}

/// Dimension `id` takes on `grid`, as used to shape its parameters.
pub fn model_dim(id: &str, grid: &SpacetimeGrid) -> Result<usize> {
    spec_by_id(id)?.dim(grid)
}

/// Example parameters for `id` in dimension `d`.
pub fn example_params(id: &str, d: usize) -> Result<ParameterRecord> {
    Ok(spec_by_id(id)?.example(d))
}

/// Small grid on which `id` can be built with [`example_params`].
pub fn example_grid(id: &str, spatial: &[usize], nt: usize) -> Result<SpacetimeGrid> {
    let spec = spec_by_id(id)?;
    let mut axes: Vec<Axis> = spatial.iter().map(|&n| Axis::spatial(n, 1.0)).collect();
    if spec.needs() == GridNeeds::PhaseSpace {
        axes.extend(spatial.iter().map(|&n| Axis::momentum(n, 0.5)));
    }
    if spec.needs() != GridNeeds::NoTime {
        axes.push(Axis::time(nt, 0.5));
    }
    SpacetimeGrid::new(axes)
}

/// Everything the listing reports about one id.
#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub id: &'static str,
    pub tag: String,
    pub summary: &'static str,
    pub needs: GridNeeds,
    pub gamma: String,
    /// Layout on a one-spatial-dimension example grid.
    pub e_blocks: Vec<(String, usize)>,
    pub j_blocks: Vec<(String, usize)>,
    pub source_slots: Vec<&'static str>,
    pub lossless: bool,
    pub params: Vec<ParamSchema>,
}

pub fn describe(id: &str) -> Result<ModelInfo> {
    let spec = spec_by_id(id)?;
    let grid = Arc::new(example_grid(id, &[2], 2)?);
    let d = spec.dim(&grid)?;
    let model = build_model(id, grid, &spec.example(d))?;
    Ok(ModelInfo {
        id: spec.id(),
        tag: model.tag.clone(),
        summary: spec.summary(),
        needs: spec.needs(),
        gamma: model.gamma.name().to_string(),
        e_blocks: model.blocks.iter().map(|b| (b.e.to_string(), b.size)).collect(),
        j_blocks: model.blocks.iter().map(|b| (b.j.to_string(), b.size)).collect(),
        source_slots: spec.sources().to_vec(),
        lossless: spec.lossless(),
        params: spec.schema(),
    })
}
