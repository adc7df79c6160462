//! Declarative description of every model's `L` and the check that the
//! hand-written builders agree with it exactly.

use rayon::prelude::*;
use serde::Serialize;

use super::params::Tensor;
use super::{Env, PhysicsModel};
use crate::C64;

/// Scalar factor in an entry's coefficient, looked up per point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Factor {
    pub name: &'static str,
    pub inverse: bool,
}

pub const fn f(name: &'static str) -> Factor {
    Factor { name, inverse: false }
}

pub const fn inv(name: &'static str) -> Factor {
    Factor { name, inverse: true }
}

/// Matrix pattern filling one `(row block, column block)` cell.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "shape", content = "of")]
pub enum Shape {
    /// Identity on a square block (also the 1×1 scalar cell).
    Identity,
    /// A tensor parameter with exactly the block's shape.
    Param(&'static str),
    /// Transpose of a tensor parameter.
    ParamT(&'static str),
    /// Vector parameter as a column.
    Col(&'static str),
    /// Vector parameter as a row.
    Row(&'static str),
    /// `d×d` parameter flattened row-major into a `d²` column.
    Flat(&'static str),
    /// `d×d` parameter flattened row-major into a `d²` row.
    FlatT(&'static str),
    /// Matrix inverse of a parameter.
    InvMatrix(&'static str),
    /// Matrix parameter applied to a vector parameter, as a column.
    MatVec(&'static str, &'static str),
    /// Outer product `u vᵀ`.
    Outer(&'static str, &'static str),
    /// Projection onto multiples of the identity in `d×d` matrices.
    IsoProjection,
    /// `d × d²` block with `[i, a·d + i] = v_a`, the `(v·∇)` acting on a
    /// gradient-first matrix.
    ConvectLift(&'static str),
    /// `(u vᵀ) ⊗ I_d` on gradient-first matrix indices.
    OuterLift(&'static str, &'static str),
    /// `v ⊗ I_d` as a `d² × d` block.
    ColLift(&'static str),
    /// `vᵀ ⊗ I_d` as a `d × d²` block.
    RowLift(&'static str),
}

/// One term of `L`: `coef · Π factors · shape` placed at
/// `(J block row, E block column)`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub row: &'static str,
    pub col: &'static str,
    #[serde(serialize_with = "ser_c64")]
    pub coef: C64,
    pub factors: Vec<Factor>,
    pub shape: Shape,
}

fn ser_c64<S: serde::Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

pub fn entry(row: &'static str, col: &'static str, coef: C64, factors: &[Factor], shape: Shape) -> AuditEntry {
    AuditEntry { row, col, coef, factors: factors.to_vec(), shape }
}

/// Reciprocal used both by builders and by the audit, so that both produce
/// the same bits.
pub fn recip(x: C64) -> C64 {
    if x.im == 0.0 {
        C64::new(1.0 / x.re, 0.0)
    } else {
        x.inv()
    }
}

fn get<'a>(env: &'a Env, name: &str) -> &'a Tensor {
    env.get(name).unwrap_or_else(|| panic!("audit references unknown quantity `{name}`"))
}

fn shape_tensor(shape: Shape, env: &Env, rows: usize, cols: usize) -> Tensor {
    let mut t = Tensor::zeros(rows, cols);
    let set = |t: &mut Tensor, i: usize, j: usize, v: C64| t.data[i * cols + j] = v;
    match shape {
        Shape::Identity => {
            for i in 0..rows.min(cols) {
                set(&mut t, i, i, C64::new(1.0, 0.0));
            }
        }
        Shape::Param(n) => t = get(env, n).clone(),
        Shape::ParamT(n) => t = get(env, n).transpose(),
        Shape::Col(n) => t = Tensor::cvector(get(env, n).data.clone()),
        Shape::Row(n) => t = Tensor::cvector(get(env, n).data.clone()).transpose(),
        Shape::Flat(n) => t = Tensor::cvector(get(env, n).data.clone()),
        Shape::FlatT(n) => t = Tensor::cvector(get(env, n).data.clone()).transpose(),
        Shape::InvMatrix(n) => t = super::matrix_inverse(get(env, n)),
        Shape::MatVec(m, v) => {
            let (m, v) = (get(env, m), get(env, v));
            for i in 0..rows {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..m.cols {
                    s += m.at(i, k) * v.data[k];
                }
                set(&mut t, i, 0, s);
            }
        }
        Shape::Outer(u, v) => {
            let (u, v) = (get(env, u), get(env, v));
            for i in 0..rows {
                for j in 0..cols {
                    set(&mut t, i, j, u.data[i] * v.data[j]);
                }
            }
        }
        Shape::IsoProjection => {
            let d = (rows as f64).sqrt().round() as usize;
            let w = C64::new(1.0 / d as f64, 0.0);
            for a in 0..d {
                for b in 0..d {
                    set(&mut t, a * d + a, b * d + b, w);
                }
            }
        }
        Shape::ConvectLift(v) => {
            let v = get(env, v);
            let d = rows;
            for i in 0..d {
                for a in 0..d {
                    set(&mut t, i, a * d + i, v.data[a]);
                }
            }
        }
        Shape::OuterLift(u, v) => {
            let (u, v) = (get(env, u), get(env, v));
            let d = u.data.len();
            for a in 0..d {
                for b in 0..d {
                    for j in 0..d {
                        set(&mut t, a * d + j, b * d + j, u.data[a] * v.data[b]);
                    }
                }
            }
        }
        Shape::ColLift(v) => {
            let v = get(env, v);
            let d = cols;
            for a in 0..d {
                for j in 0..d {
                    set(&mut t, a * d + j, j, v.data[a]);
                }
            }
        }
        Shape::RowLift(v) => {
            let v = get(env, v);
            let d = rows;
            for b in 0..d {
                for j in 0..d {
                    set(&mut t, j, b * d + j, v.data[b]);
                }
            }
        }
    }
    assert_eq!((t.rows, t.cols), (rows, cols), "shape {shape:?} does not fit its {rows}×{cols} cell");
    t
}

/// `L` at one point rebuilt from a table. Coefficients are multiplied left
/// to right, then applied to the shape; entries sharing a cell are summed
/// in table order.
pub fn rebuild_point(model: &PhysicsModel, table: &[AuditEntry], env: &Env) -> Vec<C64> {
    let n = model.n();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for e in table {
        let (r0, rs) = model.j_block(e.row).unwrap_or_else(|| panic!("unknown row block `{}`", e.row));
        let (c0, cs) = model.e_block(e.col).unwrap_or_else(|| panic!("unknown column block `{}`", e.col));
        let mut s = e.coef;
        for fac in &e.factors {
            let v = get(env, fac.name).value();
            s *= if fac.inverse { recip(v) } else { v };
        }
        let t = shape_tensor(e.shape, env, rs, cs);
        for i in 0..rs {
            for j in 0..cs {
                let v = t.data[i * cs + j];
                if v != C64::new(0.0, 0.0) {
                    out[(r0 + i) * n + c0 + j] += s * v;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub model: String,
    pub tag: String,
    pub entries: usize,
    /// Points where the rebuilt matrix differs from the builder in any bit.
    pub mismatched_points: usize,
    pub max_difference: f64,
    /// Nonzero builder entries summed over grid points.
    pub nonzero_entries: usize,
    /// Nonzero builder entries that the table reproduces.
    pub covered_entries: usize,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.mismatched_points == 0 && self.covered_entries == self.nonzero_entries
    }

    pub fn coverage(&self) -> f64 {
        if self.nonzero_entries == 0 {
            1.0
        } else {
            self.covered_entries as f64 / self.nonzero_entries as f64
        }
    }
}

pub fn audit_model(model: &PhysicsModel) -> AuditReport {
    let table = model.audit_table();
    let n = model.n();
    let stats: Vec<(bool, f64, usize, usize)> = (0..model.grid().npts())
        .into_par_iter()
        .map(|p| {
            let env = model.env(p);
            let rebuilt = rebuild_point(model, table, &env);
            let built = model.medium.at(p);
            let mut exact = true;
            let mut diff: f64 = 0.0;
            let mut nonzero = 0;
            let mut covered = 0;
            for k in 0..n * n {
                if built[k] != rebuilt[k] {
                    exact = false;
                    diff = diff.max((built[k] - rebuilt[k]).norm());
                }
                if built[k] != C64::new(0.0, 0.0) {
                    nonzero += 1;
                    if built[k] == rebuilt[k] {
                        covered += 1;
                    }
                }
            }
            (exact, diff, nonzero, covered)
        })
        .collect();
    AuditReport {
        model: model.id.to_string(),
        tag: model.tag.clone(),
        entries: table.len(),
        mismatched_points: stats.iter().filter(|s| !s.0).count(),
        max_difference: stats.iter().map(|s| s.1).fold(0.0, f64::max),
        nonzero_entries: stats.iter().map(|s| s.2).sum(),
        covered_entries: stats.iter().map(|s| s.3).sum(),
    }
}

/// Nonzero pattern at one point, each entry named by its component labels
/// and the index of the table term that produces it.
#[derive(Debug, Clone, Serialize)]
pub struct AuditMapEntry {
    pub row: String,
    pub col: String,
    pub terms: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditMap {
    pub model: String,
    pub tag: String,
    pub table: Vec<AuditEntry>,
    pub nonzero: Vec<AuditMapEntry>,
}

/// Machine-readable map of a model's `L` at grid point `p`.
pub fn audit_map(model: &PhysicsModel, p: usize) -> AuditMap {
    let table = model.audit_table();
    let env = model.env(p);
    let n = model.n();
    let built = model.medium.at(p);
    let e_labels = model.e_labels();
    let j_labels = model.j_labels();
    let mut nonzero = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if built[i * n + j] == C64::new(0.0, 0.0) {
                continue;
            }
            let terms = table
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    let (r0, rs) = model.j_block(e.row).unwrap();
                    let (c0, cs) = model.e_block(e.col).unwrap();
                    (r0..r0 + rs).contains(&i)
                        && (c0..c0 + cs).contains(&j)
                        && shape_tensor(e.shape, &env, rs, cs).data[(i - r0) * cs + (j - c0)] != C64::new(0.0, 0.0)
                })
                .map(|(k, _)| k)
                .collect();
            nonzero.push(AuditMapEntry { row: j_labels[i].clone(), col: e_labels[j].clone(), terms });
        }
    }
    AuditMap { model: model.id.to_string(), tag: model.tag.clone(), table: table.to_vec(), nonzero }
}
