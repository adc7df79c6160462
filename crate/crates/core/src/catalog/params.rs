//! Parameter records: named constant tensors, optionally modulated over the
//! grid, checked against a per-model schema.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;
use crate::C64;

/// Small dense complex tensor stored as a row-major matrix. Scalars are 1×1,
/// vectors are columns, fourth-order tensors are `d²×d²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Tensor {
    pub fn scalar(v: C64) -> Self {
        Self { rows: 1, cols: 1, data: vec![v] }
    }

    pub fn real(v: f64) -> Self {
        Self::scalar(C64::new(v, 0.0))
    }

    pub fn vector(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn cvector(v: Vec<C64>) -> Self {
        Self { rows: v.len(), cols: 1, data: v }
    }

    pub fn matrix(rows: usize, cols: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        Self { rows, cols, data: v.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn cmatrix(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, C64::new(1.0, 0.0))
    }

    pub fn scaled_identity(n: usize, s: C64) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = s;
        }
        t
    }

    /// Isotropic stiffness `λ δ_ij δ_kl + μ(δ_ik δ_jl + δ_il δ_jk)` on
    /// row-major `d²` indices.
    pub fn isotropic_stiffness(d: usize, lambda: f64, mu: f64) -> Self {
        let n = d * d;
        let mut t = Self::zeros(n, n);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = lambda * delta(i, j) * delta(k, l)
                            + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                        t.data[(i * d + j) * n + k * d + l] = C64::new(v, 0.0);
                    }
                }
            }
        }
        t
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn value(&self) -> C64 {
        self.data[0]
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.at(i, j);
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m = m.max((self.at(i, j) - self.at(j, i)).norm());
            }
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m = m.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        m
    }

    /// Largest violation of `C_ijkl = C_jikl = C_klij` for a `d²×d²` tensor.
    pub fn stiffness_symmetry_defect(&self, d: usize) -> f64 {
        if self.rows != d * d || self.cols != d * d {
            return f64::INFINITY;
        }
        let idx = |i: usize, j: usize| i * d + j;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let c = self.at(idx(i, j), idx(k, l));
                        m = m.max((c - self.at(idx(j, i), idx(k, l))).norm());
                        m = m.max((c - self.at(idx(k, l), idx(i, j))).norm());
                    }
                }
            }
        }
        m
    }
}

/// Scalar profile over grid points, mostly in `[-1, 1]`.
#[derive(Clone)]
pub enum Profile {
    /// `cos(2π·mode·x/period)` along one axis.
    Cosine { axis: usize, mode: usize },
    /// `+1` on the first half of an axis, `-1` on the second.
    Step { axis: usize },
    /// Arbitrary values, one per grid point.
    Values(Arc<Vec<f64>>),
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Cosine { axis, mode } => write!(f, "cosine(axis {axis}, mode {mode})"),
            Profile::Step { axis } => write!(f, "step(axis {axis})"),
            Profile::Values(v) => write!(f, "values({})", v.len()),
        }
    }
}

impl Profile {
    pub fn validate(&self, grid: &SpacetimeGrid) -> Result<()> {
        match self {
            Profile::Cosine { axis, .. } | Profile::Step { axis } if *axis >= grid.axes().len() => {
                Err(Error::InvalidArgument(format!("profile axis {axis} does not exist")))
            }
            Profile::Values(v) if v.len() != grid.npts() => Err(Error::ShapeMismatch(format!(
                "profile has {} values for {} grid points",
                v.len(),
                grid.npts()
            ))),
            _ => Ok(()),
        }
    }

    pub fn at(&self, grid: &SpacetimeGrid, p: usize) -> f64 {
        match self {
            Profile::Cosine { axis, mode } => {
                let a = grid.axes()[*axis];
                let j = grid.unravel(p)[*axis];
                (2.0 * PI * (*mode as f64) * j as f64 / a.len as f64).cos()
            }
            Profile::Step { axis } => {
                let a = grid.axes()[*axis];
                if grid.unravel(p)[*axis] < a.len / 2 {
                    1.0
                } else {
                    -1.0
                }
            }
            Profile::Values(v) => v[p],
        }
    }
}

/// `base · (1 + contrast · profile)`.
#[derive(Debug, Clone)]
pub struct Modulation {
    pub contrast: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub base: Tensor,
    pub modulation: Option<Modulation>,
}

impl Param {
    pub fn at(&self, grid: &SpacetimeGrid, p: usize) -> Tensor {
        match &self.modulation {
            None => self.base.clone(),
            Some(m) => self.base.scale(C64::new(1.0 + m.contrast * m.profile.at(grid, p), 0.0)),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.modulation.as_ref().is_none_or(|m| m.contrast == 0.0)
    }
}

/// Named parameter values for one model.
#[derive(Debug, Clone, Default)]
pub struct ParameterRecord {
    values: BTreeMap<String, Param>,
}

impl ParameterRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, t: Tensor) -> &mut Self {
        self.values.insert(name.to_string(), Param { base: t, modulation: None });
        self
    }

    pub fn with(mut self, name: &str, t: Tensor) -> Self {
        self.set(name, t);
        self
    }

    pub fn with_real(self, name: &str, v: f64) -> Self {
        self.with(name, Tensor::real(v))
    }

    pub fn with_vector(self, name: &str, v: &[f64]) -> Self {
        self.with(name, Tensor::vector(v))
    }

    /// Attach a modulation to an existing entry.
    pub fn modulate(mut self, name: &str, contrast: f64, profile: Profile) -> Self {
        if let Some(p) = self.values.get_mut(name) {
            p.modulation = Some(Modulation { contrast, profile });
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.values.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn is_constant(&self) -> bool {
        self.values.values().all(Param::is_constant)
    }

    pub fn insert_param(&mut self, name: &str, p: Param) {
        self.values.insert(name.to_string(), p);
    }
}

/// Expected shape of a parameter, relative to the model dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Scalar,
    /// `d` components.
    Vector,
    /// `d×d`; a scalar input means a multiple of the identity.
    Matrix,
    /// `d²×d²` acting on row-major matrix indices.
    Stiffness,
    /// `d²×d`.
    ThirdOrder,
    /// Vector with as many components as there are momentum axes.
    MomentumVector,
    /// Three components regardless of `d`.
    Vector3,
    /// `3d×3d` acting on (gradient, component) pairs; a scalar means a
    /// multiple of the identity.
    GradientTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    None,
    Symmetric,
    Hermitian,
    Stiffness,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
    /// Value used when an optional entry is absent (scalar, times the
    /// identity for matrices, zero for vectors).
    pub default: f64,
    pub symmetry: Symmetry,
    pub doc: &'static str,
}

impl ParamSchema {
    pub const fn req(name: &'static str, kind: Kind, doc: &'static str) -> Self {
        Self { name, kind, required: true, default: 0.0, symmetry: Symmetry::None, doc }
    }

    pub const fn opt(name: &'static str, kind: Kind, default: f64, doc: &'static str) -> Self {
        Self { name, kind, required: false, default, symmetry: Symmetry::None, doc }
    }

    pub const fn sym(mut self, s: Symmetry) -> Self {
        self.symmetry = s;
        self
    }

    fn shape(&self, d: usize, dp: usize) -> (usize, usize) {
        match self.kind {
            Kind::Scalar => (1, 1),
            Kind::Vector => (d, 1),
            Kind::Matrix => (d, d),
            Kind::Stiffness => (d * d, d * d),
            Kind::ThirdOrder => (d * d, d),
            Kind::MomentumVector => (dp, 1),
            Kind::Vector3 => (3, 1),
            Kind::GradientTensor => (3 * d, 3 * d),
        }
    }

    fn default_tensor(&self, d: usize, dp: usize) -> Tensor {
        let (r, c) = self.shape(d, dp);
        let v = C64::new(self.default, 0.0);
        match self.kind {
            Kind::Matrix | Kind::GradientTensor => Tensor::scaled_identity(r, v),
            Kind::Scalar => Tensor::scalar(v),
            _ => Tensor::zeros(r, c),
        }
    }
}

/// Check a record against a schema and return a completed copy: defaults
/// filled in, scalar inputs for matrix kinds expanded to multiples of the
/// identity, shapes and symmetries verified.
pub fn resolve(
    model: &str,
    schema: &[ParamSchema],
    record: &ParameterRecord,
    grid: &SpacetimeGrid,
    d: usize,
    dp: usize,
) -> Result<ParameterRecord> {
    let err = |message: String| Error::Parameter { model: model.to_string(), message };
    for name in record.names() {
        if !schema.iter().any(|s| s.name == name) {
            return Err(err(format!("unknown parameter `{name}`")));
        }
    }
    let mut out = ParameterRecord::new();
    for s in schema {
        let (r, c) = s.shape(d, dp);
        let mut param = match record.get(s.name) {
            Some(p) => p.clone(),
            None if s.required => {
                return Err(err(format!("missing required parameter `{}` ({:?}: {})", s.name, s.kind, s.doc)))
            }
            None => Param { base: s.default_tensor(d, dp), modulation: None },
        };
        if param.base.is_scalar()
            && (r, c) != (1, 1)
            && matches!(s.kind, Kind::Matrix | Kind::GradientTensor)
        {
            param.base = Tensor::scaled_identity(r, param.base.value());
        }
        if (param.base.rows, param.base.cols) != (r, c) {
            return Err(err(format!(
                "parameter `{}` should be {r}×{c}, found {}×{}",
                s.name, param.base.rows, param.base.cols
            )));
        }
        if !param.base.is_finite() {
            return Err(err(format!("parameter `{}` has non-finite entries", s.name)));
        }
        if let Some(m) = &param.modulation {
            m.profile.validate(grid).map_err(|e| err(e.to_string()))?;
            if !m.contrast.is_finite() {
                return Err(err(format!("parameter `{}` has a non-finite contrast", s.name)));
            }
        }
        let scale = param.base.max_abs().max(1.0);
        let defect = match s.symmetry {
            Symmetry::None => 0.0,
            Symmetry::Symmetric => param.base.symmetry_defect(),
            Symmetry::Hermitian => param.base.hermiticity_defect(),
            Symmetry::Stiffness => param.base.stiffness_symmetry_defect(d),
        };
        if defect > 1e-12 * scale {
            return Err(err(format!(
                "parameter `{}` violates its {:?} symmetry by {defect:.3e}",
                s.name, s.symmetry
            )));
        }
        out.insert_param(s.name, param);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn grid() -> SpacetimeGrid {
        SpacetimeGrid::new(vec![Axis::spatial(4, 1.0), Axis::spatial(4, 1.0), Axis::time(4, 1.0)]).unwrap()
    }

    #[test]
    fn isotropic_stiffness_is_symmetric() {
        let c = Tensor::isotropic_stiffness(3, 2.0, 1.0);
        assert_eq!(c.stiffness_symmetry_defect(3), 0.0);
        assert_eq!(c.at(0, 0), C64::new(4.0, 0.0));
        assert_eq!(c.at(1, 3), C64::new(1.0, 0.0));
    }

    #[test]
    fn resolve_fills_defaults_and_expands_scalars() {
        let schema = [
            ParamSchema::req("K", Kind::Matrix, "conductivity").sym(Symmetry::Symmetric),
            ParamSchema::opt("v", Kind::Vector, 0.0, "velocity"),
        ];
        let rec = ParameterRecord::new().with_real("K", 2.0);
        let out = resolve("m", &schema, &rec, &grid(), 2, 0).unwrap();
        assert_eq!(out.get("K").unwrap().base, Tensor::scaled_identity(2, C64::new(2.0, 0.0)));
        assert_eq!(out.get("v").unwrap().base, Tensor::zeros(2, 1));
    }

    #[test]
    fn resolve_reports_schema_errors() {
        let schema = [ParamSchema::req("K", Kind::Matrix, "conductivity").sym(Symmetry::Symmetric)];
        let g = grid();
        assert!(matches!(resolve("m", &schema, &ParameterRecord::new(), &g, 2, 0), Err(Error::Parameter { .. })));
        let bad = ParameterRecord::new().with("K", Tensor::matrix(2, 2, &[1.0, 0.5, 0.0, 1.0]));
        assert!(resolve("m", &schema, &bad, &g, 2, 0).is_err());
        let extra = ParameterRecord::new().with_real("K", 1.0).with_real("Q", 1.0);
        assert!(resolve("m", &schema, &extra, &g, 2, 0).is_err());
        let shape = ParameterRecord::new().with_vector("K", &[1.0, 2.0]);
        assert!(resolve("m", &schema, &shape, &g, 2, 0).is_err());
    }

    #[test]
    fn modulation_scales_base() {
        let g = grid();
        let p = Param {
            base: Tensor::real(2.0),
            modulation: Some(Modulation { contrast: 0.5, profile: Profile::Step { axis: 0 } }),
        };
        assert_eq!(p.at(&g, 0).value(), C64::new(3.0, 0.0));
        let last = g.npts() - 1;
        assert_eq!(p.at(&g, last).value(), C64::new(1.0, 0.0));
    }
}
