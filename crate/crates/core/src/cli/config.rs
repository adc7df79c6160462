//! TOML run configuration and its translation into grids, models and sources.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::catalog::{build_model, example_params, model_dim, ParameterRecord, PhysicsModel, Profile, Tensor};
use crate::error::{Error, Result};
use crate::field::{time_window, ComponentField, Representation};
use crate::grid::{Axis, SpacetimeGrid};
use crate::C64;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; the subcommand on the command line wins.
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    pub mms: Option<MmsSpec>,
    pub dispersion: Option<DispersionSpec>,
    /// Directory relative paths resolve against (the config file's).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Full axis list; overrides the shorthand fields below.
    pub axes: Option<Vec<Axis>>,
    #[serde(default)]
    pub spatial: Vec<usize>,
    pub spacing: Option<SpacingSpec>,
    #[serde(default)]
    pub momentum: Vec<usize>,
    pub momentum_spacing: Option<f64>,
    pub nt: Option<usize>,
    pub dt: Option<f64>,
    /// Fixed frequency of a time-harmonic grid.
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpacingSpec {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<SpacetimeGrid>> {
        let axes = match &self.axes {
            Some(a) => a.clone(),
            None => {
                if self.spatial.is_empty() {
                    return Err(config_err("grid needs `spatial` lengths or an explicit `axes` list"));
                }
                let spacing: Vec<f64> = match &self.spacing {
                    None => vec![1.0; self.spatial.len()],
                    Some(SpacingSpec::Uniform(h)) => vec![*h; self.spatial.len()],
                    Some(SpacingSpec::PerAxis(v)) if v.len() == self.spatial.len() => v.clone(),
                    Some(SpacingSpec::PerAxis(v)) => {
                        return Err(config_err(format!(
                            "grid.spacing has {} entries for {} spatial axes",
                            v.len(),
                            self.spatial.len()
                        )))
                    }
                };
                let mut axes: Vec<Axis> =
                    self.spatial.iter().zip(&spacing).map(|(&n, &h)| Axis::spatial(n, h)).collect();
                let hp = self.momentum_spacing.unwrap_or(1.0);
                axes.extend(self.momentum.iter().map(|&n| Axis::momentum(n, hp)));
                match (self.nt, self.dt) {
                    (Some(nt), dt) => axes.push(Axis::time(nt, dt.unwrap_or(1.0))),
                    (None, Some(_)) => return Err(config_err("grid.dt given without grid.nt")),
                    (None, None) => {}
                }
                axes
            }
        };
        let grid = match self.omega0 {
            Some(w) => SpacetimeGrid::time_harmonic(axes, w),
            None => SpacetimeGrid::new(axes),
        };
        Ok(Arc::new(grid.map_err(|e| config_err(e.to_string()))?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub id: String,
    /// Start from the catalog example parameters and apply `params` on top.
    #[serde(default)]
    pub example: bool,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    #[serde(default)]
    pub modulate: BTreeMap<String, ModulationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSpec {
    pub contrast: f64,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub axis: usize,
    #[serde(default = "one")]
    pub mode: usize,
}

fn default_profile() -> String {
    "cosine".into()
}

fn one() -> usize {
    1
}

impl ModulationSpec {
    pub fn profile(&self) -> Result<Profile> {
        match self.profile.as_str() {
            "cosine" => Ok(Profile::Cosine { axis: self.axis, mode: self.mode }),
            "step" => Ok(Profile::Step { axis: self.axis }),
            other => Err(config_err(format!("unknown modulation profile `{other}` (cosine, step)"))),
        }
    }
}

fn number(v: &toml::Value) -> Option<C64> {
    match v {
        toml::Value::Float(x) => Some(C64::new(*x, 0.0)),
        toml::Value::Integer(i) => Some(C64::new(*i as f64, 0.0)),
        toml::Value::Table(t) if t.keys().all(|k| k == "re" || k == "im") => {
            let part = |k: &str| t.get(k).map_or(Some(0.0), |v| number(v).filter(|c| c.im == 0.0).map(|c| c.re));
            Some(C64::new(part("re")?, part("im")?))
        }
        _ => None,
    }
}

/// Numbers, `{ re, im }` tables, arrays of those, arrays of arrays, or
/// `{ isotropic = { lambda, mu } }` for a stiffness tensor.
pub fn tensor_from_toml(name: &str, v: &toml::Value, d: usize) -> Result<Tensor> {
    let bad = || config_err(format!("parameter `{name}` is not a number, vector, matrix or known table"));
    if let Some(c) = number(v) {
        return Ok(Tensor::scalar(c));
    }
    match v {
        toml::Value::Table(t) => {
            let iso = t.get("isotropic").and_then(|i| i.as_table()).ok_or_else(bad)?;
            let get = |k: &str| iso.get(k).and_then(number).map(|c| c.re).ok_or_else(bad);
            Ok(Tensor::isotropic_stiffness(d, get("lambda")?, get("mu")?))
        }
        toml::Value::Array(rows) if rows.iter().all(|r| r.is_array()) => {
            let cols = rows.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
            let mut data = Vec::with_capacity(rows.len() * cols);
            for r in rows {
                let r = r.as_array().expect("checked above");
                if r.len() != cols {
                    return Err(config_err(format!("parameter `{name}` has ragged rows")));
                }
                for x in r {
                    data.push(number(x).ok_or_else(bad)?);
                }
            }
            Ok(Tensor::cmatrix(rows.len(), cols, data))
        }
        toml::Value::Array(xs) => {
            Ok(Tensor::cvector(xs.iter().map(|x| number(x).ok_or_else(bad)).collect::<Result<_>>()?))
        }
        _ => Err(bad()),
    }
}

impl ModelSpec {
    pub fn record(&self, grid: &SpacetimeGrid) -> Result<ParameterRecord> {
        let d = model_dim(&self.id, grid)?;
        let mut rec = if self.example { example_params(&self.id, d)? } else { ParameterRecord::new() };
        for (name, v) in &self.params {
            rec.set(name, tensor_from_toml(name, v, d)?);
        }
        for (name, m) in &self.modulate {
            if rec.get(name).is_none() {
                return Err(config_err(format!("cannot modulate `{name}`: no value given")));
            }
            rec = rec.modulate(name, m.contrast, m.profile()?);
        }
        Ok(rec)
    }

    pub fn build(&self, grid: Arc<SpacetimeGrid>) -> Result<PhysicsModel> {
        let rec = self.record(&grid)?;
        build_model(&self.id, grid, &rec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Krylov,
    Neumann,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Reference constant as `[re, im]`; default picks one from the medium.
    pub c: Option<[f64; 2]>,
    pub restart: Option<usize>,
}

fn default_method() -> Method {
    Method::Krylov
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    1000
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { method: default_method(), tol: default_tol(), max_iter: default_max_iter(), c: None, restart: None }
    }
}

impl SolverSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(config_err(format!("solver.tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 || self.restart == Some(0) {
            return Err(config_err("solver.max_iter and solver.restart must be positive"));
        }
        Ok(())
    }

    pub fn reference(&self) -> Option<C64> {
        self.c.map(|[re, im]| C64::new(re, im))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceProfile {
    Gaussian,
    Mode,
    Point,
    Manufactured,
    File,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub profile: SourceProfile,
    /// Flux label the source drives; default is the model's first source slot.
    pub component: Option<String>,
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Coordinates of the pulse or point along non-time axes; default is
    /// the grid center.
    pub center: Option<Vec<f64>>,
    #[serde(default = "unit")]
    pub width: f64,
    /// Integer wave numbers per non-time axis for the single-mode profile.
    pub mode: Option<Vec<i64>>,
    #[serde(default = "yes")]
    pub window: bool,
    pub path: Option<PathBuf>,
    #[serde(default = "one")]
    pub max_mode: usize,
}

fn unit() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Periodic distance between two coordinates on an axis.
fn wrapped(x: f64, c: f64, period: f64) -> f64 {
    let d = (x - c).rem_euclid(period);
    d.min(period - d)
}

impl SourceSpec {
    fn component(&self, model: &PhysicsModel) -> Result<usize> {
        let labels = model.j_labels();
        match &self.component {
            Some(name) => labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| config_err(format!("`{}` has no flux component `{name}`; have {labels:?}", model.id))),
            None => model
                .source_components()
                .first()
                .copied()
                .ok_or_else(|| config_err(format!("`{}` declares no source slot; set source.component", model.id))),
        }
    }

    /// Analytic profile on a single flux component. Manufactured and file
    /// sources are handled by the caller.
    pub fn analytic(&self, model: &PhysicsModel) -> Result<ComponentField> {
        let grid = model.grid();
        let comp = self.component(model)?;
        let ta = grid.time_axis();
        let others: Vec<usize> = (0..grid.axes().len()).filter(|&a| Some(a) != ta).collect();
        let center = match &self.center {
            Some(c) if c.len() == others.len() => c.clone(),
            Some(c) => {
                return Err(config_err(format!("source.center has {} entries for {} non-time axes", c.len(), others.len())))
            }
            None => others.iter().map(|&a| 0.5 * grid.axes()[a].period()).collect(),
        };
        let values: Vec<f64> = match self.profile {
            SourceProfile::Gaussian => {
                if !(self.width > 0.0) {
                    return Err(config_err("source.width must be positive"));
                }
                (0..grid.npts())
                    .map(|p| {
                        let x = grid.coordinates(p);
                        let r2: f64 = others
                            .iter()
                            .zip(&center)
                            .map(|(&a, &c)| wrapped(x[a], c, grid.axes()[a].period()).powi(2))
                            .sum();
                        (-0.5 * r2 / (self.width * self.width)).exp()
                    })
                    .collect()
            }
            SourceProfile::Mode => {
                let m = self.mode.clone().unwrap_or_else(|| {
                    let mut m = vec![0; others.len()];
                    if let Some(first) = m.first_mut() {
                        *first = 1;
                    }
                    m
                });
                if m.len() != others.len() {
                    return Err(config_err(format!("source.mode has {} entries for {} non-time axes", m.len(), others.len())));
                }
                (0..grid.npts())
                    .map(|p| {
                        let x = grid.coordinates(p);
                        let phase: f64 =
                            others.iter().zip(&m).map(|(&a, &k)| TAU * k as f64 * x[a] / grid.axes()[a].period()).sum();
                        phase.cos()
                    })
                    .collect()
            }
            SourceProfile::Point => {
                let target: Vec<usize> = others
                    .iter()
                    .zip(&center)
                    .map(|(&a, &c)| {
                        let ax = grid.axes()[a];
                        ((c / ax.spacing).round() as i64).rem_euclid(ax.len as i64) as usize
                    })
                    .collect();
                (0..grid.npts())
                    .map(|p| {
                        let idx = grid.unravel(p);
                        let hit = others.iter().zip(&target).all(|(&a, &t)| idx[a] == t);
                        if hit { 1.0 } else { 0.0 }
                    })
                    .collect()
            }
            SourceProfile::Manufactured | SourceProfile::File => {
                return Err(config_err("not an analytic source profile"));
            }
        };
        let window = if self.window { time_window(grid) } else { vec![1.0; grid.npts()] };
        let n = model.n();
        let mut out = vec![C64::new(0.0, 0.0); grid.npts() * n];
        for p in 0..grid.npts() {
            out[p * n + comp] = C64::new(self.amplitude * values[p] * window[p], 0.0);
        }
        let field = ComponentField::new(grid.clone(), model.j_labels(), out, Representation::Real)?;
        remove_spatial_mean(&field)
    }
}

/// Drop the content at zero spatial wavenumber. No periodic solution
/// answers a source with a net spatial integral (a heat source on a torus
/// keeps warming it), and the restricted operator is singular there.
pub fn remove_spatial_mean(f: &ComponentField) -> Result<ComponentField> {
    let grid = f.grid();
    let spatial = grid.spatial_axes();
    let n = f.ncomp();
    let mut dual = f.to_dual();
    for p in 0..grid.npts() {
        let idx = grid.unravel(p);
        if spatial.iter().all(|&a| idx[a] == 0) {
            dual.values_mut()[p * n..(p + 1) * n].fill(C64::new(0.0, 0.0));
        }
    }
    Ok(dual.to_real())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub e: Option<PathBuf>,
    pub j: Option<PathBuf>,
    pub psi: Option<PathBuf>,
    pub e_exact: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub audit: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Family names to certify; default is every built-in and catalog family.
    pub families: Option<Vec<String>>,
    /// Catalog models for the field and audit checks; default is all.
    pub models: Option<Vec<String>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_verify_tol")]
    pub projection_tol: f64,
    #[serde(default = "default_field_tol")]
    pub field_tol: f64,
    /// Spatial lengths and time length of the field-test grid.
    #[serde(default = "default_verify_grid")]
    pub grid: Vec<usize>,
    #[serde(default = "default_nt")]
    pub nt: usize,
    #[serde(default = "yes")]
    pub field_tests: bool,
    #[serde(default = "yes")]
    pub audit: bool,
    /// Test hook: scale the named family by 1.1 before certifying it.
    pub faulty: Option<String>,
}

fn default_samples() -> usize {
    200
}

fn default_verify_tol() -> f64 {
    1e-12
}

fn default_field_tol() -> f64 {
    1e-10
}

fn default_verify_grid() -> Vec<usize> {
    vec![8, 8]
}

fn default_nt() -> usize {
    16
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            families: None,
            models: None,
            samples: default_samples(),
            projection_tol: default_verify_tol(),
            field_tol: default_field_tol(),
            grid: default_verify_grid(),
            nt: default_nt(),
            field_tests: true,
            audit: true,
            faulty: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSpec {
    /// Each entry is spatial lengths followed by the time length.
    pub grids: Vec<Vec<usize>>,
    pub contrasts: Vec<f64>,
    /// Parameter the contrast modulates.
    pub parameter: String,
    #[serde(default)]
    pub axis: usize,
    #[serde(default = "one")]
    pub mode: usize,
    #[serde(default = "one")]
    pub max_mode: usize,
    #[serde(default = "unit")]
    pub spacing: f64,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSpec {
    pub k: Vec<f64>,
    pub omega: [f64; 2],
    #[serde(default = "default_scan")]
    pub samples: usize,
}

fn default_scan() -> usize {
    401
}

impl RunConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Resolve an output or input path against the output directory (for
    /// outputs) or the config directory.
    pub fn resolve(&self, p: &Path, output: bool) -> PathBuf {
        if p.is_absolute() {
            return p.to_path_buf();
        }
        match (&self.output.dir, output) {
            (Some(dir), true) => self.base_dir.join(dir).join(p),
            _ => self.base_dir.join(p),
        }
    }

    pub fn grid(&self) -> Result<Arc<SpacetimeGrid>> {
        self.grid.as_ref().ok_or_else(|| config_err("missing [grid] section"))?.build()
    }

    pub fn model_spec(&self) -> Result<&ModelSpec> {
        self.model.as_ref().ok_or_else(|| config_err("missing [model] section"))
    }

    pub fn model(&self) -> Result<PhysicsModel> {
        self.model_spec()?.build(self.grid()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_str(text, Path::new("."))
    }

    #[test]
    fn shorthand_grid_and_model() {
        let cfg = parse(
            r#"
            seed = 4
            [grid]
            spatial = [8, 6]
            spacing = [1.0, 0.5]
            nt = 4
            dt = 0.25
            [model]
            id = "acoustics"
            params = { rho = 2.0, kappa = { re = 1.0, im = 0.1 } }
            modulate.rho = { contrast = 0.2, axis = 1 }
            "#,
        )
        .unwrap();
        let m = cfg.model().unwrap();
        assert_eq!(m.grid().shape(), vec![8, 6, 4]);
        assert_eq!(m.grid().axes()[1].spacing, 0.5);
        assert!(!m.medium.is_constant());
        assert_eq!(cfg.seed, 4);
    }

    #[test]
    fn tensors_from_toml() {
        let v: toml::Value = toml::from_str("a = [[1.0, 2], [3, { re = 0.0, im = 1.0 }]]").unwrap();
        let t = tensor_from_toml("a", &v["a"], 2).unwrap();
        assert_eq!((t.rows, t.cols), (2, 2));
        assert_eq!(t.at(1, 1), C64::new(0.0, 1.0));
        let v: toml::Value = toml::from_str("c = { isotropic = { lambda = 1.0, mu = 0.5 } }").unwrap();
        let t = tensor_from_toml("c", &v["c"], 2).unwrap();
        assert_eq!((t.rows, t.cols), (4, 4));
        let v: toml::Value = toml::from_str("x = \"no\"").unwrap();
        assert!(tensor_from_toml("x", &v["x"], 2).is_err());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(parse("[grid]\nspatial=[4]\nbogus=1"), Err(Error::Config(_))));
        assert!(matches!(parse("[solver]\nmethod = \"cg\""), Err(Error::Config(_))));
    }

    #[test]
    fn missing_parameter_surfaces_from_the_schema() {
        let cfg = parse("[grid]\nspatial=[4]\nnt=4\n[model]\nid=\"convective_diffusion\"\nparams={alpha=1.0}").unwrap();
        let err = cfg.model().unwrap_err().to_string();
        assert!(err.contains("K"), "{err}");
    }

    #[test]
    fn point_source_sits_in_one_cell() {
        let cfg = parse("[grid]\nspatial=[6]\nnt=8\n[model]\nid=\"acoustics\"\nparams={rho=1.0,kappa=1.0}").unwrap();
        let m = cfg.model().unwrap();
        let spec = SourceSpec {
            profile: SourceProfile::Point,
            component: Some("div_v".into()),
            amplitude: 2.0,
            center: Some(vec![2.0]),
            width: 1.0,
            mode: None,
            window: false,
            path: None,
            max_mode: 1,
        };
        let s = spec.analytic(&m).unwrap();
        let nonzero: Vec<usize> = (0..s.values().len()).filter(|&i| s.values()[i].norm() > 0.0).collect();
        let comp = m.n() - 1;
        assert!(nonzero.iter().all(|&i| i % m.n() == comp));
        // one cell of amplitude 2 less the spatial mean 2/6
        let at = |x: usize, t: usize| s.point(m.grid().ravel(&[x, t]).unwrap())[comp].re;
        for t in 0..8 {
            assert!((at(2, t) - (2.0 - 2.0 / 6.0)).abs() < 1e-14);
            assert!((at(0, t) + 2.0 / 6.0).abs() < 1e-14);
        }
        let unnamed = SourceSpec { component: None, ..spec };
        assert!(unnamed.analytic(&m).is_err());
    }
}
