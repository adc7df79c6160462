//! Multicomponent complex fields, pointwise media and the spacetime inner
//! product.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Real,
    Dual,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Real => "real",
            Representation::Dual => "dual",
        }
    }
}

/// Complex field with `ncomp` components per grid point, stored point-major.
#[derive(Debug, Clone)]
pub struct ComponentField {
    grid: Arc<SpacetimeGrid>,
    labels: Vec<String>,
    values: Vec<C64>,
    repr: Representation,
}

impl ComponentField {
    pub fn new(
        grid: Arc<SpacetimeGrid>,
        labels: Vec<String>,
        values: Vec<C64>,
        repr: Representation,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::ShapeMismatch("a field needs at least one component".into()));
        }
        if values.len() != grid.npts() * labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values ({} points × {} components), found {}",
                grid.npts() * labels.len(),
                grid.npts(),
                labels.len(),
                values.len()
            )));
        }
        Ok(Self { grid, labels, values, repr })
    }

    pub fn zeros(grid: Arc<SpacetimeGrid>, labels: Vec<String>) -> Self {
        let n = grid.npts() * labels.len();
        Self { grid, labels, values: vec![C64::new(0.0, 0.0); n], repr: Representation::Real }
    }

    /// Real-space field from a closure of (flat point index, component).
    pub fn from_fn(
        grid: Arc<SpacetimeGrid>,
        labels: Vec<String>,
        f: impl Fn(usize, usize) -> C64 + Sync,
    ) -> Self {
        let ncomp = labels.len();
        let values = (0..grid.npts() * ncomp)
            .into_par_iter()
            .map(|i| f(i / ncomp, i % ncomp))
            .collect();
        Self { grid, labels, values, repr: Representation::Real }
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ncomp(&self) -> usize {
        self.labels.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn point(&self, p: usize) -> &[C64] {
        let n = self.ncomp();
        &self.values[p * n..(p + 1) * n]
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "relabel with {} labels for {} components",
                labels.len(),
                self.labels.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Same grid, labels and representation, new values.
    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.labels.clone(), values, self.repr)
    }

    pub fn forward_transform(&self) -> Result<Self> {
        if self.repr != Representation::Real {
            return Err(Error::RepresentationMismatch { expected: "real", found: "dual" });
        }
        let mut values = self.values.clone();
        self.grid.transform(&mut values, self.ncomp(), false);
        Ok(Self { values, repr: Representation::Dual, ..self.clone_meta() })
    }

    pub fn inverse_transform(&self) -> Result<Self> {
        if self.repr != Representation::Dual {
            return Err(Error::RepresentationMismatch { expected: "dual", found: "real" });
        }
        let mut values = self.values.clone();
        self.grid.transform(&mut values, self.ncomp(), true);
        Ok(Self { values, repr: Representation::Real, ..self.clone_meta() })
    }

    /// Copy in real-space representation, transforming if needed.
    pub fn to_real(&self) -> Self {
        match self.repr {
            Representation::Real => self.clone(),
            Representation::Dual => self.inverse_transform().expect("dual field"),
        }
    }

    pub fn to_dual(&self) -> Self {
        match self.repr {
            Representation::Dual => self.clone(),
            Representation::Real => self.forward_transform().expect("real field"),
        }
    }

    fn clone_meta(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            labels: self.labels.clone(),
            values: Vec::new(),
            repr: self.repr,
        }
    }

    /// Measure attached to each stored value in the inner product.
    pub fn weight(&self) -> f64 {
        match self.repr {
            Representation::Real => self.grid.cell_measure(),
            Representation::Dual => self.grid.cell_measure() / self.grid.npts() as f64,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.values.par_iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight()).sqrt()
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid && *self.grid != *other.grid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        if self.ncomp() != other.ncomp() {
            return Err(Error::ShapeMismatch(format!(
                "component counts differ: {} vs {}",
                self.ncomp(),
                other.ncomp()
            )));
        }
        if self.repr != other.repr {
            return Err(Error::RepresentationMismatch {
                expected: self.repr.as_str(),
                found: other.repr.as_str(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.par_iter().zip(&other.values).map(|(a, b)| a + b).collect();
        self.with_values(values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.par_iter().zip(&other.values).map(|(a, b)| a - b).collect();
        self.with_values(values)
    }

    pub fn scale(&self, a: C64) -> Self {
        let values = self.values.par_iter().map(|v| v * a).collect();
        Self { values, ..self.clone_meta() }
    }

    /// Keep only component `c`, zeroing the others.
    pub fn mask_components(&self, keep: &[usize]) -> Self {
        let n = self.ncomp();
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| if keep.contains(&(i % n)) { *v } else { C64::new(0.0, 0.0) })
            .collect();
        Self { values, ..self.clone_meta() }
    }

    /// Multiply every component by a scalar profile over grid points.
    pub fn multiply_profile(&self, profile: &[f64]) -> Result<Self> {
        if profile.len() != self.grid.npts() {
            return Err(Error::ShapeMismatch("profile length differs from grid".into()));
        }
        let n = self.ncomp();
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| v * profile[i / n])
            .collect();
        Ok(Self { values, ..self.clone_meta() })
    }
}

/// `Σ_points ⟨a, b⟩ · measure`, conjugate-linear in `a`.
pub fn inner_product(a: &ComponentField, b: &ComponentField) -> Result<C64> {
    a.check_compatible(b)?;
    let s: C64 = a
        .values
        .par_iter()
        .zip(&b.values)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s * a.weight())
}

/// Dense complex `n×n` matrix per real-space grid point, row-major.
#[derive(Debug, Clone)]
pub struct MediumField {
    grid: Arc<SpacetimeGrid>,
    n: usize,
    values: Vec<C64>,
}

impl MediumField {
    pub fn new(grid: Arc<SpacetimeGrid>, n: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.npts() * n * n {
            return Err(Error::ShapeMismatch(format!(
                "medium needs {} entries, found {}",
                grid.npts() * n * n,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite medium entry at flat position {bad}"
            )));
        }
        Ok(Self { grid, n, values })
    }

    pub fn from_fn(
        grid: Arc<SpacetimeGrid>,
        n: usize,
        f: impl Fn(usize) -> Vec<C64> + Sync,
    ) -> Result<Self> {
        let blocks: Vec<Vec<C64>> = (0..grid.npts()).into_par_iter().map(&f).collect();
        let mut values = Vec::with_capacity(grid.npts() * n * n);
        for b in blocks {
            if b.len() != n * n {
                return Err(Error::ShapeMismatch(format!(
                    "medium block has {} entries, expected {}",
                    b.len(),
                    n * n
                )));
            }
            values.extend(b);
        }
        Self::new(grid, n, values)
    }

    /// `c·I` at every point.
    pub fn scaled_identity(grid: Arc<SpacetimeGrid>, n: usize, c: C64) -> Self {
        let mut block = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            block[i * n + i] = c;
        }
        let values = block.iter().cycle().take(grid.npts() * n * n).copied().collect();
        Self { grid, n, values }
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, p: usize) -> &[C64] {
        let nn = self.n * self.n;
        &self.values[p * nn..(p + 1) * nn]
    }

    pub fn entry(&self, p: usize, i: usize, j: usize) -> C64 {
        self.values[p * self.n * self.n + i * self.n + j]
    }

    /// `L − c·I`.
    pub fn shifted(&self, c: C64) -> Self {
        let n = self.n;
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let r = i % (n * n);
                if r / n == r % n {
                    v - c
                } else {
                    *v
                }
            })
            .collect();
        Self { grid: self.grid.clone(), n, values }
    }

    /// True when every point carries the same matrix.
    pub fn is_constant(&self) -> bool {
        let first = self.at(0);
        (1..self.grid.npts()).all(|p| self.at(p) == first)
    }

    /// Pointwise product on raw point-major data.
    pub(crate) fn apply_raw(&self, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        out.par_chunks_mut(n).enumerate().for_each(|(p, o)| {
            let m = self.at(p);
            let xp = &x[p * n..(p + 1) * n];
            for (i, oi) in o.iter_mut().enumerate() {
                let row = &m[i * n..(i + 1) * n];
                *oi = row.iter().zip(xp).map(|(a, b)| a * b).sum();
            }
        });
    }
}

/// Pointwise `L(x,t)·e(x,t)`.
pub fn apply_medium(l: &MediumField, e: &ComponentField) -> Result<ComponentField> {
    if e.representation() != Representation::Real {
        return Err(Error::RepresentationMismatch { expected: "real", found: "dual" });
    }
    if l.n != e.ncomp() {
        return Err(Error::ShapeMismatch(format!(
            "medium is {0}×{0} but field has {1} components",
            l.n,
            e.ncomp()
        )));
    }
    if *l.grid != **e.grid() {
        return Err(Error::ShapeMismatch("medium and field live on different grids".into()));
    }
    let mut out = vec![C64::new(0.0, 0.0); e.values().len()];
    l.apply_raw(e.values(), &mut out);
    e.with_values(out)
}

/// Deterministic random field whose spectrum is supported on
/// `|wrap(j)| ≤ max_mode` along every axis.
pub fn random_bandlimited_field(
    grid: &Arc<SpacetimeGrid>,
    ncomp: usize,
    max_mode: usize,
    seed: u64,
) -> Result<ComponentField> {
    if ncomp == 0 {
        return Err(Error::InvalidArgument("ncomp must be positive".into()));
    }
    for (i, a) in grid.axes().iter().enumerate() {
        if a.len > 1 && 2 * max_mode >= a.len {
            return Err(Error::InvalidArgument(format!(
                "max_mode {max_mode} reaches Nyquist on axis {i} (length {})",
                a.len
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.npts();
    let mut spec = vec![C64::new(0.0, 0.0); n * ncomp];
    let m = max_mode as i64;
    for p in 0..n {
        let idx = grid.unravel(p);
        let inside = idx
            .iter()
            .zip(grid.axes())
            .all(|(&j, a)| a.wrap(j).abs() <= m);
        if inside {
            for c in 0..ncomp {
                spec[p * ncomp + c] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    let labels = (0..ncomp).map(|c| format!("c{c}")).collect();
    let f = ComponentField::new(grid.clone(), labels, spec, Representation::Dual)?;
    f.inverse_transform()
}

/// Smooth bump on the central half of the time axis (1 elsewhere when the
/// grid has no time axis).
pub fn time_window(grid: &SpacetimeGrid) -> Vec<f64> {
    let Some(ta) = grid.time_axis() else {
        return vec![1.0; grid.npts()];
    };
    let nt = grid.axes()[ta].len;
    let bump: Vec<f64> = (0..nt)
        .map(|j| {
            let u = (j as f64 + 0.5) / nt as f64;
            let x = (u - 0.5) / 0.25;
            if x.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - x * x)).exp()
            } else {
                0.0
            }
        })
        .collect();
    (0..grid.npts()).map(|p| bump[grid.unravel(p)[ta]]).collect()
}

/// Fraction of `Σ|f|²` sitting in the outer 10% of the time axis at each end.
pub fn outer_time_mass_fraction(f: &ComponentField) -> f64 {
    let grid = f.grid();
    let Some(ta) = grid.time_axis() else {
        return 0.0;
    };
    let nt = grid.axes()[ta].len;
    let f = f.to_real();
    let n = f.ncomp();
    let mut outer = 0.0;
    let mut total = 0.0;
    for p in 0..grid.npts() {
        let u = (grid.unravel(p)[ta] as f64 + 0.5) / nt as f64;
        let m: f64 = f.point(p).iter().map(|v| v.norm_sqr()).sum();
        total += m;
        if !(0.1..=0.9).contains(&u) {
            outer += m;
        }
    }
    let _ = n;
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use std::f64::consts::PI;

    fn line(n: usize) -> Arc<SpacetimeGrid> {
        Arc::new(SpacetimeGrid::new(vec![Axis::spatial(n, 1.0)]).unwrap())
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn dft_of_constant() {
        let g = line(8);
        let f = ComponentField::from_fn(g, labels(1), |_, _| C64::new(1.0, 0.0));
        let h = f.forward_transform().unwrap();
        assert!((h.values()[0] - C64::new(8.0, 0.0)).norm() < 1e-14);
        assert!(h.values()[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn dft_of_pure_mode() {
        let g = line(8);
        let f = ComponentField::from_fn(g, labels(1), |p, _| {
            C64::from_polar(1.0, 2.0 * PI * p as f64 / 8.0)
        });
        let h = f.forward_transform().unwrap();
        for (j, v) in h.values().iter().enumerate() {
            let expect = if j == 1 { 8.0 } else { 0.0 };
            assert!((v - C64::new(expect, 0.0)).norm() < 1e-13, "j={j} v={v}");
        }
    }

    #[test]
    fn time_mode_lands_at_its_dual() {
        // exp(−iω t) with ω = 2π/8 lands where the reported dual ω is +2π/8,
        // i.e. at index 7; index 1 carries ω = −2π/8.
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::time(8, 1.0)]).unwrap());
        let w = 2.0 * PI / 8.0;
        let f = ComponentField::from_fn(g.clone(), labels(1), |p, _| C64::from_polar(1.0, -w * p as f64));
        let h = f.forward_transform().unwrap();
        let (j, _) = h
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert_eq!(j, 7);
        assert!((g.dual_at(j).omega - w).abs() < 1e-15);
        assert!((g.dual_at(1).omega + w).abs() < 1e-15);
    }

    #[test]
    fn inverse_of_zero_and_delta() {
        let g = line(8);
        let z = ComponentField::zeros(g.clone(), labels(2)).forward_transform().unwrap();
        assert!(z.inverse_transform().unwrap().values().iter().all(|v| v.norm() == 0.0));
        let delta = ComponentField::from_fn(g, labels(1), |p, _| {
            C64::new(if p == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        let spec = delta.forward_transform().unwrap();
        assert!(spec.values().iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-15));
        let back = spec.inverse_transform().unwrap();
        assert!((back.values()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn transform_representation_errors() {
        let g = line(4);
        let f = ComponentField::zeros(g, labels(1));
        assert!(f.inverse_transform().is_err());
        assert!(f.forward_transform().unwrap().forward_transform().is_err());
    }

    #[test]
    fn constant_inner_product() {
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(4, 1.0), Axis::spatial(2, 1.0)]).unwrap());
        let a = ComponentField::from_fn(g, labels(1), |_, _| C64::new(1.0, 0.0));
        let ip = inner_product(&a, &a).unwrap();
        assert!((ip - C64::new(8.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn distinct_modes_are_orthogonal() {
        let g = line(8);
        let a = ComponentField::from_fn(g.clone(), labels(1), |p, _| C64::from_polar(1.0, 2.0 * PI * p as f64 / 8.0));
        let b = ComponentField::from_fn(g, labels(1), |p, _| C64::from_polar(1.0, 6.0 * PI * p as f64 / 8.0));
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-12);
    }

    #[test]
    fn inner_product_shape_errors() {
        let g = line(8);
        let a = ComponentField::zeros(g.clone(), labels(1));
        let b = ComponentField::zeros(g, labels(2));
        assert!(inner_product(&a, &b).is_err());
        assert!(inner_product(&a, &a.forward_transform().unwrap()).is_err());
    }

    #[test]
    fn identity_and_scaled_media() {
        let g = line(8);
        let e = random_bandlimited_field(&g, 3, 2, 1).unwrap();
        let id = MediumField::scaled_identity(g.clone(), 3, C64::new(1.0, 0.0));
        let out = apply_medium(&id, &e).unwrap();
        assert_eq!(out.values(), e.values());
        let ones = ComponentField::from_fn(g.clone(), labels(3), |_, _| C64::new(1.0, 0.0));
        let two = MediumField::scaled_identity(g, 3, C64::new(2.0, 0.0));
        assert!(apply_medium(&two, &ones).unwrap().values().iter().all(|v| *v == C64::new(2.0, 0.0)));
    }

    #[test]
    fn apply_medium_checks() {
        let g = line(4);
        let e = ComponentField::zeros(g.clone(), labels(2));
        let l = MediumField::scaled_identity(g, 3, C64::new(1.0, 0.0));
        assert!(matches!(apply_medium(&l, &e), Err(Error::ShapeMismatch(_))));
        let l2 = MediumField::scaled_identity(e.grid().clone(), 2, C64::new(1.0, 0.0));
        assert!(matches!(
            apply_medium(&l2, &e.forward_transform().unwrap()),
            Err(Error::RepresentationMismatch { .. })
        ));
    }

    #[test]
    fn bandlimited_generator_contract() {
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(8, 1.0), Axis::time(8, 0.5)]).unwrap());
        let c = random_bandlimited_field(&g, 2, 0, 3).unwrap();
        let v0 = c.point(0).to_vec();
        assert!((0..g.npts()).all(|p| c.point(p).iter().zip(&v0).all(|(a, b)| (a - b).norm() < 1e-14)));
        let a = random_bandlimited_field(&g, 2, 2, 11).unwrap();
        let b = random_bandlimited_field(&g, 2, 2, 11).unwrap();
        assert_eq!(a.values(), b.values());
        let spec = a.forward_transform().unwrap();
        for p in 0..g.npts() {
            let idx = g.unravel(p);
            let outside = idx.iter().zip(g.axes()).any(|(&j, ax)| ax.wrap(j).abs() > 2);
            if outside {
                assert!(spec.point(p).iter().all(|v| v.norm() < 1e-12));
            }
        }
        assert!(random_bandlimited_field(&g, 2, 4, 0).is_err());
    }

    #[test]
    fn window_is_supported_on_central_half() {
        let g = SpacetimeGrid::new(vec![Axis::time(16, 1.0)]).unwrap();
        let w = time_window(&g);
        for (j, v) in w.iter().enumerate() {
            let u = (j as f64 + 0.5) / 16.0;
            if !(0.25..=0.75).contains(&u) {
                assert_eq!(*v, 0.0);
            } else {
                assert!(*v > 0.0 && *v <= 1.0);
            }
        }
    }
}
