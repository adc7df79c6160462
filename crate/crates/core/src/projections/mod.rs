//! Fourier-space projection families `Γ₁(k, k_p, ω)`.
//!
//! A family maps each dual point to a Hermitian idempotent matrix. Families
//! either come from a closed form (see [`families`]) or from a differential
//! symbol `D` through `Γ₁ = D F⁺ D†`, `F = D†D`. Closed-form families carry
//! their symbol so the two constructions can be cross-checked.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ComponentField, Representation};
use crate::grid::{DualPoint, SpacetimeGrid};
use crate::C64;

pub mod families;

pub use families::*;

pub type CMatrix = DMatrix<C64>;

type MatFn = Arc<dyn Fn(&DualPoint) -> CMatrix + Send + Sync>;

/// Relative singular-value cutoff applied to `F = D†D`.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Differential operator in Fourier variables, `Ψ ↦ E`.
#[derive(Clone)]
pub struct Symbol {
    n_e: usize,
    n_psi: usize,
    eval: MatFn,
}

impl Symbol {
    pub fn new(
        n_e: usize,
        n_psi: usize,
        f: impl Fn(&DualPoint) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Self { n_e, n_psi, eval: Arc::new(f) }
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn n_psi(&self) -> usize {
        self.n_psi
    }

    pub fn eval(&self, d: &DualPoint) -> CMatrix {
        let m = (self.eval)(d);
        debug_assert_eq!(m.shape(), (self.n_e, self.n_psi));
        m
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({}×{})", self.n_e, self.n_psi)
    }
}

/// Map from dual points to `n×n` projection matrices.
#[derive(Clone)]
pub struct ProjectionFamily {
    name: String,
    n: usize,
    dim: usize,
    dim_p: usize,
    eval: MatFn,
    symbol: Option<Symbol>,
}

impl fmt::Debug for ProjectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProjectionFamily")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("dim", &self.dim)
            .field("dim_p", &self.dim_p)
            .field("symbol", &self.symbol)
            .finish()
    }
}

impl ProjectionFamily {
    /// `dim` and `dim_p` are the spatial and momentum dimensions the
    /// evaluator reads; they only steer sampling.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        dim: usize,
        dim_p: usize,
        f: impl Fn(&DualPoint) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), n, dim, dim_p, eval: Arc::new(f), symbol: None }
    }

    pub fn with_symbol(mut self, symbol: Symbol) -> Self {
        assert_eq!(symbol.n_e, self.n, "symbol rows must match family size");
        self.symbol = Some(symbol);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_p(&self) -> usize {
        self.dim_p
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        self.symbol.as_ref()
    }

    pub fn eval(&self, d: &DualPoint) -> CMatrix {
        (self.eval)(d)
    }

    /// Value used at the zero dual point, where most closed forms read 0/0.
    pub fn zero_dual_convention(&self) -> CMatrix {
        self.eval(&DualPoint::new(vec![0.0; self.dim], vec![0.0; self.dim_p], 0.0))
    }

    /// `Γ₂ = I − Γ₁`.
    pub fn complement(&self) -> Self {
        let inner = self.clone();
        let n = self.n;
        Self::new(format!("I-{}", self.name), n, self.dim, self.dim_p, move |d| {
            CMatrix::identity(n, n) - inner.eval(d)
        })
    }

    /// `a·Γ₁`, kept under the same name. Used to exercise certification.
    pub fn scaled(&self, a: f64) -> Self {
        let inner = self.clone();
        let mut out = Self::new(self.name.clone(), self.n, self.dim, self.dim_p, move |d| {
            inner.eval(d) * C64::new(a, 0.0)
        });
        out.symbol = self.symbol.clone();
        out
    }

    pub fn identity(n: usize) -> Self {
        Self::new("identity", n, 0, 0, move |_| CMatrix::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Self::new("zero", n, 0, 0, move |_| CMatrix::zeros(n, n))
    }

    /// Evaluate at every dual point of `grid`.
    pub fn on_grid(&self, grid: &SpacetimeGrid) -> ProjectionOperator {
        let n = self.n;
        let blocks: Vec<CMatrix> = (0..grid.npts())
            .into_par_iter()
            .map(|p| self.eval(&grid.dual_at(p)))
            .collect();
        let mut mats = Vec::with_capacity(grid.npts() * n * n);
        for b in &blocks {
            // row-major per point
            for i in 0..n {
                for j in 0..n {
                    mats.push(b[(i, j)]);
                }
            }
        }
        ProjectionOperator { n, npts: grid.npts(), mats }
    }
}

/// Orthonormal basis of the numerical range of `D`, with the singular data
/// needed to invert it on that range.
struct RangeFactor {
    u: CMatrix,
    v: CMatrix,
    sigma: Vec<f64>,
}

fn range_factor(d: &CMatrix) -> RangeFactor {
    let (rows, cols) = d.shape();
    if rows == 0 || cols == 0 {
        return RangeFactor { u: CMatrix::zeros(rows, 0), v: CMatrix::zeros(cols, 0), sigma: vec![] };
    }
    let svd = d.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    // eigenvalues of F are σ², so the cutoff applies to σ²
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| {
            let s = svd.singular_values[i];
            smax > 0.0 && s * s > PINV_CUTOFF * smax * smax
        })
        .collect();
    let ur = CMatrix::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])]);
    let vr = CMatrix::from_fn(cols, keep.len(), |i, j| v_t[(keep[j], i)].conj());
    let sigma = keep.iter().map(|&i| svd.singular_values[i]).collect();
    RangeFactor { u: ur, v: vr, sigma }
}

/// `D F⁺ D†` at one dual point, symmetrized.
pub fn projection_from_symbol_matrix(d: &CMatrix) -> CMatrix {
    let rf = range_factor(d);
    let p = &rf.u * rf.u.adjoint();
    (&p + p.adjoint()) * C64::new(0.5, 0.0)
}

/// `F⁺ D† e` at one dual point: the potential whose image under `D` is the
/// range component of `e`.
pub fn potential_from_symbol_matrix(d: &CMatrix, e: &[C64]) -> Vec<C64> {
    let rf = range_factor(d);
    let ev = nalgebra::DVector::from_column_slice(e);
    let mut coeff = rf.u.adjoint() * ev;
    for (c, s) in coeff.iter_mut().zip(&rf.sigma) {
        *c /= *s;
    }
    let psi = &rf.v * coeff;
    psi.iter().copied().collect()
}

/// Projection family generated by a symbol.
pub fn gamma_from_symbol(name: impl Into<String>, symbol: Symbol, dim: usize, dim_p: usize) -> ProjectionFamily {
    let s = symbol.clone();
    ProjectionFamily::new(name, symbol.n_e, dim, dim_p, move |d| {
        projection_from_symbol_matrix(&s.eval(d))
    })
    .with_symbol(symbol)
}

/// A family acting on the first index of a matrix-valued field.
#[derive(Debug, Clone)]
pub struct FirstIndexLift {
    pub base: ProjectionFamily,
    pub inner_shape: Vec<usize>,
}

impl FirstIndexLift {
    pub fn trailing(&self) -> usize {
        self.inner_shape.iter().product()
    }

    pub fn family(&self) -> ProjectionFamily {
        let t = self.trailing();
        let base = self.base.clone();
        let n = base.n() * t;
        let mut out = ProjectionFamily::new(
            format!("{}⊗I{}", base.name(), t),
            n,
            base.dim(),
            base.dim_p(),
            move |d| kron_identity(&base.eval(d), t),
        );
        if let Some(sym) = self.base.symbol() {
            let s = sym.clone();
            out = out.with_symbol(Symbol::new(s.n_e() * t, s.n_psi() * t, move |d| {
                kron_identity(&s.eval(d), t)
            }));
        }
        out
    }
}

/// `m ⊗ I_t` with combined index `a·t + j`.
pub fn kron_identity(m: &CMatrix, t: usize) -> CMatrix {
    let (r, c) = m.shape();
    let mut out = CMatrix::zeros(r * t, c * t);
    for a in 0..r {
        for b in 0..c {
            let v = m[(a, b)];
            if v != C64::new(0.0, 0.0) {
                for j in 0..t {
                    out[(a * t + j, b * t + j)] = v;
                }
            }
        }
    }
    out
}

pub fn lift_first_index(base: &ProjectionFamily, trailing: &[usize]) -> Result<ProjectionFamily> {
    if trailing.is_empty() || trailing.contains(&0) {
        return Err(Error::InvalidArgument("trailing shape must be nonempty and positive".into()));
    }
    Ok(FirstIndexLift { base: base.clone(), inner_shape: trailing.to_vec() }.family())
}

/// Block-diagonal family. The symbol is block-diagonal too when every part
/// has one.
pub fn compose_block_gamma(name: impl Into<String>, parts: &[ProjectionFamily]) -> Result<ProjectionFamily> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("block composition needs at least one part".into()));
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone().with_name(name));
    }
    let n: usize = parts.iter().map(|p| p.n()).sum();
    let dim = parts.iter().map(|p| p.dim()).max().unwrap_or(0);
    let dim_p = parts.iter().map(|p| p.dim_p()).max().unwrap_or(0);
    let ps: Vec<ProjectionFamily> = parts.to_vec();
    let mut out = ProjectionFamily::new(name, n, dim, dim_p, move |d| {
        block_diag(&ps.iter().map(|p| p.eval(d)).collect::<Vec<_>>())
    });
    if parts.iter().all(|p| p.symbol().is_some()) {
        let syms: Vec<Symbol> = parts.iter().map(|p| p.symbol().unwrap().clone()).collect();
        let n_psi = syms.iter().map(|s| s.n_psi()).sum();
        out = out.with_symbol(Symbol::new(n, n_psi, move |d| {
            block_diag(&syms.iter().map(|s| s.eval(d)).collect::<Vec<_>>())
        }));
    }
    Ok(out)
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(r, c);
    let (mut i0, mut j0) = (0, 0);
    for b in blocks {
        out.view_mut((i0, j0), b.shape()).copy_from(b);
        i0 += b.nrows();
        j0 += b.ncols();
    }
    out
}

/// Γ₁ evaluated once on every dual point of a grid, row-major per point.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    n: usize,
    npts: usize,
    mats: Vec<C64>,
}

impl ProjectionOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, p: usize) -> &[C64] {
        let nn = self.n * self.n;
        &self.mats[p * nn..(p + 1) * nn]
    }

    /// Apply in place to dual-space data.
    pub(crate) fn apply_dual_raw(&self, data: &mut [C64]) {
        let n = self.n;
        assert_eq!(data.len(), self.npts * n);
        data.par_chunks_mut(n).enumerate().for_each(|(p, x)| {
            let m = self.at(p);
            let mut y = [C64::new(0.0, 0.0); 64];
            let mut heap;
            let y: &mut [C64] = if n <= 64 {
                &mut y[..n]
            } else {
                heap = vec![C64::new(0.0, 0.0); n];
                &mut heap
            };
            for i in 0..n {
                let row = &m[i * n..(i + 1) * n];
                y[i] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            }
            x.copy_from_slice(y);
        });
    }

    /// Apply to real-space data: transform, project, transform back.
    pub(crate) fn apply_real_raw(&self, grid: &SpacetimeGrid, data: &mut [C64]) {
        grid.transform(data, self.n, false);
        self.apply_dual_raw(data);
        grid.transform(data, self.n, true);
    }

    pub fn apply(&self, e: &ComponentField) -> Result<ComponentField> {
        if e.ncomp() != self.n || e.grid().npts() != self.npts {
            return Err(Error::ShapeMismatch(format!(
                "projection of size {} cannot act on a {}-component field",
                self.n,
                e.ncomp()
            )));
        }
        let mut v = e.values().to_vec();
        match e.representation() {
            Representation::Dual => self.apply_dual_raw(&mut v),
            Representation::Real => self.apply_real_raw(e.grid(), &mut v),
        }
        e.with_values(v)
    }
}

/// `Γ₁` applied at every dual point; the result keeps `e`'s representation.
pub fn apply_projection_family(p: &ProjectionFamily, e: &ComponentField) -> Result<ComponentField> {
    if e.ncomp() != p.n() {
        return Err(Error::ShapeMismatch(format!(
            "family `{}` has size {} but field has {} components",
            p.name(),
            p.n(),
            e.ncomp()
        )));
    }
    p.on_grid(e.grid()).apply(e)
}

/// Worst-case defects of a family over a sample of dual points.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub family: String,
    pub hermiticity: f64,
    pub idempotency: f64,
    pub factorization: Option<f64>,
    pub samples: usize,
    pub worst_dual: DualPoint,
}

impl ProjectionReport {
    pub fn max_defect(&self) -> f64 {
        self.hermiticity.max(self.idempotency).max(self.factorization.unwrap_or(0.0))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_defect() <= tol
    }
}

/// Frobenius norms of `P − P†`, `P² − P` and, with a symbol, `P − DF⁺D†`.
pub fn check_projection(p: &ProjectionFamily, samples: &[DualPoint]) -> ProjectionReport {
    let per: Vec<(f64, f64, Option<f64>)> = samples
        .par_iter()
        .map(|d| {
            let m = p.eval(d);
            let herm = (&m - m.adjoint()).norm();
            let idem = (&m * &m - &m).norm();
            let fact = p
                .symbol()
                .map(|s| (&m - projection_from_symbol_matrix(&s.eval(d))).norm());
            (herm, idem, fact)
        })
        .collect();
    let mut report = ProjectionReport {
        family: p.name().to_string(),
        hermiticity: 0.0,
        idempotency: 0.0,
        factorization: p.symbol().map(|_| 0.0),
        samples: samples.len(),
        worst_dual: samples.first().cloned().unwrap_or_default(),
    };
    let mut worst = -1.0;
    for (d, (h, i, f)) in samples.iter().zip(per) {
        report.hermiticity = report.hermiticity.max(h);
        report.idempotency = report.idempotency.max(i);
        if let (Some(acc), Some(f)) = (report.factorization.as_mut(), f) {
            *acc = acc.max(f);
        }
        let w = h.max(i).max(f.unwrap_or(0.0));
        if w > worst {
            worst = w;
            report.worst_dual = d.clone();
        }
    }
    report
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Zero dual, points on every coordinate axis, then Halton points in
/// `[-3, 3]` per coordinate until `count` samples are produced.
pub fn default_samples(dim: usize, dim_p: usize, count: usize) -> Vec<DualPoint> {
    let ncoord = dim + dim_p + 1;
    let mut out = vec![DualPoint::new(vec![0.0; dim], vec![0.0; dim_p], 0.0)];
    let split = |v: Vec<f64>| DualPoint::new(v[..dim].to_vec(), v[dim..dim + dim_p].to_vec(), v[dim + dim_p]);
    for c in 0..ncoord {
        for a in [1.0, -1.0, 2.5, -0.3] {
            let mut v = vec![0.0; ncoord];
            v[c] = a;
            out.push(split(v));
        }
    }
    let mut i = 1;
    while out.len() < count {
        let v = (0..ncoord)
            .map(|c| 6.0 * halton(i, PRIMES[c % PRIMES.len()]) - 3.0)
            .collect();
        out.push(split(v));
        i += 1;
    }
    out
}

/// Certify a family on [`default_samples`].
pub fn certify(p: &ProjectionFamily, count: usize) -> ProjectionReport {
    check_projection(p, &default_samples(p.dim(), p.dim_p(), count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_bandlimited_field;
    use crate::grid::Axis;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_family_has_no_defects() {
        let r = certify(&ProjectionFamily::identity(4), 50);
        assert_eq!(r.max_defect(), 0.0);
    }

    #[test]
    fn scaled_family_is_flagged() {
        let g = gamma_diffusion_g(3).scaled(1.1);
        let r = certify(&g, 200);
        assert!((r.idempotency - 0.11).abs() < 1e-12, "{}", r.idempotency);
        assert!(!r.passes(1e-12));
    }

    #[test]
    fn lift_of_scalar_identity_is_identity() {
        let f = lift_first_index(&ProjectionFamily::identity(1), &[3]).unwrap();
        assert_eq!(f.n(), 3);
        let m = f.eval(&DualPoint::spatial(&[0.3], 0.2));
        assert_eq!(m, CMatrix::identity(3, 3));
        assert!(lift_first_index(&ProjectionFamily::identity(1), &[]).is_err());
    }

    #[test]
    fn lifted_acoustic_family() {
        let f = lift_first_index(&gamma_acoustic_n(3), &[3]).unwrap();
        assert_eq!(f.n(), 12);
        let r = certify(&f, 100);
        assert!(r.passes(1e-12), "{r:?}");
        let base = gamma_acoustic_n(3);
        for d in default_samples(3, 0, 30) {
            let tl = f.eval(&d).trace();
            let tb = base.eval(&d).trace();
            assert!((tl - tb * 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn compose_single_and_pair() {
        let g = gamma_diffusion_g(3);
        let one = compose_block_gamma("G", std::slice::from_ref(&g)).unwrap();
        let d = DualPoint::spatial(&[0.4, -1.0, 2.0], 0.7);
        assert_eq!(one.eval(&d), g.eval(&d));
        let two = compose_block_gamma("GG", &[g.clone(), g.clone()]).unwrap();
        assert_eq!(two.n(), 10);
        let m = two.eval(&d);
        assert_eq!(m.view((5, 5), (5, 5)).into_owned(), g.eval(&d));
        assert!(m.view((0, 5), (5, 5)).iter().all(|v| v.norm() == 0.0));
        assert!(compose_block_gamma("none", &[]).is_err());
    }

    #[test]
    fn symbol_zero_gives_zero() {
        let n = gamma_from_symbol("N", gamma_acoustic_n(3).symbol().unwrap().clone(), 3, 0);
        let m = n.eval(&DualPoint::spatial(&[0.0, 0.0, 0.0], 0.0));
        assert!(m.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn projection_application_identity_zero_and_idempotent() {
        let grid = Arc::new(
            SpacetimeGrid::new(vec![Axis::spatial(8, 1.0), Axis::spatial(4, 1.0), Axis::spatial(4, 1.0), Axis::time(8, 0.5)]).unwrap(),
        );
        let e = random_bandlimited_field(&grid, 5, 1, 4).unwrap();
        let id = apply_projection_family(&ProjectionFamily::identity(5), &e).unwrap();
        let diff: f64 = id.values().iter().zip(e.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
        let z = apply_projection_family(&ProjectionFamily::zero(5), &e).unwrap();
        assert!(z.values().iter().all(|v| v.norm() < 1e-15));
        let g = gamma_diffusion_g(3);
        let pe = apply_projection_family(&g, &e).unwrap();
        let ppe = apply_projection_family(&g, &pe).unwrap();
        assert!(ppe.sub(&pe).unwrap().norm() <= 1e-12 * pe.norm());
        let bad = random_bandlimited_field(&grid, 4, 1, 4).unwrap();
        assert!(apply_projection_family(&g, &bad).is_err());
    }

    #[test]
    fn potential_inverts_symbol_on_range() {
        let d = CMatrix::from_row_slice(3, 1, &[c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let psi = [c(0.3, -0.4)];
        let e: Vec<C64> = (0..3).map(|i| d[(i, 0)] * psi[0]).collect();
        let back = potential_from_symbol_matrix(&d, &e);
        assert!((back[0] - psi[0]).norm() < 1e-14);
    }
}
