//! Galilean boosts of acoustic and elastic `L`, the general coupled forms
//! they generate, and a discrete covariance check on manufactured fields.
//!
//! Spacetime vectors are ordered `(spatial, time)`. With `x̲ = (x, −t)` the
//! boost `x̲′ = A x̲`, `A = [[I, w], [0, 1]]`, maps `J′ = AJ`,
//! `E′ = A⁻ᵀE` and `L′ = A L Aᵀ`. Elasticity uses the lifted analogue
//! `T = [[𝓘, wI], [0, I]]` on `(d² + d)`-vectors whose first block is
//! flattened as `a·d + j`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::catalog::PhysicsModel;
use crate::error::{Error, Result};
use crate::field::{ComponentField, MediumField};
use crate::grid::SpacetimeGrid;
use crate::solver::{manufactured_problem_with, residual_with};
use crate::C64;

/// Frame velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoostSpec {
    pub w: Vec<f64>,
}

impl BoostSpec {
    pub fn new(w: &[f64]) -> Result<Self> {
        if w.is_empty() || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("boost velocity must be finite and nonempty, got {w:?}")));
        }
        Ok(Self { w: w.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `A = [[I, w], [0, 1]]`.
    pub fn acoustic_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut a = DMatrix::identity(d + 1, d + 1);
        for i in 0..d {
            a[(i, d)] = self.w[i];
        }
        a
    }

    /// `T = [[𝓘, wI], [0, I]]` with `(wI)[(a, j), k] = w_a δ_jk`.
    pub fn elastic_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut t = DMatrix::identity(d * d + d, d * d + d);
        for a in 0..d {
            for j in 0..d {
                t[(a * d + j, d * d + j)] = self.w[a];
            }
        }
        t
    }

    /// Whole cells moved per time step along each spatial axis, when the
    /// shear `x′ = x − wt` maps the periodic grid onto itself.
    pub fn lattice_shift(&self, grid: &SpacetimeGrid) -> Result<Vec<i64>> {
        let ta = grid
            .time_axis()
            .ok_or_else(|| Error::InvalidGrid("a boost needs a time axis".into()))?;
        let time = grid.axes()[ta];
        let spatial = grid.spatial_axes();
        if spatial.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "boost has {} components for {} spatial axes",
                self.dim(),
                spatial.len()
            )));
        }
        spatial
            .iter()
            .zip(&self.w)
            .map(|(&a, &w)| {
                let axis = grid.axes()[a];
                let cells = w * time.spacing / axis.spacing;
                let m = cells.round();
                if (cells - m).abs() > 1e-12 * cells.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "w·Δt/Δx = {cells} on axis {a} is not an integer"
                    )));
                }
                let m = m as i64;
                if (m * time.len as i64).rem_euclid(axis.len as i64) != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "shear of {m} cells per step does not close over {} steps on an axis of {} cells",
                        time.len, axis.len
                    )));
                }
                Ok(m)
            })
            .collect()
    }
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("{what} must be {n}×{n}, got {}×{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

/// `[[ρ, f], [fᵀ, κ⁻¹]]`, the general acoustic form.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledAcousticL {
    pub rho: DMatrix<f64>,
    pub f: Vec<f64>,
    pub kappa_inv: f64,
}

impl CoupledAcousticL {
    pub fn new(rho: DMatrix<f64>, f: Vec<f64>, kappa_inv: f64) -> Result<Self> {
        let d = f.len();
        check_square(&rho, d, "density block")?;
        if symmetry_defect(&rho) > 1e-12 {
            return Err(Error::InvalidArgument("density block must be symmetric".into()));
        }
        Ok(Self { rho, f, kappa_inv })
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(&self.rho);
        for i in 0..d {
            m[(i, d)] = self.f[i];
            m[(d, i)] = self.f[i];
        }
        m[(d, d)] = self.kappa_inv;
        m
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let d = m.nrows() - 1;
        Self {
            rho: m.view((0, 0), (d, d)).into_owned(),
            f: (0..d).map(|i| m[(i, d)]).collect(),
            kappa_inv: m[(d, d)],
        }
    }
}

/// `[[𝒞, F], [Fᵀ, ρ]]` on lifted `(d² + d)`-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledElasticL {
    pub c: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub rho: DMatrix<f64>,
}

impl CoupledElasticL {
    pub fn new(c: DMatrix<f64>, f: DMatrix<f64>, rho: DMatrix<f64>) -> Result<Self> {
        let d = rho.nrows();
        check_square(&rho, d, "density block")?;
        check_square(&c, d * d, "stiffness block")?;
        if f.shape() != (d * d, d) {
            return Err(Error::ShapeMismatch(format!("coupling block must be {}×{d}", d * d)));
        }
        if symmetry_defect(&c) > 1e-12 || symmetry_defect(&rho) > 1e-12 {
            return Err(Error::InvalidArgument("stiffness and density blocks must be symmetric".into()));
        }
        Ok(Self { c, f, rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = d * d + d;
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (d * d, d * d)).copy_from(&self.c);
        m.view_mut((0, d * d), (d * d, d)).copy_from(&self.f);
        m.view_mut((d * d, 0), (d, d * d)).copy_from(&self.f.transpose());
        m.view_mut((d * d, d * d), (d, d)).copy_from(&self.rho);
        m
    }

    fn from_matrix(m: &DMatrix<f64>, d: usize) -> Self {
        Self {
            c: m.view((0, 0), (d * d, d * d)).into_owned(),
            f: m.view((0, d * d), (d * d, d)).into_owned(),
            rho: m.view((d * d, d * d), (d, d)).into_owned(),
        }
    }
}

/// `A · diag(−ρ⁻¹I, κ⁻¹) · Aᵀ`.
pub fn boost_acoustic(rho: f64, kappa: f64, w: &BoostSpec) -> Result<CoupledAcousticL> {
    if !(rho > 0.0 && kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("ρ and κ must be positive, got ρ = {rho}, κ = {kappa}")));
    }
    let d = w.dim();
    let rest = CoupledAcousticL { rho: DMatrix::identity(d, d) * (-1.0 / rho), f: vec![0.0; d], kappa_inv: 1.0 / kappa };
    Ok(boost_coupled_acoustic(&rest, w))
}

/// `A L Aᵀ` for an already coupled acoustic `L`.
pub fn boost_coupled_acoustic(l: &CoupledAcousticL, w: &BoostSpec) -> CoupledAcousticL {
    let a = w.acoustic_matrix();
    CoupledAcousticL::from_matrix(&(&a * l.matrix() * a.transpose()))
}

fn minor_symmetry_defect(c: &DMatrix<f64>, d: usize) -> f64 {
    let scale = c.amax().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = c[(i * d + j, k * d + l)];
                    worst = worst.max((v - c[(j * d + i, k * d + l)]).abs());
                    worst = worst.max((v - c[(i * d + j, l * d + k)]).abs());
                }
            }
        }
    }
    worst / scale
}

/// `T · diag(−𝒞, ρ) · Tᵀ`, giving `[[−𝒞 + wρwᵀ, wρ], [ρwᵀ, ρ]]`.
pub fn boost_elastic(c: &DMatrix<f64>, rho: &DMatrix<f64>, w: &BoostSpec) -> Result<CoupledElasticL> {
    let d = w.dim();
    check_square(rho, d, "density")?;
    check_square(c, d * d, "stiffness")?;
    if minor_symmetry_defect(c, d) > 1e-12 || symmetry_defect(c) > 1e-12 {
        return Err(Error::InvalidArgument("stiffness must have minor and major symmetries".into()));
    }
    if symmetry_defect(rho) > 1e-12 || rho.clone().cholesky().is_none() {
        return Err(Error::InvalidArgument("density must be symmetric positive definite".into()));
    }
    let rest = CoupledElasticL { c: -c.clone(), f: DMatrix::zeros(d * d, d), rho: rho.clone() };
    Ok(boost_coupled_elastic(&rest, w))
}

/// `T L Tᵀ` for an already coupled elastic `L`.
pub fn boost_coupled_elastic(l: &CoupledElasticL, w: &BoostSpec) -> CoupledElasticL {
    let t = w.elastic_matrix();
    CoupledElasticL::from_matrix(&(&t * l.matrix() * t.transpose()), w.dim())
}

fn to_complex(m: &DMatrix<f64>) -> Vec<C64> {
    let (r, c) = m.shape();
    (0..r * c).map(|k| C64::new(m[(k / c, k % c)], 0.0)).collect()
}

/// Pointwise general acoustic `L` with arbitrary spacetime dependence.
pub fn general_acoustic_l(
    grid: &Arc<SpacetimeGrid>,
    d: usize,
    at: impl Fn(usize) -> CoupledAcousticL + Sync,
) -> Result<MediumField> {
    MediumField::from_fn(grid.clone(), d + 1, |p| {
        let l = at(p);
        if l.dim() == d {
            to_complex(&l.matrix())
        } else {
            Vec::new()
        }
    })
}

/// Pointwise general elastic `L` with arbitrary spacetime dependence.
pub fn general_elastic_l(
    grid: &Arc<SpacetimeGrid>,
    d: usize,
    at: impl Fn(usize) -> CoupledElasticL + Sync,
) -> Result<MediumField> {
    MediumField::from_fn(grid.clone(), d * d + d, |p| {
        let l = at(p);
        if l.dim() == d {
            to_complex(&l.matrix())
        } else {
            Vec::new()
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub model: &'static str,
    pub w: Vec<f64>,
    pub seed: u64,
    /// Cells moved per time step along each spatial axis.
    pub shift: Vec<i64>,
    /// `‖Γ₁E′ − E′‖ / ‖E′‖` in the moving frame.
    pub constraint_defect: f64,
    /// `‖Γ₁(L′E′ − s′)‖ / ‖s′‖` in the moving frame.
    pub equation_defect: f64,
    pub defect: f64,
}

/// Source point of the sheared field: `F′[x′, t] = F[x′ + wt, t]`.
fn sheared_index(grid: &SpacetimeGrid, p: usize, shift: &[i64], spatial: &[usize], ta: usize) -> usize {
    let mut idx = grid.unravel(p);
    let n = idx[ta] as i64;
    for (&a, &m) in spatial.iter().zip(shift) {
        let len = grid.axes()[a].len as i64;
        idx[a] = (idx[a] as i64 + m * n).rem_euclid(len) as usize;
    }
    grid.ravel(&idx).expect("sheared index stays on the grid")
}

fn map_field(f: &ComponentField, m: &DMatrix<f64>, src: &[usize]) -> Result<ComponentField> {
    let n = f.ncomp();
    let mc = DMatrix::from_row_slice(n, n, &to_complex(m));
    let mut out = Vec::with_capacity(f.values().len());
    for &q in src {
        let v = nalgebra::DVector::from_column_slice(f.point(q));
        out.extend((&mc * v).iter().copied());
    }
    f.with_values(out)
}

/// Boost a rest-frame manufactured problem by a lattice-compatible `w` and
/// evaluate the canonical residual with `L′ = T L Tᵀ` in the moving frame.
/// The moduli must not depend on time in the rest frame.
pub fn covariance_check(model: &PhysicsModel, w: &BoostSpec, seed: u64) -> Result<CovarianceReport> {
    let grid = model.grid();
    let d = model.dim();
    let t = match model.id {
        "acoustics" => w.acoustic_matrix(),
        "elastodynamics" => w.elastic_matrix(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "covariance check covers acoustics and elastodynamics, not `{other}`"
            )))
        }
    };
    if d != w.dim() {
        return Err(Error::ShapeMismatch(format!("model dimension {d} but boost has {} components", w.dim())));
    }
    let shift = w.lattice_shift(grid)?;
    let ta = grid.time_axis().expect("lattice_shift checked the time axis");
    let spatial = grid.spatial_axes();
    let stride: usize = grid.axes()[ta + 1..].iter().map(|a| a.len).product();
    let nt = grid.axes()[ta].len;
    let time_invariant = (0..grid.npts()).all(|p| {
        let n = (p / stride) % nt;
        n == 0 || model.medium.at(p) == model.medium.at(p - n * stride)
    });
    if !time_invariant {
        return Err(Error::InvalidArgument("rest-frame moduli must be constant in time".into()));
    }
    // Unwindowed and one mode wide so sheared frequencies stay below Nyquist.
    let mp = manufactured_problem_with(model, seed, 1, false)?;
    let src: Vec<usize> = (0..grid.npts()).map(|p| sheared_index(grid, p, &shift, &spatial, ta)).collect();
    let t_inv_t = t.clone().try_inverse().expect("boost matrices are unit triangular").transpose();
    let e = map_field(&mp.e_exact, &t_inv_t, &src)?;
    let s = map_field(&mp.source, &t, &src)?;
    let n = model.n();
    let tc = DMatrix::from_row_slice(n, n, &to_complex(&t));
    let medium = MediumField::from_fn(grid.clone(), n, |p| {
        let l = DMatrix::from_row_slice(n, n, model.medium.at(src[p]));
        let lp = &tc * l * tc.transpose();
        (0..n * n).map(|k| lp[(k / n, k % n)]).collect()
    })?;
    let (r1, r2) = residual_with(&model.gamma, &medium, &e, &s)?;
    let constraint_defect = r1 / e.norm();
    let equation_defect = r2 / s.norm();
    Ok(CovarianceReport {
        model: model.id,
        w: w.w.clone(),
        seed,
        shift,
        constraint_defect,
        equation_defect,
        defect: constraint_defect.max(equation_defect),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, ParameterRecord, Profile, Tensor};
    use crate::grid::Axis;

    fn boost(w: &[f64]) -> BoostSpec {
        BoostSpec::new(w).unwrap()
    }

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn zero_boost_leaves_acoustic_l_alone() {
        let l = boost_acoustic(2.0, 4.0, &boost(&[0.0, 0.0, 0.0])).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-0.5, -0.5, -0.5, 0.25]));
        assert_eq!(l.matrix(), expected);
    }

    #[test]
    fn unit_boost_of_unit_fluid() {
        let l = boost_acoustic(1.0, 1.0, &boost(&[1.0, 0.0, 0.0])).unwrap();
        let top = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, -1.0, -1.0]));
        assert_eq!(l.rho, top);
        assert_eq!(l.f, vec![1.0, 0.0, 0.0]);
        assert_eq!(l.kappa_inv, 1.0);
    }

    #[test]
    fn acoustic_boost_matches_the_moving_model_formula() {
        let (rho, kappa) = (1.3, 0.7);
        let w = [0.4, -0.2];
        let l = boost_acoustic(rho, kappa, &boost(&w)).unwrap().matrix();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { -1.0 / rho } else { 0.0 } + w[i] * w[j] / kappa;
                assert!((l[(i, j)] - expected).abs() < 1e-15);
            }
            assert!((l[(i, 2)] - w[i] / kappa).abs() < 1e-15);
        }
    }

    #[test]
    fn opposite_boosts_cancel() {
        let w = boost(&[0.3, -1.1, 0.25]);
        let back = boost(&[-0.3, 1.1, -0.25]);
        let l0 = boost_acoustic(1.5, 2.5, &boost(&[0.0; 3])).unwrap();
        let l2 = boost_coupled_acoustic(&boost_coupled_acoustic(&l0, &w), &back);
        assert!(max_diff(&l2.matrix(), &l0.matrix()) < 1e-14);
        let c = Tensor::isotropic_stiffness(3, 1.0, 0.8);
        let c = DMatrix::from_fn(9, 9, |i, j| c.at(i, j).re);
        let e0 = boost_elastic(&c, &DMatrix::identity(3, 3), &boost(&[0.0; 3])).unwrap();
        let e2 = boost_coupled_elastic(&boost_coupled_elastic(&e0, &w), &back);
        assert!(max_diff(&e2.matrix(), &e0.matrix()) < 1e-14);
    }

    #[test]
    fn zero_boost_leaves_elastic_l_alone() {
        let c = Tensor::isotropic_stiffness(2, 1.0, 0.5);
        let c = DMatrix::from_fn(4, 4, |i, j| c.at(i, j).re);
        let rho = DMatrix::identity(2, 2) * 2.0;
        let l = boost_elastic(&c, &rho, &boost(&[0.0, 0.0])).unwrap();
        assert_eq!(l.c, -c);
        assert_eq!(l.f, DMatrix::zeros(4, 2));
        assert_eq!(l.rho, rho);
    }

    #[test]
    fn elastic_boost_of_pure_inertia() {
        let l = boost_elastic(&DMatrix::zeros(9, 9), &DMatrix::identity(3, 3), &boost(&[1.0, 0.0, 0.0])).unwrap();
        // wρwᵀ with w = e₁: [(a, j), (b, l)] = δ_a1 δ_b1 δ_jl
        for a in 0..3 {
            for j in 0..3 {
                for b in 0..3 {
                    for k in 0..3 {
                        let expected = if a == 0 && b == 0 && j == k { 1.0 } else { 0.0 };
                        assert_eq!(l.c[(a * 3 + j, b * 3 + k)], expected);
                    }
                }
                let coupling = if a == 0 { 1.0 } else { 0.0 };
                for k in 0..3 {
                    assert_eq!(l.f[(a * 3 + j, k)], if j == k { coupling } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn boost_inputs_are_validated() {
        assert!(boost_acoustic(0.0, 1.0, &boost(&[1.0])).is_err());
        assert!(boost_acoustic(1.0, -1.0, &boost(&[1.0])).is_err());
        let mut c = DMatrix::identity(4, 4);
        c[(1, 0)] = 0.3;
        assert!(boost_elastic(&c, &DMatrix::identity(2, 2), &boost(&[0.0, 0.0])).is_err());
        assert!(boost_elastic(&DMatrix::identity(4, 4), &(-DMatrix::identity(2, 2)), &boost(&[0.0, 0.0])).is_err());
        assert!(BoostSpec::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn general_builders_reproduce_boosts() {
        let grid = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(4, 1.0), Axis::time(4, 1.0)]).unwrap());
        let b = boost_acoustic(1.0, 2.0, &boost(&[0.5])).unwrap();
        let m = general_acoustic_l(&grid, 1, |_| b.clone()).unwrap();
        assert_eq!(m.at(3), &to_complex(&b.matrix())[..]);
        let rest = CoupledAcousticL::new(DMatrix::identity(1, 1) * -1.0, vec![0.0], 0.5).unwrap();
        assert_eq!(boost_coupled_acoustic(&rest, &boost(&[0.5])), b);
        assert!(general_acoustic_l(&grid, 2, |_| b.clone()).is_err());
    }

    #[test]
    fn general_builder_follows_a_time_profile() {
        let grid = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(3, 1.0), Axis::time(4, 1.0)]).unwrap());
        let g = grid.clone();
        let m = general_acoustic_l(&grid, 1, move |p| {
            let n = g.unravel(p)[1] as f64;
            CoupledAcousticL::new(DMatrix::identity(1, 1) * -1.0, vec![0.0], 1.0 + 0.1 * n).unwrap()
        })
        .unwrap();
        for p in 0..grid.npts() {
            let [x, n] = grid.unravel(p)[..] else { unreachable!() };
            let same_time = grid.ravel(&[(x + 1) % 3, n]).unwrap();
            assert_eq!(m.at(p), m.at(same_time));
        }
        assert_ne!(m.at(0), m.at(grid.ravel(&[0, 1]).unwrap()));
    }

    fn grid_8_16() -> Arc<SpacetimeGrid> {
        Arc::new(SpacetimeGrid::new(vec![Axis::spatial(8, 1.0), Axis::time(16, 1.0)]).unwrap())
    }

    /// Density chosen so `1/ρ` is a single cosine: `L` and hence `J` stay
    /// band-limited and the shear cannot push modes past temporal Nyquist.
    fn acoustics() -> PhysicsModel {
        let grid = grid_8_16();
        let v: Vec<f64> = (0..grid.npts())
            .map(|p| {
                let x = grid.unravel(p)[0] as f64;
                1.0 / (1.0 + 0.3 * (std::f64::consts::TAU * x / 8.0).cos()) - 1.0
            })
            .collect();
        let rec = ParameterRecord::new()
            .with_real("rho", 1.0)
            .with_real("kappa", 2.0)
            .modulate("rho", 1.0, Profile::Values(Arc::new(v)));
        build_model("acoustics", grid, &rec).unwrap()
    }

    #[test]
    fn lattice_compatibility_is_enforced() {
        let g = grid_8_16();
        assert_eq!(boost(&[1.0]).lattice_shift(&g).unwrap(), vec![1]);
        assert!(boost(&[0.5]).lattice_shift(&g).is_err());
        let odd = SpacetimeGrid::new(vec![Axis::spatial(6, 1.0), Axis::time(4, 1.0)]).unwrap();
        assert!(boost(&[1.0]).lattice_shift(&odd).is_err());
        assert!(boost(&[1.0, 0.0]).lattice_shift(&g).is_err());
    }

    #[test]
    fn identity_boost_has_no_defect() {
        let r = covariance_check(&acoustics(), &boost(&[0.0]), 3).unwrap();
        assert!(r.defect <= 1e-12, "{r:?}");
    }

    #[test]
    fn acoustics_is_covariant_on_the_lattice() {
        for seed in [1, 2] {
            let r = covariance_check(&acoustics(), &boost(&[1.0]), seed).unwrap();
            assert!(r.defect <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn elastodynamics_is_covariant_on_the_lattice() {
        let rec = ParameterRecord::new()
            .with("C", Tensor::isotropic_stiffness(1, 1.0, 0.5))
            .with_real("rho", 1.0)
            .modulate("C", 0.3, Profile::Cosine { axis: 0, mode: 1 });
        let m = build_model("elastodynamics", grid_8_16(), &rec).unwrap();
        for seed in [1, 2] {
            let r = covariance_check(&m, &boost(&[1.0]), seed).unwrap();
            assert!(r.defect <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn boosted_field_fails_the_unboosted_medium() {
        // control: same sheared fields judged by the rest-frame L
        let m = acoustics();
        let w = boost(&[1.0]);
        let r = covariance_check(&m, &w, 1).unwrap();
        let mp = manufactured_problem_with(&m, 1, 1, false).unwrap();
        let grid = m.grid();
        let src: Vec<usize> =
            (0..grid.npts()).map(|p| sheared_index(grid, p, &[1], &grid.spatial_axes(), 1)).collect();
        let t = w.acoustic_matrix();
        let e = map_field(&mp.e_exact, &t.clone().try_inverse().unwrap().transpose(), &src).unwrap();
        let s = map_field(&mp.source, &t, &src).unwrap();
        let (_, r2) = residual_with(&m.gamma, &m.medium, &e, &s).unwrap();
        assert!(r2 / s.norm() > 1e3 * r.defect.max(1e-15));
    }

    #[test]
    fn covariance_rejects_other_models_and_time_dependent_media() {
        let rec = ParameterRecord::new().with_real("rho", 1.0).with_real("kappa", 1.0);
        let m = build_model("acoustics_moving", grid_8_16(), &rec.clone().with_vector("w", &[0.0])).unwrap();
        assert!(covariance_check(&m, &boost(&[1.0]), 0).is_err());
        let timed = rec.modulate("rho", 0.2, Profile::Cosine { axis: 1, mode: 1 });
        let m = build_model("acoustics", grid_8_16(), &timed).unwrap();
        assert!(covariance_check(&m, &boost(&[1.0]), 0).is_err());
    }
}
