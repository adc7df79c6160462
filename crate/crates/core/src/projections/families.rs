//! Closed-form projection families. Each carries the symbol `D` it is built
//! from so the closed form can be compared against `D F⁺ D†`.

use super::{CMatrix, ProjectionFamily, Symbol};
use crate::grid::DualPoint;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `D D† / |D|²` for a column `D`, zero when `D` vanishes.
fn rank_one(d: &[C64]) -> CMatrix {
    let n = d.len();
    let s: f64 = d.iter().map(|x| x.norm_sqr()).sum();
    if s == 0.0 {
        return CMatrix::zeros(n, n);
    }
    CMatrix::from_fn(n, n, |i, j| d[i] * d[j].conj() / s)
}

fn column(d: Vec<C64>) -> CMatrix {
    CMatrix::from_column_slice(d.len(), 1, &d)
}

fn ik(d: &DualPoint, dim: usize) -> Vec<C64> {
    d.k_padded(dim).into_iter().map(|x| I * x).collect()
}

/// `D = (ik, ω, 1)`: gradient, time derivative (with an `i`), scalar.
fn diffusion_column(d: &DualPoint, dim: usize) -> Vec<C64> {
    let mut v = ik(d, dim);
    v.push(re(d.omega));
    v.push(re(1.0));
    v
}

/// Diffusion family, size `dim + 2`, ordered (gradient, time slot, scalar).
pub fn gamma_diffusion_g(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("G", dim + 2, dim, 0, move |d| rank_one(&diffusion_column(d, dim)))
        .with_symbol(Symbol::new(dim + 2, 1, move |d| column(diffusion_column(d, dim))))
}

fn acoustic_column(d: &DualPoint, dim: usize) -> Vec<C64> {
    let mut v = ik(d, dim);
    v.push(I * d.omega);
    v
}

/// Acoustic family, size `dim + 1`, ordered (gradient, time slot). Zero at
/// the zero dual.
pub fn gamma_acoustic_n(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("N", dim + 1, dim, 0, move |d| rank_one(&acoustic_column(d, dim)))
        .with_symbol(Symbol::new(dim + 1, 1, move |d| column(acoustic_column(d, dim))))
}

fn schrodinger_column(d: &DualPoint, dim: usize) -> Vec<C64> {
    let mut v = ik(d, dim);
    v.push(-I * d.omega);
    v.push(re(1.0));
    v
}

/// Schrödinger family, size `dim + 2`, ordered (gradient, time slot, scalar).
pub fn gamma_schrodinger_s(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("S", dim + 2, dim, 0, move |d| rank_one(&schrodinger_column(d, dim)))
        .with_symbol(Symbol::new(dim + 2, 1, move |d| column(schrodinger_column(d, dim))))
}

/// Thermal block of thermoelasticity. Same matrix as [`gamma_schrodinger_s`]
/// once the displayed pattern is completed to a Hermitian one.
pub fn gamma_thermo_y(dim: usize) -> ProjectionFamily {
    gamma_schrodinger_s(dim).with_name("Y")
}

fn eta(k: &[f64]) -> [[f64; 3]; 3] {
    [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]]
}

/// Electromagnetic family on (curl slot, electric slot), size 6.
pub fn gamma_em() -> ProjectionFamily {
    ProjectionFamily::new("EM", 6, 3, 0, |d| {
        let k = d.k_padded(3);
        let w = d.omega;
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let den = k2 + w * w;
        let mut m = CMatrix::zeros(6, 6);
        if den == 0.0 {
            return m;
        }
        let e = eta(&k);
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                m[(i, j)] = re((k2 * delta - k[i] * k[j]) / den);
                m[(i, 3 + j)] = re(w * e[i][j] / den);
                m[(3 + i, j)] = re(-w * e[i][j] / den);
                m[(3 + i, 3 + j)] = re((w * w * delta + k[i] * k[j]) / den);
            }
        }
        m
    })
    .with_symbol(Symbol::new(6, 4, |d| {
        let k = d.k_padded(3);
        let e = eta(&k);
        let mut m = CMatrix::zeros(6, 4);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = I * e[i][j];
            }
            m[(3 + i, i)] = I * d.omega;
            m[(3 + i, 3)] = -I * k[i];
        }
        m
    }))
}

fn boltzmann_column(d: &DualPoint, dx: usize, dp: usize) -> Vec<C64> {
    let mut v = ik(d, dx);
    v.extend(d.kp_padded(dp).into_iter().map(|x| I * x));
    v.push(re(d.omega));
    v.push(re(1.0));
    v
}

/// Phase-space family, size `dx + dp + 2`, ordered (spatial gradient,
/// momentum gradient, time slot, scalar).
pub fn gamma_boltzmann(dx: usize, dp: usize) -> ProjectionFamily {
    ProjectionFamily::new("BGK", dx + dp + 2, dx, dp, move |d| {
        rank_one(&boltzmann_column(d, dx, dp))
    })
    .with_symbol(Symbol::new(dx + dp + 2, 1, move |d| column(boltzmann_column(d, dx, dp))))
}

fn static_column(d: &DualPoint, dim: usize) -> Vec<C64> {
    let mut v = ik(d, dim);
    v.push(re(1.0));
    v
}

/// Time-independent gradient-plus-scalar family, size `dim + 1`.
pub fn gamma_static_gradient(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("Gs", dim + 1, dim, 0, move |d| rank_one(&static_column(d, dim)))
        .with_symbol(Symbol::new(dim + 1, 1, move |d| column(static_column(d, dim))))
}

/// Curl-free vectors, `k⊗k/k²`, zero at `k = 0`.
pub fn gamma_longitudinal(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("Kl", dim, dim, 0, move |d| rank_one(&ik(d, dim)))
        .with_symbol(Symbol::new(dim, 1, move |d| column(ik(d, dim))))
}

/// Range of `Ψ ↦ (∇·Ψ, ∂Ψ/∂t)` on (scalar, vector) slots, size `dim + 1`.
/// Complement of the space-time divergence-free pairs.
pub fn gamma_divergence_pair(dim: usize) -> ProjectionFamily {
    ProjectionFamily::new("Dp", dim + 1, dim, 0, move |d| {
        let k = d.k_padded(dim);
        let w = d.omega;
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let n = dim + 1;
        if w == 0.0 {
            let mut m = CMatrix::zeros(n, n);
            if k2 > 0.0 {
                m[(0, 0)] = re(1.0);
            }
            return m;
        }
        let mut v = vec![w];
        v.extend(k.iter().map(|x| -x));
        let s = k2 + w * w;
        CMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            re(delta - v[i] * v[j] / s)
        })
    })
    .with_symbol(Symbol::new(dim + 1, dim, move |d| {
        let k = d.k_padded(dim);
        let mut m = CMatrix::zeros(dim + 1, dim);
        for j in 0..dim {
            m[(0, j)] = I * k[j];
            m[(1 + j, j)] = I * d.omega;
        }
        m
    }))
}

/// Family lookup by short name.
pub fn family_by_name(name: &str, dim: usize, dim_p: usize) -> Option<ProjectionFamily> {
    Some(match name {
        "G" => gamma_diffusion_g(dim),
        "N" => gamma_acoustic_n(dim),
        "S" => gamma_schrodinger_s(dim),
        "Y" => gamma_thermo_y(dim),
        "EM" => gamma_em(),
        "BGK" => gamma_boltzmann(dim, dim_p.max(1)),
        "Gs" => gamma_static_gradient(dim),
        "Kl" => gamma_longitudinal(dim),
        "Dp" => gamma_divergence_pair(dim),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{certify, default_samples, gamma_from_symbol, projection_from_symbol_matrix};
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    fn x_axis(w: f64) -> DualPoint {
        DualPoint::spatial(&[1.0, 0.0, 0.0], w)
    }

    #[test]
    fn diffusion_g_values() {
        let g = gamma_diffusion_g(3);
        let z = g.eval(&DualPoint::spatial(&[0.0; 3], 0.0));
        for i in 0..5 {
            for j in 0..5 {
                let e = if i == 4 && j == 4 { 1.0 } else { 0.0 };
                assert!(close(z[(i, j)], re(e)));
            }
        }
        let m = g.eval(&x_axis(1.0));
        assert!(close(m.trace(), re(1.0)));
        assert!(close(m[(0, 0)], re(1.0 / 3.0)));
        assert!(close(m[(0, 3)], C64::new(0.0, 1.0 / 3.0)));
        assert!(close(m[(4, 4)], re(1.0 / 3.0)));
    }

    #[test]
    fn symbol_product_matches_diffusion_closed_form() {
        let g = gamma_diffusion_g(3);
        let s = g.symbol().unwrap().eval(&x_axis(1.0));
        let p = projection_from_symbol_matrix(&s);
        assert!((p[(4, 4)] - re(1.0 / 3.0)).norm() < 1e-14);
        assert!((&p - g.eval(&x_axis(1.0))).norm() < 1e-14);
    }

    #[test]
    fn acoustic_n_values() {
        let n = gamma_acoustic_n(3);
        let m = n.eval(&x_axis(0.0));
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!(close(m[(i, j)], re(e)));
            }
        }
        assert!(n.zero_dual_convention().iter().all(|v| v.norm() == 0.0));
        for d in default_samples(3, 0, 60).into_iter().skip(1) {
            assert!((n.eval(&d).trace() - re(1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn schrodinger_s_values() {
        let s = gamma_schrodinger_s(3);
        let z = s.zero_dual_convention();
        assert!(close(z[(4, 4)], re(1.0)) && close(z.trace(), re(1.0)));
        let m = s.eval(&x_axis(1.0));
        assert!(close(m[(0, 3)], re(-1.0 / 3.0)));
        assert!(close(m[(3, 4)], C64::new(0.0, -1.0 / 3.0)));
    }

    #[test]
    fn thermal_y_is_a_projection() {
        let r = certify(&gamma_thermo_y(3), 200);
        assert!(r.hermiticity <= 1e-13 && r.idempotency <= 1e-13, "{r:?}");
        assert!(close(gamma_thermo_y(2).zero_dual_convention()[(3, 3)], re(1.0)));
    }

    #[test]
    fn em_values() {
        let em = gamma_em();
        let m = em.eval(&x_axis(1.0));
        let br = [1.0, 0.5, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { br[i] } else { 0.0 };
                assert!(close(m[(3 + i, 3 + j)], re(e)));
            }
        }
        assert!((&m * &m - &m).norm() <= 1e-14);
        let m = em.eval(&DualPoint::spatial(&[0.0, 0.0, 0.0], 1.0));
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j && i >= 3 { 1.0 } else { 0.0 };
                assert!(close(m[(i, j)], re(e)));
            }
        }
        let m = em.eval(&x_axis(0.0));
        let diag = [0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { diag[i] } else { 0.0 };
                assert!(close(m[(i, j)], re(e)));
            }
        }
    }

    #[test]
    fn em_symbol_bottom_right_from_factorization() {
        let em = gamma_em();
        let p = projection_from_symbol_matrix(&em.symbol().unwrap().eval(&x_axis(1.0)));
        assert!((p[(3, 3)] - re(1.0)).norm() < 1e-14);
        assert!((p[(4, 4)] - re(0.5)).norm() < 1e-14);
        assert!((p[(5, 5)] - re(0.5)).norm() < 1e-14);
    }

    #[test]
    fn boltzmann_values() {
        let b = gamma_boltzmann(1, 1);
        let z = b.zero_dual_convention();
        assert!(close(z[(3, 3)], re(1.0)) && close(z.trace(), re(1.0)));
        let r = certify(&b, 200);
        assert!(r.passes(1e-12), "{r:?}");
        let from_sym = gamma_from_symbol("BGKs", b.symbol().unwrap().clone(), 1, 1);
        for d in default_samples(1, 1, 50) {
            assert!((b.eval(&d) - from_sym.eval(&d)).norm() < 1e-12);
        }
    }

    #[test]
    fn divergence_pair_limits() {
        let f = gamma_divergence_pair(3);
        let m = f.eval(&x_axis(0.0));
        assert!(close(m[(0, 0)], re(1.0)) && close(m.trace(), re(1.0)));
        assert!(f.zero_dual_convention().iter().all(|v| v.norm() == 0.0));
        let m = f.eval(&DualPoint::spatial(&[0.0; 3], 2.0));
        assert!(close(m[(0, 0)], re(0.0)) && close(m.trace(), re(3.0)));
    }

    #[test]
    fn every_family_is_certified_and_factorizes() {
        for name in ["G", "N", "S", "Y", "EM", "BGK", "Gs", "Kl", "Dp"] {
            for dim in 1..=3 {
                let f = family_by_name(name, dim, 1).unwrap();
                let r = certify(&f, 200);
                assert!(r.passes(1e-12), "{name} dim {dim}: {r:?}");
            }
        }
    }

    #[test]
    fn trace_equals_symbol_rank() {
        for name in ["G", "N", "S", "EM", "Dp"] {
            let f = family_by_name(name, 3, 0).unwrap();
            for d in default_samples(3, 0, 80) {
                let t = f.eval(&d).trace();
                let dm = f.symbol().unwrap().eval(&d);
                let rank = dm.rank(1e-9) as f64;
                assert!((t - re(rank)).norm() < 1e-10, "{name} at {d:?}: {t} vs {rank}");
            }
        }
    }

    #[test]
    fn complement_annihilates() {
        let g = gamma_em();
        let g2 = g.complement();
        for d in default_samples(3, 0, 50) {
            assert!((g.eval(&d) * g2.eval(&d)).norm() < 1e-12);
        }
    }
}
