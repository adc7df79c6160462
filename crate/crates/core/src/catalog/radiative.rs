//! Discrete ordinates for the direction sphere and the scattering operator.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Unit directions with quadrature weights summing to `4π`.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        // One more derivative evaluation at the converged node.
        let (mut p0, mut p1) = (1.0, 0.0);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        if n > 0 {
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre in the polar cosine times a uniform azimuthal rule.
pub fn build_direction_set(n_polar: usize, n_azimuth: usize) -> Result<DirectionSet> {
    if n_polar == 0 || n_azimuth == 0 {
        return Err(Error::InvalidArgument("direction set needs n_polar ≥ 1 and n_azimuth ≥ 1".into()));
    }
    let (mu, wmu) = gauss_legendre(n_polar);
    let dphi = 2.0 * PI / n_azimuth as f64;
    let mut directions = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    for (m, wm) in mu.iter().zip(&wmu) {
        let s = (1.0 - m * m).max(0.0).sqrt();
        for j in 0..n_azimuth {
            let phi = dphi * (j as f64 + 0.5);
            directions.push([s * phi.cos(), s * phi.sin(), *m]);
            weights.push(wm * dphi);
        }
    }
    Ok(DirectionSet { directions, weights })
}

/// Scattering phase function `P(n′, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Isotropic,
    /// Henyey–Greenstein with asymmetry `g ∈ (-1, 1)`.
    HenyeyGreenstein(f64),
}

impl Phase {
    pub fn eval(&self, from: &[f64; 3], to: &[f64; 3]) -> f64 {
        match *self {
            Phase::Isotropic => 1.0 / (4.0 * PI),
            Phase::HenyeyGreenstein(g) => {
                let c: f64 = from.iter().zip(to).map(|(a, b)| a * b).sum();
                (1.0 - g * g) / (4.0 * PI * (1.0 + g * g - 2.0 * g * c).powf(1.5))
            }
        }
    }

    pub fn from_asymmetry(g: f64) -> Result<Self> {
        if g == 0.0 {
            Ok(Phase::Isotropic)
        } else if g.abs() < 1.0 {
            Ok(Phase::HenyeyGreenstein(g))
        } else {
            Err(Error::InvalidArgument(format!("phase asymmetry {g} must lie in (-1, 1)")))
        }
    }
}

/// `W = μ_t I − μ_s [P(n_j, n_i) w_j]`, row-major over directions.
pub fn build_radiative_w(set: &DirectionSet, mu_t: f64, mu_s: f64, phase: Phase) -> Result<Vec<f64>> {
    if !(mu_t >= 0.0) || !(mu_s >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "extinction and scattering must be nonnegative (μ_t = {mu_t}, μ_s = {mu_s})"
        )));
    }
    let n = set.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let scatter = phase.eval(&set.directions[j], &set.directions[i]) * set.weights[j];
            w[i * n + j] = if i == j { mu_t } else { 0.0 } - mu_s * scatter;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(4);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m6: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((m6 - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn single_direction_has_full_weight() {
        let s = build_direction_set(1, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.weights[0] - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_sphere_and_first_moment_vanishes() {
        let s = build_direction_set(2, 4).unwrap();
        assert_eq!(s.len(), 8);
        let total: f64 = s.weights.iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        for c in 0..3 {
            let m: f64 = s.directions.iter().zip(&s.weights).map(|(n, w)| w * n[c]).sum();
            assert!(m.abs() < 1e-12, "component {c}: {m}");
        }
        for n in &s.directions {
            let r: f64 = n.iter().map(|x| x * x).sum();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn no_scattering_gives_scaled_identity() {
        let s = build_direction_set(2, 3).unwrap();
        let w = build_radiative_w(&s, 1.5, 0.0, Phase::Isotropic).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(w[i * 6 + j], if i == j { 1.5 } else { 0.0 });
            }
        }
    }

    #[test]
    fn single_direction_reduces_to_absorption() {
        let s = build_direction_set(1, 1).unwrap();
        let w = build_radiative_w(&s, 2.0, 0.5, Phase::Isotropic).unwrap();
        assert!((w[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn negative_coefficients_are_rejected() {
        let s = build_direction_set(1, 2).unwrap();
        assert!(build_radiative_w(&s, -1.0, 0.0, Phase::Isotropic).is_err());
        assert!(build_direction_set(0, 2).is_err());
    }
}
