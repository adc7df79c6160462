//! Restarted GMRES with modified Gram–Schmidt and Givens rotations.

use rayon::prelude::*;

use super::norm2;
use crate::C64;

pub const DEFAULT_RESTART: usize = 200;

pub(crate) struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.par_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.par_iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Rotation `(c, s)` with `c` real that zeroes `b` in `(a, b)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b == C64::new(0.0, 0.0) {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a == C64::new(0.0, 0.0) {
        return (0.0, b.conj() / b.norm());
    }
    let r = a.norm().hypot(b.norm());
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

/// Solve `A x = b` from `x₀ = 0` until `‖b − Ax‖ ≤ tol‖b‖` or `max_iter`
/// inner steps. Returns the last iterate either way.
pub(crate) fn gmres(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    b: &[C64],
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> GmresOutcome {
    let n = b.len();
    let bn = norm2(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    if bn == 0.0 {
        return GmresOutcome { x, iterations: 0, converged: true };
    }
    let mut iterations = 0;
    let mut r = b.to_vec();
    loop {
        let beta = norm2(&r);
        if beta <= tol * bn {
            return GmresOutcome { x, iterations, converged: true };
        }
        if iterations >= max_iter {
            return GmresOutcome { x, iterations, converged: false };
        }
        let m = restart.min(max_iter - iterations).max(1);
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        while k < m {
            let mut w = apply(&v[k]);
            for i in 0..=k {
                let hik = dot(&v[i], &w);
                h[i][k] = hik;
                axpy(&mut w, -hik, &v[i]);
            }
            let wn = norm2(&w);
            h[k + 1][k] = C64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = C64::new(0.0, 0.0);
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            iterations += 1;
            k += 1;
            if g[k].norm() <= tol * bn || wn == 0.0 || iterations >= max_iter {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        // Back substitution for the k×k triangular system.
        let mut y = vec![C64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            axpy(&mut x, *yi, vi);
        }
        let ax = apply(&x);
        r = b.par_iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &[Vec<C64>]) -> impl Fn(&[C64]) -> Vec<C64> + '_ {
        move |x| a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn solves_a_small_nonsymmetric_complex_system() {
        let c = |r, i| C64::new(r, i);
        let a = vec![
            vec![c(4.0, 1.0), c(1.0, 0.0), c(0.0, -0.5)],
            vec![c(-1.0, 0.0), c(3.0, 0.0), c(2.0, 1.0)],
            vec![c(0.5, 0.0), c(0.0, 1.0), c(5.0, -2.0)],
        ];
        let x_true = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.25)];
        let b = dense(&a)(&x_true);
        let out = gmres(dense(&a), &b, 1e-13, 50, 2);
        assert!(out.converged);
        for (u, v) in out.x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-11);
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.0)];
        let out = gmres(|x| x.to_vec(), &b, 1e-14, 10, 5);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a: Vec<Vec<C64>> = (0..6)
            .map(|i| (0..6).map(|j| C64::new(if i == j { (i + 1) as f64 } else { 0.0 }, 0.0)).collect())
            .collect();
        let b = vec![C64::new(1.0, 0.0); 6];
        let out = gmres(dense(&a), &b, 1e-14, 2, 2);
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }
}
