//! Periodic rectilinear grids over space, momentum and time, with their
//! discrete Fourier duals.
//!
//! Points are stored row-major: the last axis varies fastest. The dual
//! coordinate of index `j` on an axis of length `N` and spacing `h` is
//! `2π·wrap(j)/(N·h)`, where `wrap(j) = j` for `j ≤ N/2` and `j − N`
//! otherwise. On the time axis the sign is flipped, so that a field
//! `exp(i(k·x − ωt))` sits at dual point `(k, ω)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisRole {
    Spatial,
    Momentum,
    Time,
}

impl AxisRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisRole::Spatial => "spatial",
            AxisRole::Momentum => "momentum",
            AxisRole::Time => "time",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            AxisRole::Spatial => 0,
            AxisRole::Momentum => 1,
            AxisRole::Time => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AxisRole::Spatial),
            1 => Some(AxisRole::Momentum),
            2 => Some(AxisRole::Time),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub len: usize,
    pub spacing: f64,
    pub role: AxisRole,
}

impl Axis {
    pub fn new(len: usize, spacing: f64, role: AxisRole) -> Self {
        Self { len, spacing, role }
    }

    pub fn spatial(len: usize, spacing: f64) -> Self {
        Self::new(len, spacing, AxisRole::Spatial)
    }

    pub fn momentum(len: usize, spacing: f64) -> Self {
        Self::new(len, spacing, AxisRole::Momentum)
    }

    pub fn time(len: usize, spacing: f64) -> Self {
        Self::new(len, spacing, AxisRole::Time)
    }

    pub fn period(&self) -> f64 {
        self.len as f64 * self.spacing
    }

    /// Signed wavenumber index: `j` for `j ≤ N/2`, else `j − N`.
    pub fn wrap(&self, j: usize) -> i64 {
        if j <= self.len / 2 {
            j as i64
        } else {
            j as i64 - self.len as i64
        }
    }

    /// Dual coordinate before the time-axis sign flip.
    pub fn frequency(&self, j: usize) -> f64 {
        2.0 * PI * self.wrap(j) as f64 / self.period()
    }

    /// Physical coordinate of sample `j`. Momentum axes are centred on zero.
    pub fn coordinate(&self, j: usize) -> f64 {
        match self.role {
            AxisRole::Momentum => (j as f64 - (self.len / 2) as f64) * self.spacing,
            _ => j as f64 * self.spacing,
        }
    }
}

/// Fourier coordinates attached to one grid index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DualPoint {
    pub k: Vec<f64>,
    pub k_p: Vec<f64>,
    pub omega: f64,
}

impl DualPoint {
    pub fn new(k: Vec<f64>, k_p: Vec<f64>, omega: f64) -> Self {
        Self { k, k_p, omega }
    }

    pub fn spatial(k: &[f64], omega: f64) -> Self {
        Self { k: k.to_vec(), k_p: Vec::new(), omega }
    }

    pub fn is_zero(&self) -> bool {
        self.omega == 0.0 && self.k.iter().all(|&x| x == 0.0) && self.k_p.iter().all(|&x| x == 0.0)
    }

    pub fn k_norm2(&self) -> f64 {
        self.k.iter().map(|x| x * x).sum()
    }

    pub fn kp_norm2(&self) -> f64 {
        self.k_p.iter().map(|x| x * x).sum()
    }

    /// Spatial wavevector zero-padded (or truncated) to `dim` components.
    /// Grids with fewer spatial axes than a model's vector dimension describe
    /// fields that are invariant along the missing directions.
    pub fn k_padded(&self, dim: usize) -> Vec<f64> {
        let mut k = vec![0.0; dim];
        for (dst, src) in k.iter_mut().zip(&self.k) {
            *dst = *src;
        }
        k
    }

    pub fn kp_padded(&self, dim: usize) -> Vec<f64> {
        let mut k = vec![0.0; dim];
        for (dst, src) in k.iter_mut().zip(&self.k_p) {
            *dst = *src;
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    npts: usize,
    fixed_omega: Option<f64>,
}

impl SpacetimeGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        let mut n_time = 0;
        for (i, a) in axes.iter().enumerate() {
            if a.len == 0 {
                return Err(Error::InvalidGrid(format!("axis {i} has length 0")));
            }
            if !(a.spacing > 0.0) || !a.spacing.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {i} has nonpositive spacing {}",
                    a.spacing
                )));
            }
            if a.role == AxisRole::Time {
                n_time += 1;
            }
        }
        if n_time > 1 {
            return Err(Error::InvalidGrid("at most one time axis is allowed".into()));
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len;
        }
        let npts = axes.iter().map(|a| a.len).product();
        Ok(Self { axes, strides, npts, fixed_omega: None })
    }

    /// Grid without a time axis whose dual points all carry the fixed
    /// frequency `omega0` (time-harmonic evaluation of the families).
    pub fn time_harmonic(axes: Vec<Axis>, omega0: f64) -> Result<Self> {
        let mut g = Self::new(axes)?;
        if g.time_axis().is_some() {
            return Err(Error::InvalidGrid(
                "time-harmonic grids must not carry a time axis".into(),
            ));
        }
        g.fixed_omega = Some(omega0);
        Ok(g)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }

    pub fn npts(&self) -> usize {
        self.npts
    }

    pub fn fixed_omega(&self) -> Option<f64> {
        self.fixed_omega
    }

    pub fn cell_measure(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).product()
    }

    pub fn time_axis(&self) -> Option<usize> {
        self.axes.iter().position(|a| a.role == AxisRole::Time)
    }

    pub fn spatial_axes(&self) -> Vec<usize> {
        self.role_axes(AxisRole::Spatial)
    }

    pub fn momentum_axes(&self) -> Vec<usize> {
        self.role_axes(AxisRole::Momentum)
    }

    fn role_axes(&self, role: AxisRole) -> Vec<usize> {
        (0..self.axes.len()).filter(|&i| self.axes[i].role == role).collect()
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_axes().len()
    }

    pub fn momentum_dim(&self) -> usize {
        self.momentum_axes().len()
    }

    pub fn unravel(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            idx[i] = p / s;
            p %= s;
        }
        idx
    }

    pub fn ravel(&self, index: &[usize]) -> Result<usize> {
        self.check_index(index)?;
        Ok(index.iter().zip(&self.strides).map(|(i, s)| i * s).sum())
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.axes.len() || index.iter().zip(&self.axes).any(|(i, a)| *i >= a.len) {
            return Err(Error::IndexOutOfRange { index: index.to_vec(), shape: self.shape() });
        }
        Ok(())
    }

    pub fn dual_coordinates(&self, index: &[usize]) -> Result<DualPoint> {
        self.check_index(index)?;
        let mut k = Vec::new();
        let mut k_p = Vec::new();
        let mut omega = self.fixed_omega.unwrap_or(0.0);
        for (a, &j) in self.axes.iter().zip(index) {
            let f = a.frequency(j);
            match a.role {
                AxisRole::Spatial => k.push(f),
                AxisRole::Momentum => k_p.push(f),
                AxisRole::Time => omega = if f == 0.0 { 0.0 } else { -f },
            }
        }
        Ok(DualPoint { k, k_p, omega })
    }

    /// Dual point of a flat (row-major) index.
    pub fn dual_at(&self, p: usize) -> DualPoint {
        self.dual_coordinates(&self.unravel(p)).expect("flat index in range")
    }

    pub fn dual_points(&self) -> Vec<DualPoint> {
        (0..self.npts).into_par_iter().map(|p| self.dual_at(p)).collect()
    }

    /// Physical coordinates of a flat index, one entry per axis.
    pub fn coordinates(&self, p: usize) -> Vec<f64> {
        self.unravel(p)
            .iter()
            .zip(&self.axes)
            .map(|(&j, a)| a.coordinate(j))
            .collect()
    }

    /// Momentum coordinates of a flat index (the `p` of phase space).
    pub fn momentum_coordinates(&self, p: usize) -> Vec<f64> {
        let idx = self.unravel(p);
        self.momentum_axes()
            .into_iter()
            .map(|a| self.axes[a].coordinate(idx[a]))
            .collect()
    }

    /// In-place DFT of point-major, component-minor data along every axis.
    /// The forward transform is unnormalized; the inverse divides by the
    /// point count.
    pub(crate) fn transform(&self, data: &mut [C64], ncomp: usize, inverse: bool) {
        assert_eq!(data.len(), self.npts * ncomp, "data length does not match grid");
        let mut planner = FftPlanner::<f64>::new();
        for (a, axis) in self.axes.iter().enumerate() {
            if axis.len == 1 {
                continue;
            }
            let fft: Arc<dyn Fft<f64>> = if inverse {
                planner.plan_fft_inverse(axis.len)
            } else {
                planner.plan_fft_forward(axis.len)
            };
            let inner = self.strides[a];
            let block = axis.len * inner * ncomp;
            data.par_chunks_mut(block).for_each_init(
                || vec![C64::new(0.0, 0.0); block],
                |buf, chunk| {
                    // gather lines contiguously: line (i, c) occupies buf[(i*ncomp + c)*N ..]
                    let n = axis.len;
                    for j in 0..n {
                        for i in 0..inner {
                            let src = (j * inner + i) * ncomp;
                            for c in 0..ncomp {
                                buf[(i * ncomp + c) * n + j] = chunk[src + c];
                            }
                        }
                    }
                    fft.process(buf);
                    for j in 0..n {
                        for i in 0..inner {
                            let dst = (j * inner + i) * ncomp;
                            for c in 0..ncomp {
                                chunk[dst + c] = buf[(i * ncomp + c) * n + j];
                            }
                        }
                    }
                },
            );
        }
        if inverse {
            let scale = 1.0 / self.npts as f64;
            data.par_iter_mut().for_each(|v| *v *= scale);
        }
    }
}
