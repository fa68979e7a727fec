//! Box grids in left-translated coordinates and grid-sampled fields.
//!
//! A grid is attached to a centre `c`: node `ξ_l` (local coordinates on an
//! axis-aligned box) represents the physical point `c ∘ ξ_l`. Because every
//! operator in this crate is left-invariant, all stencils are computed in
//! local coordinates.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hcalculus::{fd_hessian, ScalarField};
use crate::hgroup::{compose_coords, GaugeBall, GroupPoint};

pub(crate) type Local = SmallVec<[f64; 5]>;

/// Tensor grid on `[−a, a]^{2N} × [−b, b]` around a centre.
#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    n: usize,
    center: GroupPoint,
    half_xy: f64,
    half_t: f64,
    n_xy: usize,
    n_t: usize,
    h: f64,
    h_t: f64,
    #[serde(skip)]
    interior: Vec<bool>,
    omega: Option<GaugeBall>,
}

impl Grid {
    pub fn new(center: GroupPoint, half_xy: f64, half_t: f64, n_xy: usize, n_t: usize) -> Result<Self> {
        if n_xy < 2 || n_t < 2 {
            return Err(Error::config("grid", format!("need at least 2 nodes per axis, got {n_xy}×{n_t}")));
        }
        if !(half_xy > 0.0 && half_t > 0.0) || !half_xy.is_finite() || !half_t.is_finite() {
            return Err(Error::config("grid", "box half-widths must be positive and finite"));
        }
        let n = center.n();
        let cols = n_xy
            .checked_pow(2 * n as u32)
            .and_then(|c| c.checked_mul(n_t))
            .ok_or_else(|| Error::config("grid", "node count overflows"))?;
        Ok(Grid {
            n,
            center,
            half_xy,
            half_t,
            n_xy,
            n_t,
            h: 2.0 * half_xy / (n_xy - 1) as f64,
            h_t: 2.0 * half_t / (n_t - 1) as f64,
            interior: vec![false; cols],
            omega: None,
        })
    }

    /// The box `[−R, R]^{2N} × [−R², R²]` around the ball, which contains
    /// it, with the interior mask set by strict membership.
    pub fn for_ball(ball: &GaugeBall, n_xy: usize, n_t: usize) -> Result<Self> {
        let r = ball.radius();
        Ok(Grid::new(ball.center().clone(), r, r * r, n_xy, n_t)?.with_domain(ball))
    }

    /// Marks nodes strictly inside `ball` as interior.
    pub fn with_domain(mut self, ball: &GaugeBall) -> Self {
        let mask: Vec<bool> = (0..self.len())
            .into_par_iter()
            .map(|i| ball.contains(&self.point(i)))
            .collect();
        self.interior = mask;
        self.omega = Some(ball.clone());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }
    pub fn center(&self) -> &GroupPoint {
        &self.center
    }
    pub fn half_xy(&self) -> f64 {
        self.half_xy
    }
    pub fn half_t(&self) -> f64 {
        self.half_t
    }
    pub fn n_xy(&self) -> usize {
        self.n_xy
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn h_t(&self) -> f64 {
        self.h_t
    }
    pub fn omega(&self) -> Option<&GaugeBall> {
        self.omega.as_ref()
    }

    /// Spacing along local axis `a` (t is the last axis).
    pub fn spacing(&self, a: usize) -> f64 {
        if a + 1 == self.dim() {
            self.h_t
        } else {
            self.h
        }
    }

    pub fn n_columns(&self) -> usize {
        self.n_xy.pow(2 * self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.n_columns() * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, col: usize, k: usize) -> usize {
        col * self.n_t + k
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_t, idx % self.n_t)
    }

    /// Horizontal multi-index of a column, axis 0 slowest.
    pub fn column_indices(&self, col: usize) -> SmallVec<[usize; 4]> {
        let m = 2 * self.n;
        let mut out: SmallVec<[usize; 4]> = SmallVec::from_elem(0, m);
        let mut rem = col;
        for a in (0..m).rev() {
            out[a] = rem % self.n_xy;
            rem /= self.n_xy;
        }
        out
    }

    /// Column from a horizontal multi-index, `None` when outside the box.
    pub fn column_of(&self, idx: &[i64]) -> Option<usize> {
        let mut col = 0usize;
        for &i in idx {
            if i < 0 || i >= self.n_xy as i64 {
                return None;
            }
            col = col * self.n_xy + i as usize;
        }
        Some(col)
    }

    pub fn axis_value(&self, a: usize, i: usize) -> f64 {
        if a + 1 == self.dim() {
            -self.half_t + i as f64 * self.h_t
        } else {
            -self.half_xy + i as f64 * self.h
        }
    }

    pub(crate) fn local_coords(&self, idx: usize) -> Local {
        let (col, k) = self.split(idx);
        let mut c: Local = self
            .column_indices(col)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.axis_value(a, i))
            .collect();
        c.push(self.axis_value(2 * self.n, k));
        c
    }

    pub(crate) fn to_physical(&self, local: &[f64]) -> Local {
        compose_coords(self.n, self.center.coords(), local)
    }

    pub(crate) fn to_local(&self, physical: &[f64]) -> Local {
        compose_coords(self.n, &self.center.inverse().coords()[..], physical)
    }

    /// Physical point represented by node `idx`.
    pub fn point(&self, idx: usize) -> GroupPoint {
        GroupPoint::from_raw(self.n, self.to_physical(&self.local_coords(idx)))
    }

    pub fn local_point(&self, idx: usize) -> GroupPoint {
        GroupPoint::from_raw(self.n, self.local_coords(idx))
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.interior[idx]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.interior[i]).collect()
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Whether local coordinates lie in the closed box.
    pub(crate) fn contains_local(&self, local: &[f64]) -> bool {
        let d = self.dim();
        local[..d - 1].iter().all(|v| v.abs() <= self.half_xy) && local[d - 1].abs() <= self.half_t
    }

    /// Multilinear interpolation of nodal `values` at local coordinates.
    pub(crate) fn interpolate(&self, values: &[f64], local: &[f64]) -> f64 {
        let d = self.dim();
        let mut base: SmallVec<[usize; 5]> = SmallVec::new();
        let mut frac: SmallVec<[f64; 5]> = SmallVec::new();
        for (a, &v) in local.iter().enumerate().take(d) {
            let (half, h, count) = if a + 1 == d {
                (self.half_t, self.h_t, self.n_t)
            } else {
                (self.half_xy, self.h, self.n_xy)
            };
            let s = ((v + half) / h).clamp(0.0, (count - 1) as f64);
            let i = (s.floor() as usize).min(count - 2);
            base.push(i);
            frac.push(s - i as f64);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx: SmallVec<[usize; 5]> = SmallVec::new();
            for a in 0..d {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx.push(base[a] + bit);
            }
            if w == 0.0 {
                continue;
            }
            let mut col = 0;
            for &i in &idx[..d - 1] {
                col = col * self.n_xy + i;
            }
            acc += w * values[self.index(col, idx[d - 1])];
        }
        acc
    }
}

/// Nodal samples on a [`Grid`] together with a closed-form rule used for
/// every point outside the grid box.
#[derive(Clone)]
pub struct FieldWithExterior {
    grid: Arc<Grid>,
    values: Vec<f64>,
    exterior: Arc<dyn ScalarField>,
}

impl fmt::Debug for FieldWithExterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldWithExterior")
            .field("grid", &self.grid)
            .field("nodes", &self.values.len())
            .finish()
    }
}

impl FieldWithExterior {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, exterior: Arc<dyn ScalarField>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if exterior.dim() != grid.n() {
            return Err(Error::domain("exterior rule lives on a different group"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite nodal value"));
        }
        Ok(FieldWithExterior { grid, values, exterior })
    }

    /// Samples `u` at every node and keeps it as the exterior rule.
    pub fn sample(grid: Arc<Grid>, u: Arc<dyn ScalarField>) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| u.eval(&grid.to_physical(&grid.local_coords(i))))
            .collect();
        Self::new(grid, values, u)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &Arc<dyn ScalarField> {
        &self.exterior
    }

    pub fn node_value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Same grid and exterior rule with new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.exterior.clone())
    }

    pub fn node_max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn node_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl ScalarField for FieldWithExterior {
    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn eval(&self, coords: &[f64]) -> f64 {
        let local = self.grid.to_local(coords);
        if self.grid.contains_local(&local) {
            self.grid.interpolate(&self.values, &local)
        } else {
            self.exterior.eval(coords)
        }
    }

    /// Central differences with the grid spacings as steps.
    fn hessian(&self, coords: &[f64]) -> Option<DMatrix<f64>> {
        let steps: Vec<f64> = (0..self.grid.dim()).map(|a| self.grid.spacing(a)).collect();
        Some(fd_hessian(|p| self.eval(p), coords, &steps))
    }

    fn gradient(&self, coords: &[f64]) -> Option<DVector<f64>> {
        let d = self.grid.dim();
        let mut buf = coords.to_vec();
        Some(DVector::from_fn(d, |a, _| {
            let h = self.grid.spacing(a);
            buf[a] = coords[a] + h;
            let fp = self.eval(&buf);
            buf[a] = coords[a] - h;
            let fm = self.eval(&buf);
            buf[a] = coords[a];
            (fp - fm) / (2.0 * h)
        }))
    }

    fn sup_abs(&self) -> Option<f64> {
        let ext = self.exterior.sup_abs()?;
        Some(self.values.iter().fold(ext, |m, v| m.max(v.abs())))
    }
}
