//! The discrete operator `L_h` on a [`Grid`].
//!
//! At interior node `i` with local coordinates `ℓ`,
//!
//! ```text
//! L_h u_i = tr(G_i D²_h u_i) + κ (Σ_e w_e u_{e} + E_i − W u_i),   κ = βc,
//! G_i     = α σ(ℓ)ᵀ A*_i σ(ℓ) + (κ/2)(k_z σ(ℓ)ᵀσ(ℓ) + k_t e_t e_tᵀ),
//! ```
//!
//! where `A*_i` maximises `tr(A σ D²_h u σᵀ)`, `D²_h` is the central
//! difference Hessian, the nonlocal targets `ℓ∘η^{±1}` are rounded to the
//! nearest node when they fall in the box, and `E_i` collects the exact
//! exterior data at targets outside it. The `k_z, k_t` term is the
//! closed-form contribution of `|η| < h`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fracsublap::{
    displacement, gauge_moment_t, gauge_moment_z, HalfSpace, KernelQuadrature, OperatorParams, QuadratureSpec,
};
use crate::grid::Grid;
use crate::hcalculus::{sigma_coords, ScalarField};
use crate::pucci::optimizer_matrix;

#[derive(Clone, Copy, Debug)]
struct Entry {
    tcol: u32,
    dk: i32,
    w: f64,
}

#[derive(Clone, Debug)]
struct Column {
    col: usize,
    k0: usize,
    k1: usize,
    slot0: usize,
    entries: Vec<Entry>,
    self_weight: f64,
}

/// Linearisation coefficients `G_i`, one `d×d` block per interior node.
#[derive(Clone, Debug)]
pub struct Policy {
    d: usize,
    g: Vec<f64>,
}

impl Policy {
    pub fn coefficient(&self, slot: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.d, self.d, &self.g[slot * self.d * self.d..(slot + 1) * self.d * self.d])
    }
}

/// Matrix-free `L_h` with precomputed nonlocal stencils.
#[derive(Clone, Debug)]
pub struct GridOperator {
    grid: Arc<Grid>,
    params: OperatorParams,
    interior: Vec<usize>,
    columns: Vec<Column>,
    exterior_const: Vec<f64>,
    exterior_values: Vec<f64>,
    total_weight: f64,
    kz: f64,
    kt: f64,
    strides: SmallVec<[usize; 5]>,
    tail_radius: f64,
    tail_bound: f64,
}

impl GridOperator {
    /// Builds the stencils for `grid` with `g` as exterior data.
    pub fn new(grid: Arc<Grid>, params: OperatorParams, spec: &QuadratureSpec, g: &dyn ScalarField) -> Result<Self> {
        let n = grid.n();
        if params.n() != n || g.dim() != n {
            return Err(Error::domain("grid, parameters and exterior data live on different groups"));
        }
        let sup = g
            .sup_abs()
            .ok_or_else(|| Error::domain("exterior data must be bounded"))?;
        let (tail_radius, tail_bound) = spec.resolve_tail(&params, 2.0 * sup)?;
        let quad = KernelQuadrature::new(n, params.s(), spec, tail_radius, true, &[]);
        let d = grid.dim();
        let n_t = grid.n_t();
        let n_xy = grid.n_xy();
        let kappa = params.beta() * params.c_norm();
        let r0 = spec.inner_radius;
        let s = params.s();
        let kz = gauge_moment_z(n) / (2 * n) as f64 * r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        let kt = gauge_moment_t(n) * r0.powf(4.0 - 2.0 * s) / (4.0 - 2.0 * s);
        let total_weight = 2.0 * quad.integrate(0.0, f64::INFINITY, HalfSpace::All, |_| 1.0);

        let mut strides: SmallVec<[usize; 5]> = SmallVec::from_elem(1, d);
        for a in (0..d - 1).rev() {
            strides[a] = if a + 2 == d { n_t } else { strides[a + 1] * n_xy };
        }

        let interior = grid.interior_indices();
        if interior.is_empty() {
            return Err(Error::domain("grid has no interior nodes"));
        }
        let mut columns = Vec::new();
        let mut slot = 0;
        let mut i = 0;
        while i < interior.len() {
            let (col, k0) = grid.split(interior[i]);
            let mut j = i;
            while j + 1 < interior.len() && interior[j + 1] == interior[j] + 1 && grid.split(interior[j + 1]).0 == col {
                j += 1;
            }
            let k1 = grid.split(interior[j]).1 + 1;
            columns.push(Column { col, k0, k1, slot0: slot, entries: Vec::new(), self_weight: 0.0 });
            slot += k1 - k0;
            i = j + 1;
        }
        if columns.windows(2).any(|w| w[0].col == w[1].col) {
            return Err(Error::domain("interior is not an interval in t along some column"));
        }

        let exterior_values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| g.eval(&grid.to_physical(&grid.local_coords(i))))
            .collect();
        if exterior_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("exterior data is not finite on the grid"));
        }

        let h = grid.h();
        let h_t = grid.h_t();
        let built: Vec<(Vec<Entry>, f64, Vec<f64>)> = columns
            .par_iter()
            .map(|c| {
                let base = grid.column_indices(c.col);
                let mut ell: SmallVec<[f64; 5]> = grid.local_coords(grid.index(c.col, 0));
                let mut raw: Vec<(u64, f64)> = Vec::new();
                let mut ext = vec![0.0; c.k1 - c.k0];
                let mut disp: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, d);
                let mut target: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, d);
                let mut idx: SmallVec<[i64; 4]> = SmallVec::from_elem(0, d - 1);
                for q in 0..quad.len() {
                    let w = quad.weight(q);
                    displacement(n, &ell, quad.point(q), &mut disp);
                    for sign in [1.0, -1.0] {
                        for a in 0..d - 1 {
                            idx[a] = base[a] as i64 + (sign * disp[a] / h).round() as i64;
                        }
                        let dk = (sign * disp[d - 1] / h_t).round() as i64;
                        let tcol = grid.column_of(&idx);
                        let in_t = |k: usize| {
                            let kk = k as i64 + dk;
                            kk >= 0 && kk < n_t as i64
                        };
                        if let Some(tc) = tcol {
                            let key = ((tc as u64) << 32) | ((dk + (1 << 31)) as u64);
                            raw.push((key, w));
                        }
                        for k in c.k0..c.k1 {
                            if tcol.is_none() || !in_t(k) {
                                ell[d - 1] = grid.axis_value(d - 1, k);
                                for a in 0..d {
                                    target[a] = ell[a] + sign * disp[a];
                                }
                                ext[k - c.k0] += w * g.eval(&grid.to_physical(&target));
                            }
                        }
                    }
                }
                raw.sort_by_key(|e| e.0);
                let mut entries: Vec<Entry> = Vec::new();
                let mut last = u64::MAX;
                for (key, w) in raw {
                    if key == last {
                        entries.last_mut().expect("entry").w += w;
                    } else {
                        entries.push(Entry {
                            tcol: (key >> 32) as u32,
                            dk: ((key & 0xffff_ffff) as i64 - (1 << 31)) as i32,
                            w,
                        });
                        last = key;
                    }
                }
                let self_weight = entries
                    .iter()
                    .filter(|e| e.tcol as usize == c.col && e.dk == 0)
                    .map(|e| e.w)
                    .sum();
                (entries, self_weight, ext)
            })
            .collect();
        let mut exterior_const = Vec::with_capacity(interior.len());
        for (c, (entries, sw, ext)) in columns.iter_mut().zip(built) {
            c.entries = entries;
            c.self_weight = sw;
            exterior_const.extend(ext.into_iter().map(|v| kappa * v));
        }

        Ok(GridOperator {
            grid,
            params,
            interior,
            columns,
            exterior_const,
            exterior_values,
            total_weight,
            kz,
            kt,
            strides,
            tail_radius,
            tail_bound,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    /// Interior node indices, in the order used by every interior vector.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// The exterior data sampled at every node.
    pub fn exterior_values(&self) -> &[f64] {
        &self.exterior_values
    }

    /// `W`: total kernel mass of the discretised nonlocal term.
    pub fn kernel_mass(&self) -> f64 {
        self.total_weight
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Number of merged nonlocal stencil entries over all columns.
    pub fn stencil_entries(&self) -> usize {
        self.columns.iter().map(|c| c.entries.len()).sum()
    }

    /// Full-grid vector equal to `g` outside the interior and `interior_values` inside.
    pub fn extend(&self, interior_values: &[f64]) -> Vec<f64> {
        let mut full = self.exterior_values.clone();
        for (&i, &v) in self.interior.iter().zip(interior_values) {
            full[i] = v;
        }
        full
    }

    /// Full-grid vector, zero outside the interior.
    pub(crate) fn extend_zero(&self, interior_values: &[f64], full: &mut [f64]) {
        for (&i, &v) in self.interior.iter().zip(interior_values) {
            full[i] = v;
        }
    }

    pub(crate) fn zero_full(&self) -> Vec<f64> {
        vec![0.0; self.grid.len()]
    }

    fn second_differences(&self, u: &[f64], i: usize) -> DMatrix<f64> {
        let d = self.grid.dim();
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            let sa = self.strides[a];
            let ha = self.grid.spacing(a);
            m[(a, a)] = (u[i + sa] - 2.0 * u[i] + u[i - sa]) / (ha * ha);
            for b in a + 1..d {
                let sb = self.strides[b];
                let hb = self.grid.spacing(b);
                let v = (u[i + sa + sb] - u[i + sa - sb] - u[i - sa + sb] + u[i - sa - sb]) / (4.0 * ha * hb);
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        m
    }

    fn static_part(&self, local: &[f64]) -> DMatrix<f64> {
        let n = self.grid.n();
        let d = self.grid.dim();
        let s = sigma_coords(n, local);
        let kappa = self.params.beta() * self.params.c_norm();
        let mut g = s.transpose() * &s * (0.5 * kappa * self.kz);
        g[(d - 1, d - 1)] += 0.5 * kappa * self.kt;
        g
    }

    /// Optimal policy `G_i` at every interior node for the full-grid field `u`.
    pub fn policy(&self, u: &[f64]) -> Result<Policy> {
        let d = self.grid.dim();
        let n = self.grid.n();
        let e = self.params.ellipticity();
        let alpha = self.params.alpha();
        let blocks: Vec<Vec<f64>> = self
            .interior
            .par_iter()
            .map(|&i| {
                let local = self.grid.local_coords(i);
                let mut g = self.static_part(&local);
                if alpha > 0.0 {
                    let s = sigma_coords(n, &local);
                    let hess = self.second_differences(u, i);
                    let hh = &s * hess * s.transpose();
                    let hh = (&hh + hh.transpose()) * 0.5;
                    let a = optimizer_matrix(&hh, e)?;
                    g += s.transpose() * a * &s * alpha;
                }
                Ok(g.as_slice().to_vec())
            })
            .collect::<Result<_>>()?;
        let mut g = Vec::with_capacity(self.interior.len() * d * d);
        for b in blocks {
            g.extend(b);
        }
        Ok(Policy { d, g })
    }

    /// `Σ_e w_e u_e − W u_i` at every interior node of the full-grid vector `u`.
    fn nonlocal(&self, u: &[f64], out: &mut [f64]) {
        let n_t = self.grid.n_t() as i64;
        let w_total = self.total_weight;
        let parts: Vec<Vec<f64>> = self
            .columns
            .par_iter()
            .map(|c| {
                let len = c.k1 - c.k0;
                let mut acc = vec![0.0; len];
                for e in &c.entries {
                    let lo = (c.k0 as i64).max(-(e.dk as i64));
                    let hi = (c.k1 as i64).min(n_t - e.dk as i64);
                    if lo >= hi {
                        continue;
                    }
                    let src = e.tcol as usize * n_t as usize;
                    let s0 = (src as i64 + lo + e.dk as i64) as usize;
                    let a0 = (lo - c.k0 as i64) as usize;
                    let m = (hi - lo) as usize;
                    for (a, v) in acc[a0..a0 + m].iter_mut().zip(&u[s0..s0 + m]) {
                        *a += e.w * v;
                    }
                }
                let own = c.col * n_t as usize;
                for (k, a) in acc.iter_mut().enumerate() {
                    *a -= w_total * u[own + c.k0 + k];
                }
                acc
            })
            .collect();
        for (c, p) in self.columns.iter().zip(parts) {
            out[c.slot0..c.slot0 + p.len()].copy_from_slice(&p);
        }
    }

    /// `tr(G_i D²_h u) + κ(Σ w u − W u_i)`, plus `κ E_i` when `with_exterior`.
    pub fn apply_linear(&self, policy: &Policy, u: &[f64], with_exterior: bool) -> Vec<f64> {
        let d = self.grid.dim();
        let kappa = self.params.beta() * self.params.c_norm();
        let mut out = vec![0.0; self.interior.len()];
        self.nonlocal(u, &mut out);
        out.par_iter_mut().enumerate().for_each(|(slot, o)| {
            let i = self.interior[slot];
            let g = &policy.g[slot * d * d..(slot + 1) * d * d];
            let mut local = 0.0;
            for a in 0..d {
                let sa = self.strides[a];
                let ha = self.grid.spacing(a);
                local += g[a * d + a] * (u[i + sa] - 2.0 * u[i] + u[i - sa]) / (ha * ha);
                for b in a + 1..d {
                    let sb = self.strides[b];
                    let hb = self.grid.spacing(b);
                    let v = (u[i + sa + sb] - u[i + sa - sb] - u[i - sa + sb] + u[i - sa - sb]) / (4.0 * ha * hb);
                    local += 2.0 * g[a * d + b] * v;
                }
            }
            let ext = if with_exterior { self.exterior_const[slot] } else { 0.0 };
            *o = local + kappa * *o + ext;
        });
        out
    }

    /// `L_h u` at every interior node of the full-grid vector `u`.
    pub fn apply_nonlinear(&self, u: &[f64]) -> Vec<f64> {
        match self.policy(u) {
            Ok(p) => self.apply_linear(&p, u, true),
            Err(_) => vec![f64::NAN; self.interior.len()],
        }
    }

    /// Diagonal of the linearised operator under `policy`.
    pub fn diagonal(&self, policy: &Policy) -> Vec<f64> {
        let d = self.grid.dim();
        let kappa = self.params.beta() * self.params.c_norm();
        let mut diag = vec![0.0; self.interior.len()];
        for c in &self.columns {
            for k in 0..c.k1 - c.k0 {
                let slot = c.slot0 + k;
                let g = &policy.g[slot * d * d..(slot + 1) * d * d];
                let local: f64 = (0..d)
                    .map(|a| {
                        let h = self.grid.spacing(a);
                        -2.0 * g[a * d + a] / (h * h)
                    })
                    .sum();
                diag[slot] = local + kappa * (c.self_weight - self.total_weight);
            }
        }
        diag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::hcalculus::SmoothFn;
    use crate::hgroup::GaugeBall;

    fn small_grid() -> Arc<Grid> {
        let ball = GaugeBall::centered(1, 1.0).unwrap();
        Arc::new(Grid::for_ball(&ball, 9, 17).unwrap())
    }

    fn coarse_spec(grid: &Grid) -> QuadratureSpec {
        QuadratureSpec {
            inner_radius: grid.h(),
            annuli_per_octave: 1,
            radial_nodes: 2,
            polar_nodes: 4,
            azimuthal_nodes: 4,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let grid = small_grid();
        let g = SmoothFn::constant(1, 7.0);
        let op = GridOperator::new(grid.clone(), OperatorParams::desk_default(), &coarse_spec(&grid), &g).unwrap();
        let u = vec![7.0; grid.len()];
        for v in op.apply_nonlinear(&u) {
            assert!(v.abs() < 1e-9 * op.kernel_mass() * 7.0, "{v}");
        }
    }

    #[test]
    fn linear_apply_matches_nonlinear_and_diagonal() {
        let grid = small_grid();
        let g = functions::parse("tanh_x:1", 1).unwrap();
        let op = GridOperator::new(grid.clone(), OperatorParams::desk_default(), &coarse_spec(&grid), &g).unwrap();
        let u = op.exterior_values().to_vec();
        let pol = op.policy(&u).unwrap();
        let a = op.apply_linear(&pol, &u, true);
        let b = op.apply_nonlinear(&u);
        assert_eq!(a, b);
        // Unit vectors recover the diagonal.
        let diag = op.diagonal(&pol);
        let mut e = op.zero_full();
        let slot = op.interior().len() / 2;
        e[op.interior()[slot]] = 1.0;
        let col = op.apply_linear(&pol, &e, false);
        assert!((col[slot] - diag[slot]).abs() < 1e-9 * diag[slot].abs());
    }
}
