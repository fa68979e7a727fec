//! Sup- and inf-convolutions with the quartic gauge kernel over grid nodes:
//!
//! ```text
//! u^ε(ξ) = max_η [u(η) − |η⁻¹∘ξ|⁴/ε],    u_ε(ξ) = min_η [u(η) + |η⁻¹∘ξ|⁴/ε].
//! ```
//!
//! Only nodes with `|η⁻¹∘ξ|⁴ ≤ ε osc u` can beat `η = ξ`, so the search is
//! restricted to that window.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::grid::{FieldWithExterior, Grid};
use crate::hcalculus::ScalarField;
use crate::hgroup::{compose_coords, gauge_quartic_coords};

/// Result of a convolution together with the maximiser of every node.
#[derive(Clone, Debug)]
pub struct Convolved {
    pub field: FieldWithExterior,
    /// Node index of the maximiser (minimiser for the inf-convolution).
    pub argmax: Vec<usize>,
    /// `ε · osc u`, the admissible range of `|η⁻¹∘ξ|⁴`.
    pub window: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProximityCheck {
    /// `max_ξ |η*⁻¹∘ξ|⁴`.
    pub worst_quartic: f64,
    pub window: f64,
    pub holds: bool,
}

impl Convolved {
    /// Checks `|η*⁻¹∘ξ|⁴ ≤ ε osc u` at every node.
    pub fn proximity(&self) -> ProximityCheck {
        let grid = self.field.grid();
        let worst = self
            .argmax
            .par_iter()
            .enumerate()
            .map(|(i, &j)| quartic_distance(grid, i, j))
            .reduce(|| 0.0, f64::max);
        ProximityCheck { worst_quartic: worst, window: self.window, holds: worst <= self.window }
    }
}

fn quartic_distance(grid: &Grid, i: usize, j: usize) -> f64 {
    let a = grid.local_coords(i);
    let b = grid.local_coords(j);
    let inv: SmallVec<[f64; 5]> = b.iter().map(|v| -v).collect();
    gauge_quartic_coords(&compose_coords(grid.n(), &inv, &a))
}

/// Windowed max of `sign·u(η) − |η⁻¹∘ℓ|⁴/ε` over nodes, `ℓ` in local coordinates.
fn windowed_best(grid: &Grid, values: &[f64], sign: f64, eps: f64, window: f64, ell: &[f64]) -> Option<(usize, f64)> {
    let n = grid.n();
    let d = grid.dim();
    let rho = window.powf(0.25);
    let h = grid.h();
    let mut lo: SmallVec<[i64; 4]> = SmallVec::new();
    let mut hi: SmallVec<[i64; 4]> = SmallVec::new();
    for &v in &ell[..d - 1] {
        let s = (v + grid.half_xy()) / h;
        lo.push(((s - rho / h).ceil() as i64 - 1).max(0));
        hi.push(((s + rho / h).floor() as i64 + 1).min(grid.n_xy() as i64 - 1));
    }
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    let mut idx: SmallVec<[i64; 4]> = lo.clone();
    let mut eta: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, d);
    'columns: loop {
        let mut z4 = 0.0;
        for a in 0..d - 1 {
            eta[a] = grid.axis_value(a, idx[a] as usize);
            z4 += (ell[a] - eta[a]).powi(2);
        }
        z4 *= z4;
        if z4 <= window {
            // t-component of η⁻¹∘ℓ is ℓ_t − η_t + 2Σ(η_x ℓ_y − η_y ℓ_x).
            let mut tw = 0.0;
            for i in 0..n {
                tw += eta[i] * ell[n + i] - eta[n + i] * ell[i];
            }
            let centre = ell[d - 1] + 2.0 * tw;
            let span = (window - z4).max(0.0).sqrt();
            let k_lo = (((centre - span + grid.half_t()) / grid.h_t()).ceil() as i64 - 1).max(0);
            let k_hi = (((centre + span + grid.half_t()) / grid.h_t()).floor() as i64 + 1).min(grid.n_t() as i64 - 1);
            let col = grid.column_of(&idx).expect("in range");
            for k in k_lo..=k_hi {
                let tk = grid.axis_value(d - 1, k as usize);
                let dt = centre - tk;
                let q = z4 + dt * dt;
                if q > window {
                    continue;
                }
                let j = grid.index(col, k as usize);
                let v = sign * values[j] - q / eps;
                if best.is_none_or(|b| v > b.1) {
                    best = Some((j, v));
                }
            }
        }
        for a in (0..d - 1).rev() {
            if idx[a] < hi[a] {
                idx[a] += 1;
                continue 'columns;
            }
            idx[a] = lo[a];
        }
        break;
    }
    best
}

/// Exterior rule of a convolved field: the same windowed search at an
/// arbitrary point, also admitting the point itself through the source.
struct ConvolvedExterior {
    source: FieldWithExterior,
    sign: f64,
    eps: f64,
    window: f64,
}

impl ScalarField for ConvolvedExterior {
    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn eval(&self, coords: &[f64]) -> f64 {
        let grid = self.source.grid();
        let ell = grid.to_local(coords);
        let own = self.sign * self.source.eval(coords);
        let best = windowed_best(grid, self.source.values(), self.sign, self.eps, self.window, &ell)
            .map_or(own, |(_, v)| v.max(own));
        self.sign * best
    }

    fn sup_abs(&self) -> Option<f64> {
        self.source.sup_abs()
    }
}

fn convolve(u: &FieldWithExterior, eps: f64, sign: f64) -> Result<Convolved> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("ε must be positive, got {eps}")));
    }
    let grid = u.grid().clone();
    let values = u.values();
    let osc = u.node_max() - u.node_min();
    let window = eps * osc * (1.0 + 1e-12);
    let found: Vec<(usize, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let ell = grid.local_coords(i);
            windowed_best(&grid, values, sign, eps, window, &ell).unwrap_or((i, sign * values[i]))
        })
        .collect();
    let argmax = found.iter().map(|f| f.0).collect();
    let out: Vec<f64> = found.iter().map(|f| sign * f.1).collect();
    let exterior = ConvolvedExterior { source: u.clone(), sign, eps, window };
    let field = FieldWithExterior::new(grid, out, Arc::new(exterior))?;
    Ok(Convolved { field, argmax, window, eps })
}

/// `u^ε` with maximisers.
pub fn sup_convolution_detailed(u: &FieldWithExterior, eps: f64) -> Result<Convolved> {
    convolve(u, eps, 1.0)
}

/// `u_ε` with minimisers.
pub fn inf_convolution_detailed(u: &FieldWithExterior, eps: f64) -> Result<Convolved> {
    convolve(u, eps, -1.0)
}

pub fn sup_convolution(u: &FieldWithExterior, eps: f64) -> Result<FieldWithExterior> {
    Ok(convolve(u, eps, 1.0)?.field)
}

pub fn inf_convolution(u: &FieldWithExterior, eps: f64) -> Result<FieldWithExterior> {
    Ok(convolve(u, eps, -1.0)?.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::hcalculus::SmoothFn;
    use crate::hgroup::GaugeBall;

    fn sample(expr: &str, n_xy: usize, n_t: usize) -> FieldWithExterior {
        let ball = GaugeBall::centered(1, 1.0).unwrap();
        let grid = Arc::new(Grid::for_ball(&ball, n_xy, n_t).unwrap());
        FieldWithExterior::sample(grid, Arc::new(functions::parse(expr, 1).unwrap())).unwrap()
    }

    /// Exhaustive scan over every node.
    fn brute_sup(u: &FieldWithExterior, eps: f64) -> Vec<f64> {
        let g = u.grid();
        (0..g.len())
            .map(|i| {
                (0..g.len())
                    .map(|j| u.values()[j] - quartic_distance(g, i, j) / eps)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    #[test]
    fn window_matches_exhaustive_scan() {
        let ball = GaugeBall::centered(1, 1.0).unwrap();
        let grid = Arc::new(Grid::for_ball(&ball, 9, 17).unwrap());
        let u = FieldWithExterior::sample(
            grid,
            Arc::new(SmoothFn::new(1, |c| -gauge_quartic_coords(c)).with_sup_abs(100.0)),
        )
        .unwrap();
        for eps in [0.05, 0.5, 5.0] {
            let fast = sup_convolution(&u, eps).unwrap();
            assert_eq!(fast.values(), &brute_sup(&u, eps)[..], "eps={eps}");
        }
    }

    #[test]
    fn constants_are_fixed() {
        let u = sample("const:3", 9, 17);
        let c = sup_convolution(&u, 0.1).unwrap();
        assert!(c.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn duality_and_ordering() {
        let u = sample("tanh_x:2+gaussian_gauge:0.3", 9, 17);
        let neg = u.with_values(u.values().iter().map(|v| -v).collect()).unwrap();
        let inf = inf_convolution(&u, 0.05).unwrap();
        let sup_neg = sup_convolution(&neg, 0.05).unwrap();
        for (a, b) in inf.values().iter().zip(sup_neg.values()) {
            assert_eq!(*a, -b);
        }
        let sup = sup_convolution_detailed(&u, 0.05).unwrap();
        for ((lo, mid), hi) in inf.values().iter().zip(u.values()).zip(sup.field.values()) {
            assert!(lo <= mid && mid <= hi);
        }
        assert!(sup.proximity().holds);
        assert!(sup.field.eval(&[5.0, 0.0, 0.0]) >= u.eval(&[5.0, 0.0, 0.0]));
    }
}
