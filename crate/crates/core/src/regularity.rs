//! Oscillation over dyadic gauge balls and a Hölder-exponent fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::FieldWithExterior;
use crate::hgroup::{GaugeBall, GroupPoint};

/// Nodes needed in a ball for its oscillation to enter the fit.
pub const MIN_FIT_NODES: usize = 8;

/// `(max − min, node count)` of `u` over the nodes inside `ball`.
fn scan(u: &FieldWithExterior, ball: &GaugeBall) -> (f64, usize) {
    let grid = u.grid();
    let (lo, hi, count) = (0..grid.len())
        .into_par_iter()
        .filter(|&i| ball.contains(&grid.point(i)))
        .map(|i| (u.values()[i], u.values()[i], 1usize))
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY, 0),
            |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2),
        );
    (if count == 0 { 0.0 } else { hi - lo }, count)
}

/// `max − min` of `u` over grid nodes in `ball`.
pub fn oscillation(u: &FieldWithExterior, ball: &GaugeBall) -> Result<f64> {
    let (osc, count) = scan(u, ball);
    if count < 2 {
        return Err(Error::domain(format!("ball contains {count} grid node(s); need at least 2")));
    }
    Ok(osc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub k: usize,
    pub radius: f64,
    pub osc: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub center: GroupPoint,
    pub entries: Vec<ProfileEntry>,
    /// Set when the grid stopped resolving the balls before `k_max`.
    pub warning: Option<String>,
}

impl Profile {
    pub fn is_non_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].osc <= w[0].osc)
    }
}

/// `osc` over `B_{2^{−k}}(0)` for `k = 0..=k_max`.
pub fn dyadic_profile(u: &FieldWithExterior, k_max: usize) -> Result<Profile> {
    dyadic_profile_at(u, &GroupPoint::origin(u.grid().n()), k_max)
}

/// As [`dyadic_profile`] with balls centred at `center`.
pub fn dyadic_profile_at(u: &FieldWithExterior, center: &GroupPoint, k_max: usize) -> Result<Profile> {
    let mut entries = Vec::new();
    let mut warning = None;
    for k in 0..=k_max {
        let radius = 0.5f64.powi(k as i32);
        let (osc, nodes) = scan(u, &GaugeBall::new(center.clone(), radius)?);
        if nodes < 2 {
            warning = Some(format!("resolution exhausted at k = {k} ({nodes} node(s)); profile truncated"));
            break;
        }
        entries.push(ProfileEntry { k, radius, osc, nodes });
    }
    if entries.is_empty() {
        return Err(Error::domain("the grid does not resolve B_1 around the centre"));
    }
    Ok(Profile { center: center.clone(), entries, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderFit {
    pub c_fit: f64,
    /// Least-squares decay exponent, clamped to `(0, 1]`.
    pub gamma_fit: f64,
    /// `1 − 2^{−γ}`.
    pub delta_fit: f64,
    pub constant_field: bool,
    /// Profile levels `k` that entered the fit.
    pub used: Vec<usize>,
}

/// Fits `osc_k ≈ C 2^{−γ k}` on entries with at least [`MIN_FIT_NODES`]
/// nodes and positive oscillation.
pub fn fit_holder(profile: &Profile) -> Result<HolderFit> {
    if profile.entries.iter().all(|e| e.osc == 0.0) {
        return Ok(HolderFit { c_fit: 0.0, gamma_fit: 1.0, delta_fit: 0.5, constant_field: true, used: vec![] });
    }
    let pts: Vec<(f64, f64, usize)> = profile
        .entries
        .iter()
        .filter(|e| e.nodes >= MIN_FIT_NODES && e.osc > 0.0)
        .map(|e| (e.k as f64 * std::f64::consts::LN_2, e.osc.ln(), e.k))
        .collect();
    if pts.len() < 3 {
        return Err(Error::domain(format!("{} usable profile entries; need at least 3", pts.len())));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let gamma = (-slope).clamp(1e-12, 1.0);
    Ok(HolderFit {
        c_fit: (my - slope * mx).exp(),
        gamma_fit: gamma,
        delta_fit: 1.0 - 2f64.powf(-gamma),
        constant_field: false,
        used: pts.iter().map(|p| p.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn sample(expr: &str, n_xy: usize, n_t: usize) -> FieldWithExterior {
        let ball = GaugeBall::centered(1, 1.0).unwrap();
        let grid = Arc::new(Grid::for_ball(&ball, n_xy, n_t).unwrap());
        FieldWithExterior::sample(grid, Arc::new(functions::parse(expr, 1).unwrap())).unwrap()
    }

    #[test]
    fn constant_profile_is_flagged() {
        let u = sample("const:2", 17, 33);
        let p = dyadic_profile(&u, 3).unwrap();
        assert!(p.entries.iter().all(|e| e.osc == 0.0));
        assert!(fit_holder(&p).unwrap().constant_field);
    }

    #[test]
    fn x1_oscillation_is_node_width() {
        let u = sample("x1", 17, 33);
        let ball = GaugeBall::centered(1, 0.5).unwrap();
        let grid = u.grid();
        let xs: Vec<f64> = (0..grid.len())
            .filter(|&i| ball.contains(&grid.point(i)))
            .map(|i| grid.point(i).coords()[0])
            .collect();
        let width = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(oscillation(&u, &ball).unwrap(), width);
        assert!((width - 0.75).abs() < 1e-12);
    }

    #[test]
    fn truncates_when_unresolved() {
        let u = sample("x1", 5, 9);
        let p = dyadic_profile(&u, 10).unwrap();
        assert!(p.warning.is_some());
        assert!(p.is_non_increasing());
    }
}
