//! Quadrature rules in gauge-polar coordinates.
//!
//! A point of the unit gauge sphere is written with a polar angle
//! `ψ ∈ [0, π]` and a direction `ω ∈ S^{2N−1}` as
//!
//! ```text
//! z = sin ψ · ω,    t = cos ψ · √(1 + sin² ψ),
//! ```
//!
//! so that `|z|⁴ + t² = 1`. Lebesgue measure factors as
//! `dη = r^{Q−1} · 2 sin^{2N−1}ψ / √(1 + sin²ψ) dr dψ dω`, smooth in ψ.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use statrs::function::beta::beta;
use statrs::function::gamma::gamma;

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(m).expect("rule order must be positive"));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Surface measure of the Euclidean unit sphere `S^{2N−1}`.
pub fn euclidean_sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32) / gamma(n as f64)
}

/// `∫_{|η|=1} dσ_gauge`, i.e. `Q · |B_1|`.
pub fn gauge_sphere_measure(n: usize) -> f64 {
    euclidean_sphere_area(n) * beta(0.5, n as f64 / 2.0)
}

/// Angular moment `∫_{|η|=1} |z|² dσ_gauge`.
pub fn gauge_moment_z(n: usize) -> f64 {
    euclidean_sphere_area(n) * beta(0.5, (n as f64 + 1.0) / 2.0)
}

/// Angular moment `∫_{|η|=1} t² dσ_gauge`.
pub fn gauge_moment_t(n: usize) -> f64 {
    euclidean_sphere_area(n) * beta(1.5, n as f64 / 2.0)
}

/// Lebesgue measure of the unit Korányi ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    gauge_sphere_measure(n) / (2 * n + 2) as f64
}

/// A rule on `S^{2N−1}` split so that the sign of `ω_1` is constant on
/// each half: `(ω, weight, ω_1 > 0)`.
fn direction_rule(n: usize, per_half: usize) -> Vec<(Vec<f64>, f64, bool)> {
    let m = 2 * n;
    let halves = |lo: f64, hi: f64| {
        let mid = 0.5 * (lo + hi);
        let mut v = gauss_legendre(per_half, lo, mid);
        v.extend(gauss_legendre(per_half, mid, hi));
        v
    };
    if m == 2 {
        let mut out = Vec::with_capacity(2 * per_half);
        for (theta, w) in gauss_legendre(per_half, -PI / 2.0, PI / 2.0) {
            out.push((vec![theta.cos(), theta.sin()], w, true));
        }
        for (theta, w) in gauss_legendre(per_half, PI / 2.0, 1.5 * PI) {
            out.push((vec![theta.cos(), theta.sin()], w, false));
        }
        return out;
    }
    // Hyperspherical angles θ_1..θ_{m−2} ∈ [0, π], φ ∈ [0, 2π).
    let polar = halves(0.0, PI);
    let azimuth = halves(0.0, 2.0 * PI);
    let mut out = Vec::new();
    let mut idx = vec![0usize; m - 2];
    loop {
        for &(phi, wphi) in &azimuth {
            let mut omega = vec![0.0; m];
            let mut w = wphi;
            let mut prod = 1.0;
            for (j, &i) in idx.iter().enumerate() {
                let (th, wt) = polar[i];
                omega[j] = prod * th.cos();
                w *= wt * th.sin().powi((m - 2 - j) as i32);
                prod *= th.sin();
            }
            omega[m - 2] = prod * phi.cos();
            omega[m - 1] = prod * phi.sin();
            let positive = idx[0] < per_half;
            out.push((omega, w, positive));
        }
        let mut j = m - 3;
        loop {
            idx[j] += 1;
            if idx[j] < polar.len() {
                break;
            }
            idx[j] = 0;
            if j == 0 {
                return out;
            }
            j -= 1;
        }
    }
}

/// Points on the unit gauge sphere with surface weights.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub(crate) dim: usize,
    pub(crate) points: Vec<f64>,
    pub(crate) weights: Vec<f64>,
    pub(crate) x1_positive: Vec<bool>,
}

impl SphereRule {
    /// Upper hemisphere `t ≥ 0` when `hemisphere`, the full sphere otherwise.
    pub fn new(n: usize, polar_nodes: usize, azimuthal_nodes: usize, hemisphere: bool) -> Self {
        let dim = 2 * n + 1;
        let mut psi = gauss_legendre(polar_nodes, 0.0, PI / 2.0);
        if !hemisphere {
            psi.extend(gauss_legendre(polar_nodes, PI / 2.0, PI));
        }
        let dirs = direction_rule(n, azimuthal_nodes);
        let mut rule = SphereRule {
            dim,
            points: Vec::with_capacity(psi.len() * dirs.len() * dim),
            weights: Vec::with_capacity(psi.len() * dirs.len()),
            x1_positive: Vec::with_capacity(psi.len() * dirs.len()),
        };
        for &(p, wp) in &psi {
            let (sp, cp) = p.sin_cos();
            let root = (1.0 + sp * sp).sqrt();
            let radial_w = 2.0 * sp.powi(2 * n as i32 - 1) / root * wp;
            for (omega, wo, pos) in &dirs {
                rule.points.extend(omega.iter().map(|o| sp * o));
                rule.points.push(cp * root);
                rule.weights.push(radial_w * wo);
                rule.x1_positive.push(*pos);
            }
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Radial shell `[lo, hi]` with nodes `(r, w)` where `w` already carries the
/// kernel factor, so that `Σ w F(r) ≈ ∫ F(r) r^{−1−2s} dr`.
#[derive(Clone, Debug)]
pub struct RadialShell {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<(f64, f64)>,
}

/// Geometric shells from `r0` to `r_inf`, each break point in `breaks`
/// falling on a shell boundary.
pub fn radial_shells(r0: f64, r_inf: f64, per_octave: usize, nodes: usize, s: f64, breaks: &[f64]) -> Vec<RadialShell> {
    let mut cuts: Vec<f64> = vec![r0, r_inf];
    cuts.extend(breaks.iter().copied().filter(|&b| b > r0 && b < r_inf));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut shells = Vec::new();
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let pieces = (((b / a).log2() * per_octave as f64).ceil() as usize).max(1);
        let ratio = (b / a).powf(1.0 / pieces as f64);
        let mut lo = a;
        for k in 0..pieces {
            let hi = if k + 1 == pieces { b } else { lo * ratio };
            let nodes = gauss_legendre(nodes, lo.ln(), hi.ln())
                .into_iter()
                .map(|(v, w)| {
                    let r = v.exp();
                    (r, w * r.powf(-2.0 * s))
                })
                .collect();
            shells.push(RadialShell { lo, hi, nodes });
            lo = hi;
        }
    }
    shells
}

/// Pairwise summation in a fixed order, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}
