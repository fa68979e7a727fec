//! The fractional sub-Laplacian
//!
//! ```text
//! (−Δ_ℍ)^s u(ξ) = −(c/2) ∫ (u(ξ∘η) + u(ξ∘η⁻¹) − 2u(ξ)) |η|^{−Q−2s} dη
//! ```
//!
//! evaluated by gauge-polar quadrature over geometric shells
//! `r₀ ≤ |η| ≤ R∞`, a closed-form second-order correction on `|η| < r₀`
//! and a certified bound for the discarded tail `|η| > R∞`.

pub mod rules;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hcalculus::{conjugate_by_sigma, euclidean_gradient, euclidean_hessian, sigma_coords, ScalarField};
use crate::hgroup::GroupPoint;
use crate::pucci::Ellipticity;

pub use rules::{
    gauge_moment_t, gauge_moment_z, gauge_sphere_measure, pairwise_sum, unit_ball_volume, RadialShell,
    SphereRule,
};

/// Every scalar parameter of `L u = α M⁺(D²_ℍ u) − β (−Δ_ℍ)^s u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct OperatorParams {
    alpha: f64,
    beta: f64,
    ellipticity: Ellipticity,
    s: f64,
    c_norm: f64,
    n: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    beta: f64,
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
    s: f64,
    #[serde(default = "one")]
    c_norm: f64,
    #[serde(default = "one_usize")]
    n: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl TryFrom<RawParams> for OperatorParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        OperatorParams::new(r.alpha, r.beta, r.lambda, r.big_lambda, r.s, r.c_norm, r.n)
    }
}

impl From<OperatorParams> for RawParams {
    fn from(p: OperatorParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            lambda: p.ellipticity.lambda(),
            big_lambda: p.ellipticity.big_lambda(),
            s: p.s,
            c_norm: p.c_norm,
            n: p.n,
        }
    }
}

impl OperatorParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64, big_lambda: f64, s: f64, c_norm: f64, n: usize) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::config("alpha", format!("must be ≥ 0 and finite, got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::config("beta", format!("must be > 0 and finite, got {beta}")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::config("s", format!("must lie in the open interval (0, 1), got {s}")));
        }
        if !(c_norm > 0.0) || !c_norm.is_finite() {
            return Err(Error::config("c_norm", format!("must be > 0 and finite, got {c_norm}")));
        }
        if n == 0 {
            return Err(Error::config("n", "must be a positive integer"));
        }
        let ellipticity = Ellipticity::new(lambda, big_lambda)?;
        Ok(OperatorParams { alpha, beta, ellipticity, s, c_norm, n })
    }

    /// α = β = 1, λ = 1, Λ = 2, s = 1/2, c = 1 on ℍ¹.
    pub fn desk_default() -> Self {
        OperatorParams::new(1.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1).expect("valid defaults")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn ellipticity(&self) -> Ellipticity {
        self.ellipticity
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }
    pub fn n(&self) -> usize {
        self.n
    }
    /// Homogeneous dimension `Q = 2N + 2`.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self = OperatorParams::new(alpha, self.beta, self.ellipticity.lambda(), self.ellipticity.big_lambda(), self.s, self.c_norm, self.n)?;
        Ok(self)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        OperatorParams::new(self.alpha, beta, self.ellipticity.lambda(), self.ellipticity.big_lambda(), self.s, self.c_norm, self.n)
    }

    pub fn with_s(self, s: f64) -> Result<Self> {
        OperatorParams::new(self.alpha, self.beta, self.ellipticity.lambda(), self.ellipticity.big_lambda(), s, self.c_norm, self.n)
    }

    pub fn with_ellipticity(self, lambda: f64, big_lambda: f64) -> Result<Self> {
        OperatorParams::new(self.alpha, self.beta, lambda, big_lambda, self.s, self.c_norm, self.n)
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        OperatorParams::new(self.alpha, self.beta, self.ellipticity.lambda(), self.ellipticity.big_lambda(), self.s, self.c_norm, n)
    }
}

/// Resolution of the singular-integral quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// r₀: below this radius the closed-form quadratic correction is used.
    pub inner_radius: f64,
    /// R∞; `None` picks the smallest radius meeting `tail_tolerance`.
    pub tail_radius: Option<f64>,
    pub annuli_per_octave: usize,
    /// Gauss–Legendre nodes in `ln r` per shell.
    pub radial_nodes: usize,
    /// Gauss–Legendre nodes in the polar angle ψ per quarter turn.
    pub polar_nodes: usize,
    /// Gauss–Legendre nodes per half-turn of each direction angle.
    pub azimuthal_nodes: usize,
    /// `None` means `1e-4 · β · c · sup|u|`.
    pub tail_tolerance: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            inner_radius: 1.0 / 256.0,
            tail_radius: None,
            annuli_per_octave: 2,
            radial_nodes: 4,
            polar_nodes: 8,
            azimuthal_nodes: 8,
            tail_tolerance: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0) || !self.inner_radius.is_finite() {
            return Err(Error::config("quadrature.inner_radius", "must be positive"));
        }
        if let Some(r) = self.tail_radius {
            if !(r > self.inner_radius) || !r.is_finite() {
                return Err(Error::config("quadrature.tail_radius", "must exceed inner_radius"));
            }
        }
        for (name, v) in [
            ("quadrature.annuli_per_octave", self.annuli_per_octave),
            ("quadrature.radial_nodes", self.radial_nodes),
            ("quadrature.polar_nodes", self.polar_nodes),
            ("quadrature.azimuthal_nodes", self.azimuthal_nodes),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be a positive integer"));
            }
        }
        if let Some(t) = self.tail_tolerance {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::config("quadrature.tail_tolerance", "must be positive"));
            }
        }
        Ok(())
    }

    /// Resolves R∞ for a field whose oscillation is at most `osc_bound`.
    pub fn resolve_tail(&self, p: &OperatorParams, osc_bound: f64) -> Result<(f64, f64)> {
        self.validate()?;
        let sup_scale = 0.5 * osc_bound;
        let tol = self.tail_tolerance.unwrap_or(1e-4 * p.beta * p.c_norm * sup_scale);
        let floor = 2.0 * self.inner_radius;
        let radius = match self.tail_radius {
            Some(r) => r,
            None if osc_bound == 0.0 => floor.max(1.0),
            None => {
                let sigma = gauge_sphere_measure(p.n);
                let r = (p.c_norm * osc_bound * sigma / (2.0 * p.s * tol)).powf(1.0 / (2.0 * p.s));
                if !r.is_finite() {
                    return Err(Error::config(
                        "quadrature.tail_tolerance",
                        "tolerance too small: the required tail radius overflows",
                    ));
                }
                r.max(floor)
            }
        };
        let bound = tail_bound(radius, p, osc_bound);
        if bound > tol * (1.0 + 1e-12) {
            return Err(Error::config(
                "quadrature.tail_radius",
                format!("tail bound {bound:e} exceeds tail_tolerance {tol:e}"),
            ));
        }
        Ok((radius, bound))
    }
}

/// Certified bound on the discarded tail `|η| > R`:
/// `c · osc · σ_gauge · R^{−2s} / (2s)`, where `osc` bounds
/// `|u(ξ∘η) − u(ξ)|` (at most `2 sup|u|`).
pub fn tail_bound(r: f64, p: &OperatorParams, osc_bound: f64) -> f64 {
    if osc_bound == 0.0 {
        return 0.0;
    }
    p.c_norm * osc_bound * gauge_sphere_measure(p.n) * r.powf(-2.0 * p.s) / (2.0 * p.s)
}

/// Contribution of `|η| < r₀` for the quadratic Taylor model with
/// Euclidean Hessian `hess` at `coords`.
pub fn inner_correction_from_hessian(p: &OperatorParams, coords: &[f64], hess: &DMatrix<f64>, r0: f64) -> f64 {
    let n = p.n;
    let s = p.s;
    let trace_h = conjugate_by_sigma(n, coords, hess).trace();
    let h_tt = hess[(2 * n, 2 * n)];
    let kz = gauge_moment_z(n) / (2 * n) as f64 * r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let kt = gauge_moment_t(n) * r0.powf(4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    -0.5 * p.c_norm * (trace_h * kz + h_tt * kt)
}

/// Small-ball correction `−(c/2) ∫_{|η|<r₀} ⟨D²u(ξ) d(η), d(η)⟩ |η|^{−Q−2s} dη`.
pub fn inner_correction(u: &dyn ScalarField, xi: &GroupPoint, r0: f64, p: &OperatorParams) -> Result<f64> {
    check_dims(u, xi, p)?;
    if !(r0 > 0.0) {
        return Err(Error::domain("inner radius must be positive"));
    }
    let h = euclidean_hessian(u, xi.coords());
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite Hessian in inner correction"));
    }
    Ok(inner_correction_from_hessian(p, xi.coords(), &h, r0))
}

fn check_dims(u: &dyn ScalarField, xi: &GroupPoint, p: &OperatorParams) -> Result<()> {
    if u.dim() != p.n || xi.n() != p.n {
        return Err(Error::domain(format!(
            "dimension mismatch: params N = {}, field N = {}, point N = {}",
            p.n,
            u.dim(),
            xi.n()
        )));
    }
    Ok(())
}

/// Which half of η-space a one-sided integral covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfSpace {
    All,
    X1Positive,
    X1NonPositive,
}

impl HalfSpace {
    fn admits(self, positive: bool) -> bool {
        match self {
            HalfSpace::All => true,
            HalfSpace::X1Positive => positive,
            HalfSpace::X1NonPositive => !positive,
        }
    }
}

#[derive(Clone, Debug)]
struct ShellRange {
    lo: f64,
    hi: f64,
    start: usize,
    end: usize,
}

/// Tensor-product nodes `η = Φ_r(ω)` with kernel-weighted weights, so that
/// `Σ w F(η) ≈ ∫_{r₀<|η|<R∞} F(η) |η|^{−Q−2s} dη` (over the upper
/// half-space `t ≥ 0` for the hemisphere variant).
#[derive(Clone, Debug)]
pub struct KernelQuadrature {
    n: usize,
    inner_radius: f64,
    tail_radius: f64,
    shells: Vec<ShellRange>,
    points: Vec<f64>,
    weights: Vec<f64>,
    x1_positive: Vec<bool>,
}

impl KernelQuadrature {
    pub fn new(n: usize, s: f64, spec: &QuadratureSpec, tail_radius: f64, hemisphere: bool, breaks: &[f64]) -> Self {
        let sphere = SphereRule::new(n, spec.polar_nodes, spec.azimuthal_nodes, hemisphere);
        let shells = rules::radial_shells(
            spec.inner_radius,
            tail_radius,
            spec.annuli_per_octave,
            spec.radial_nodes,
            s,
            breaks,
        );
        let dim = 2 * n + 1;
        let count = shells.iter().map(|sh| sh.nodes.len()).sum::<usize>() * sphere.len();
        let mut q = KernelQuadrature {
            n,
            inner_radius: spec.inner_radius,
            tail_radius,
            shells: Vec::with_capacity(shells.len()),
            points: Vec::with_capacity(count * dim),
            weights: Vec::with_capacity(count),
            x1_positive: Vec::with_capacity(count),
        };
        for sh in &shells {
            let start = q.weights.len();
            for &(r, wr) in &sh.nodes {
                for i in 0..sphere.len() {
                    let dir = sphere.point(i);
                    q.points.extend(dir[..dim - 1].iter().map(|v| v * r));
                    q.points.push(dir[dim - 1] * r * r);
                    q.weights.push(wr * sphere.weight(i));
                    q.x1_positive.push(sphere.x1_positive[i]);
                }
            }
            q.shells.push(ShellRange { lo: sh.lo, hi: sh.hi, start, end: q.weights.len() });
        }
        q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = 2 * self.n + 1;
        &self.points[i * d..(i + 1) * d]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn x1_positive(&self, i: usize) -> bool {
        self.x1_positive[i]
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Shell boundaries `(lo, hi)` in increasing order.
    pub fn shell_bounds(&self) -> Vec<(f64, f64)> {
        self.shells.iter().map(|s| (s.lo, s.hi)).collect()
    }

    /// `Σ w F(η)` over the shells inside `[lo, hi]` and the chosen half-space.
    /// Shells are summed sequentially and combined pairwise, so the result
    /// does not depend on the thread count.
    pub fn integrate<F>(&self, lo: f64, hi: f64, half: HalfSpace, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let rel = 1e-12;
        let partial: Vec<f64> = self
            .shells
            .par_iter()
            .filter(|sh| sh.lo >= lo * (1.0 - rel) && sh.hi <= hi * (1.0 + rel))
            .map(|sh| {
                let mut acc = 0.0;
                for i in sh.start..sh.end {
                    if half.admits(self.x1_positive[i]) {
                        acc += self.weights[i] * f(self.point(i));
                    }
                }
                acc
            })
            .collect();
        pairwise_sum(&partial)
    }
}

/// `ξ ∘ η` and `ξ ∘ η⁻¹` written as `ξ ± d(η)`, with
/// `d(η) = (η_z, η_t + 2⟨y, η_x⟩ − 2⟨x, η_y⟩)`.
#[inline]
pub(crate) fn displacement(n: usize, xi: &[f64], eta: &[f64], out: &mut [f64]) {
    let mut twist = 0.0;
    for i in 0..n {
        twist += xi[n + i] * eta[i] - xi[i] * eta[n + i];
    }
    out[..2 * n].copy_from_slice(&eta[..2 * n]);
    out[2 * n] = eta[2 * n] + 2.0 * twist;
}

/// Per-component result of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FracEvaluation {
    pub value: f64,
    /// Shell quadrature part, `−c Σ w D(η)`.
    pub annular: f64,
    pub inner: f64,
    /// Certified bound on the discarded tail.
    pub tail_bound: f64,
    pub tail_radius: f64,
}

/// Reusable evaluator for a fixed parameter set and tail radius.
#[derive(Clone, Debug)]
pub struct FracSubLaplacian {
    params: OperatorParams,
    quad: KernelQuadrature,
    tail_bound: f64,
}

impl FracSubLaplacian {
    /// Builds the hemisphere rule for fields with oscillation ≤ `osc_bound`.
    pub fn new(params: OperatorParams, spec: &QuadratureSpec, osc_bound: f64) -> Result<Self> {
        let (radius, bound) = spec.resolve_tail(&params, osc_bound)?;
        let quad = KernelQuadrature::new(params.n, params.s, spec, radius, true, &[]);
        Ok(FracSubLaplacian { params, quad, tail_bound: bound })
    }

    /// Convenience constructor reading `sup|u|` from the field.
    pub fn for_field(params: OperatorParams, spec: &QuadratureSpec, u: &dyn ScalarField) -> Result<Self> {
        let sup = u
            .sup_abs()
            .ok_or_else(|| Error::domain("field has no finite bound; the nonlocal term is undefined"))?;
        Self::new(params, spec, 2.0 * sup)
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn quadrature(&self) -> &KernelQuadrature {
        &self.quad
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `(−Δ_ℍ)^s u(ξ)`.
    pub fn eval(&self, u: &dyn ScalarField, xi: &GroupPoint) -> Result<f64> {
        Ok(self.evaluate(u, xi)?.value)
    }

    pub fn evaluate(&self, u: &dyn ScalarField, xi: &GroupPoint) -> Result<FracEvaluation> {
        check_dims(u, xi, &self.params)?;
        let n = self.params.n;
        let c = xi.coords();
        let u0 = u.eval(c);
        if !u0.is_finite() {
            return Err(Error::domain(format!("field is not finite at {xi}")));
        }
        let sum = self.quad.integrate(0.0, f64::INFINITY, HalfSpace::All, |eta| {
            let mut d: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, 2 * n + 1);
            displacement(n, c, eta, &mut d);
            let mut plus: SmallVec<[f64; 5]> = SmallVec::from_slice(c);
            let mut minus: SmallVec<[f64; 5]> = SmallVec::from_slice(c);
            for k in 0..2 * n + 1 {
                plus[k] += d[k];
                minus[k] -= d[k];
            }
            u.eval(&plus) + u.eval(&minus) - 2.0 * u0
        });
        let annular = -self.params.c_norm * sum;
        let hess = euclidean_hessian(u, c);
        let inner = if hess.iter().all(|v| v.is_finite()) {
            inner_correction_from_hessian(&self.params, c, &hess, self.quad.inner_radius)
        } else {
            return Err(Error::domain(format!("non-finite Hessian at {xi}")));
        };
        let value = annular + inner;
        if !value.is_finite() {
            return Err(Error::domain(format!("non-finite fractional sub-Laplacian at {xi}")));
        }
        Ok(FracEvaluation {
            value,
            annular,
            inner,
            tail_bound: self.tail_bound,
            tail_radius: self.quad.tail_radius,
        })
    }
}

/// One-shot evaluation of `(−Δ_ℍ)^s u(ξ)`.
pub fn frac_sublap(u: &dyn ScalarField, xi: &GroupPoint, p: &OperatorParams, q: &QuadratureSpec) -> Result<f64> {
    FracSubLaplacian::for_field(*p, q, u)?.eval(u, xi)
}

/// The gradient-compensated one-sided form
/// `−c ∫ (u(ξ∘η) − u(ξ) − 𝟙_{|η|≤1} ⟨(∇_ℍu, ∂_t u), η⟩) |η|^{−Q−2s} dη`,
/// which equals the symmetric form for C² bounded `u`.
pub fn frac_sublap_one_sided(u: &dyn ScalarField, xi: &GroupPoint, p: &OperatorParams, q: &QuadratureSpec) -> Result<f64> {
    check_dims(u, xi, p)?;
    let sup = u
        .sup_abs()
        .ok_or_else(|| Error::domain("field has no finite bound; the nonlocal term is undefined"))?;
    let (radius, _) = q.resolve_tail(p, 2.0 * sup)?;
    let quad = KernelQuadrature::new(p.n, p.s, q, radius, false, &[1.0]);
    let n = p.n;
    let c = xi.coords();
    let u0 = u.eval(c);
    let grad = euclidean_gradient(u, c);
    let hgrad = sigma_coords(n, c) * &grad;
    let mut comp = hgrad.iter().copied().collect::<Vec<f64>>();
    comp.push(grad[2 * n]);
    let integrand = |eta: &[f64], compensate: bool| {
        let mut d: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, 2 * n + 1);
        displacement(n, c, eta, &mut d);
        let mut plus: SmallVec<[f64; 5]> = SmallVec::from_slice(c);
        for k in 0..2 * n + 1 {
            plus[k] += d[k];
        }
        let lin = if compensate {
            eta.iter().zip(&comp).map(|(a, b)| a * b).sum::<f64>()
        } else {
            0.0
        };
        u.eval(&plus) - u0 - lin
    };
    let near = quad.integrate(0.0, 1.0, HalfSpace::All, |eta| integrand(eta, true));
    let far = quad.integrate(1.0, f64::INFINITY, HalfSpace::All, |eta| integrand(eta, false));
    let hess = euclidean_hessian(u, c);
    let inner = inner_correction_from_hessian(p, c, &hess, q.inner_radius);
    Ok(-p.c_norm * pairwise_sum(&[near, far]) + inner)
}
