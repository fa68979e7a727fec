//! The explicit barrier `φ_h` and the search for a constant `C` with
//! `L φ_h ≤ −1` on a normalised ball.
//!
//! ```text
//! φ_h(ξ) = 2 − e^{−Cξ₁}                                   ξ₁ ≥ 0
//!        = ½ + ¼/(1 − Cξ₁) + ¼(sin 3Cξ₁ + cos √6 Cξ₁)      ξ₁ < 0
//! ```

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fracsublap::{
    gauge_moment_z, pairwise_sum, HalfSpace, KernelQuadrature, OperatorParams, QuadratureSpec,
};
use crate::hcalculus::SmoothFn;
use crate::hgroup::{compose_coords, GaugeBall, GroupPoint};
use crate::mixedop::MixedOperator;

const SQRT6: f64 = 2.449_489_742_783_178;

/// `φ_h` with constant `C > 0`; it depends on ξ₁ only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Barrier {
    c: f64,
}

/// Value and first two derivatives of the unit profile at `v`, one branch each.
fn positive_branch(v: f64) -> (f64, f64, f64) {
    let e = (-v).exp();
    (2.0 - e, e, -e)
}

fn negative_branch(v: f64) -> (f64, f64, f64) {
    let q = 1.0 / (1.0 - v);
    let (s3, c3) = (3.0 * v).sin_cos();
    let (s6, c6) = (SQRT6 * v).sin_cos();
    (
        0.5 + 0.25 * q + 0.25 * (s3 + c6),
        0.25 * q * q + 0.25 * (3.0 * c3 - SQRT6 * s6),
        0.5 * q * q * q + 0.25 * (-9.0 * s3 - 6.0 * c6),
    )
}

impl Barrier {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!("barrier constant must be positive, got {c}")));
        }
        Ok(Barrier { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `(φ, ∂_{ξ₁}φ, ∂²_{ξ₁}φ)` at `ξ₁ = x1`.
    pub fn profile(&self, x1: f64) -> (f64, f64, f64) {
        let v = self.c * x1;
        let (f, f1, f2) = if v >= 0.0 { positive_branch(v) } else { negative_branch(v) };
        (f, self.c * f1, self.c * self.c * f2)
    }

    pub fn value_at(&self, x1: f64) -> f64 {
        self.profile(x1).0
    }

    /// `sup |φ_h| ≤ 2`.
    pub fn sup_abs(&self) -> f64 {
        2.0
    }

    /// φ_h as a field on ℍ^N with exact derivatives.
    pub fn to_field(self, n: usize) -> SmoothFn {
        let d = 2 * n + 1;
        SmoothFn::new(n, move |c| self.value_at(c[0]))
            .with_gradient(move |c| {
                let mut g = DVector::zeros(d);
                g[0] = self.profile(c[0]).1;
                g
            })
            .with_hessian(move |c| {
                let mut h = DMatrix::zeros(d, d);
                h[(0, 0)] = self.profile(c[0]).2;
                h
            })
            .with_sup_abs(self.sup_abs())
            .named(format!("barrier:{}", self.c))
    }
}

pub fn barrier_eval(b: &Barrier, xi: &GroupPoint) -> f64 {
    b.value_at(xi.coords()[0])
}

/// Jumps of `(φ, ∂φ, ∂²φ)` across `ξ₁ = 0`, from the closed-form branches.
pub fn branch_match_defect(c: f64) -> (f64, f64, f64) {
    let (p0, p1, p2) = positive_branch(0.0);
    let (n0, n1, n2) = negative_branch(0.0);
    ((p0 - n0).abs(), c * (p1 - n1).abs(), c * c * (p2 - n2).abs())
}

/// Search settings for [`find_c`].
#[derive(Clone, Debug, Serialize)]
pub struct BarrierSearch {
    pub target: f64,
    pub c0: f64,
    pub c_max: f64,
    /// Relative width at which bisection stops.
    pub bisection_tol: f64,
    /// Required bound on `L_a · h_a` along each lattice axis.
    pub lipschitz_step: f64,
    /// Multiplier on the sampled Lipschitz estimates.
    pub safety: f64,
    /// Points per axis of the sampling lattice used to estimate Lipschitz constants.
    pub probe_points: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for BarrierSearch {
    fn default() -> Self {
        BarrierSearch {
            target: -1.0,
            c0: 1.0,
            c_max: 1024.0,
            bisection_tol: 1e-2,
            lipschitz_step: 0.1,
            safety: 2.0,
            probe_points: 5,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Lattice certificate for `max_Ω L φ_h`.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeCertificate {
    pub c: f64,
    /// Lattice maximum plus the Lipschitz margin.
    pub certified_max: f64,
    pub lattice_max: f64,
    pub margin: f64,
    pub lattice_points: usize,
    pub lipschitz: Vec<f64>,
    pub spacing: Vec<f64>,
    pub argmax: GroupPoint,
}

/// Outcome of [`find_c`].
#[derive(Clone, Debug, Serialize)]
pub struct BarrierResult {
    pub c: f64,
    pub certificate: LatticeCertificate,
    /// Every `(C, certified max)` pair visited, in order.
    pub trace: Vec<(f64, f64)>,
}

fn check_normalised(p: &OperatorParams, omega: &GaugeBall) -> Result<()> {
    if omega.n() != p.n() {
        return Err(Error::domain("domain and parameters live on different groups"));
    }
    let c = omega.center().coords();
    if c[0] - omega.radius() < 0.0 {
        return Err(Error::domain(format!(
            "Ω must satisfy ξ₁ ≥ 0 (centre x₁ = {} < radius {})",
            c[0],
            omega.radius()
        )));
    }
    Ok(())
}

/// Lattice nodes covering the local box of `omega`, mapped to physical points.
fn lattice(omega: &GaugeBall, counts: &[usize]) -> Vec<GroupPoint> {
    let n = omega.n();
    let d = 2 * n + 1;
    let r = omega.radius();
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut id| {
            let mut local: SmallVec<[f64; 5]> = SmallVec::from_elem(0.0, d);
            for a in (0..d).rev() {
                let m = counts[a];
                let i = id % m;
                id /= m;
                let half = if a + 1 == d { r * r } else { r };
                local[a] = if m == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (m - 1) as f64 };
            }
            GroupPoint::from_raw(n, compose_coords(n, omega.center().coords(), &local))
        })
        .collect()
}

fn lattice_values(op: &MixedOperator, phi: &SmoothFn, points: &[GroupPoint]) -> Result<Vec<f64>> {
    points.par_iter().map(|x| op.eval(phi, x)).collect()
}

/// Certified upper bound for `L φ_h` over Ω: a lattice over Ω's local box
/// whose per-axis spacing keeps `L_a · h_a` below the requested step.
pub fn certify(p: &OperatorParams, omega: &GaugeBall, c: f64, search: &BarrierSearch) -> Result<LatticeCertificate> {
    check_normalised(p, omega)?;
    let barrier = Barrier::new(c)?;
    let phi = barrier.to_field(p.n());
    let op = MixedOperator::new(*p, &search.quadrature, 2.0 * barrier.sup_abs())?;
    let d = 2 * p.n() + 1;
    let r = omega.radius();
    let widths: Vec<f64> = (0..d).map(|a| if a + 1 == d { 2.0 * r * r } else { 2.0 * r }).collect();

    let m = search.probe_points.max(2);
    let probe_counts = vec![m; d];
    let probe = lattice(omega, &probe_counts);
    let pv = lattice_values(&op, &phi, &probe)?;
    let mut lipschitz = vec![0.0f64; d];
    let mut stride = 1;
    for a in (0..d).rev() {
        let h = widths[a] / (m - 1) as f64;
        for (id, &v) in pv.iter().enumerate() {
            if (id / stride) % m + 1 < m {
                let slope = (pv[id + stride] - v).abs() / h;
                lipschitz[a] = lipschitz[a].max(slope);
            }
        }
        stride *= m;
    }
    for l in &mut lipschitz {
        *l = *l * search.safety + 1e-9;
    }

    let counts: Vec<usize> = (0..d)
        .map(|a| ((widths[a] * lipschitz[a] / search.lipschitz_step).ceil() as usize + 1).max(2))
        .collect();
    let spacing: Vec<f64> = (0..d).map(|a| widths[a] / (counts[a] - 1) as f64).collect();
    let points = lattice(omega, &counts);
    let values = lattice_values(&op, &phi, &points)?;
    let (imax, lattice_max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let margin: f64 = (0..d).map(|a| lipschitz[a] * spacing[a] / 2.0).sum();
    Ok(LatticeCertificate {
        c,
        certified_max: lattice_max + margin,
        lattice_max,
        margin,
        lattice_points: points.len(),
        lipschitz,
        spacing,
        argmax: points[imax].clone(),
    })
}

/// Smallest `C` on the doubling-then-bisection path from `C₀` whose
/// certificate satisfies `max_Ω L φ_h ≤ target`.
pub fn find_c(p: &OperatorParams, omega: &GaugeBall, search: &BarrierSearch) -> Result<BarrierResult> {
    check_normalised(p, omega)?;
    if !(search.c0 > 0.0) || !(search.c_max >= search.c0) {
        return Err(Error::config("barrier.c_max", "need 0 < c0 ≤ c_max"));
    }
    let mut trace = Vec::new();
    let mut c = search.c0;
    let mut best = certify(p, omega, c, search)?;
    trace.push((c, best.certified_max));
    let mut failed: Option<f64> = None;
    while best.certified_max > search.target {
        failed = Some(c);
        c *= 2.0;
        if c > search.c_max {
            return Err(Error::SearchExhausted(format!(
                "no C ≤ {} reaches L φ_h ≤ {}; best certified max {} at C = {}",
                search.c_max,
                search.target,
                trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min),
                trace.last().map(|t| t.0).unwrap_or(c)
            )));
        }
        best = certify(p, omega, c, search)?;
        trace.push((c, best.certified_max));
    }
    if let Some(mut lo) = failed {
        let mut hi = c;
        while hi / lo - 1.0 > search.bisection_tol {
            let mid = 0.5 * (lo + hi);
            let cert = certify(p, omega, mid, search)?;
            trace.push((mid, cert.certified_max));
            if cert.certified_max <= search.target {
                hi = mid;
                best = cert;
            } else {
                lo = mid;
            }
        }
        c = hi;
    }
    Ok(BarrierResult { c, certificate: best, trace })
}

/// The split of `L φ_h(ξ)` into the local term and five one-sided
/// integrals, with `κ = βc`:
///
/// * `t0 = α M⁺(D²_{ℍ,S} φ_h)`
/// * `t1 = κ ∫_{B_δ} (φ(ξ∘η) − φ(ξ) − η₁ ∂₁φ(ξ)) K`
/// * `t2 = κ ∫_{CB_δ ∩ {η₁ ≤ 0}} (φ(ξ∘η) − φ(ξ)) K`
/// * `t3 = κ ∫_{(B₁∖B_δ) ∩ {η₁ > 0}} (φ(ξ∘η) − φ(ξ)) K`
/// * `t4 = −κ ∫_{B₁∖B_δ} η₁ ∂₁φ(ξ) K` (zero by symmetry)
/// * `t5 = κ ∫_{CB₁ ∩ {η₁ > 0}} (φ(ξ∘η) − φ(ξ)) K`
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub point: GroupPoint,
    pub delta: f64,
    pub terms: [f64; 6],
    pub sum: f64,
    pub direct: f64,
    /// Per-shell values of `t1` and `t2`; each is ≤ 0 when `ξ₁ ≥ δ`.
    pub t1_shells: Vec<f64>,
    pub t2_shells: Vec<f64>,
}

/// Recomputes `L φ_h(ξ)` through the six-term split and directly.
pub fn decompose(p: &OperatorParams, q: &QuadratureSpec, b: &Barrier, omega: &GaugeBall, xi: &GroupPoint) -> Result<Decomposition> {
    check_normalised(p, omega)?;
    let delta = omega.radius().min(1.0);
    if !(q.inner_radius < delta) {
        return Err(Error::config("quadrature.inner_radius", "must be below δ = min(1, R)"));
    }
    let osc = 2.0 * b.sup_abs();
    let (tail, _) = q.resolve_tail(p, osc)?;
    let quad = KernelQuadrature::new(p.n(), p.s(), q, tail.max(2.0), false, &[delta, 1.0]);
    let kappa = p.beta() * p.c_norm();
    let x1 = xi.coords()[0];
    let (f0, f1, f2) = b.profile(x1);
    let e = p.ellipticity();
    let t0 = p.alpha() * if f2 >= 0.0 { e.big_lambda() * f2 } else { e.lambda() * f2 };

    let diff = |eta: &[f64]| b.value_at(x1 + eta[0]) - f0;
    let n = p.n();
    let kz = gauge_moment_z(n) / (2 * n) as f64 * q.inner_radius.powf(2.0 - 2.0 * p.s()) / (2.0 - 2.0 * p.s());
    let inner = 0.5 * f2 * kz;
    let mut t1_shells = Vec::new();
    let mut t2_shells = Vec::new();
    for (lo, hi) in quad.shell_bounds() {
        if hi <= delta * (1.0 + 1e-12) {
            t1_shells.push(kappa * quad.integrate(lo, hi, HalfSpace::All, |eta| diff(eta) - eta[0] * f1));
        } else {
            t2_shells.push(kappa * quad.integrate(lo, hi, HalfSpace::X1NonPositive, diff));
        }
    }
    let t1 = pairwise_sum(&t1_shells) + kappa * inner;
    let t2 = pairwise_sum(&t2_shells);
    let t3 = kappa * quad.integrate(delta, 1.0, HalfSpace::X1Positive, diff);
    let t4 = -kappa * quad.integrate(delta, 1.0, HalfSpace::All, |eta| eta[0] * f1);
    let t5 = kappa * quad.integrate(1.0f64.max(delta), f64::INFINITY, HalfSpace::X1Positive, diff);
    let terms = [t0, t1, t2, t3, t4, t5];
    let sum = pairwise_sum(&terms);
    let phi = b.to_field(n);
    let direct = MixedOperator::new(*p, q, osc)?.eval(&phi, xi)?;
    Ok(Decomposition { point: xi.clone(), delta, terms, sum, direct, t1_shells, t2_shells })
}
