//! Dirichlet solver for `L u = f` in Ω, `u = g` in ℍ^N∖Ω.
//!
//! Two schemes share the discrete operator of [`discrete`]: the damped
//! fixed-point iteration `u ← u + τ (L_h u − f)` and policy iteration,
//! which re-linearises at the Pucci maximiser and solves each linear
//! problem with preconditioned BiCGSTAB.

pub mod discrete;
pub mod krylov;

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracsublap::{gauge_moment_t, gauge_moment_z, gauge_sphere_measure, OperatorParams, QuadratureSpec};
use crate::grid::{FieldWithExterior, Grid};
use crate::hcalculus::{sigma_coords, ScalarField, SmoothFn};
use crate::hgroup::{GaugeBall, GroupPoint};

pub use discrete::{GridOperator, Policy};
pub use krylov::{bicgstab, KrylovOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    PolicyIteration,
    Richardson,
}

/// `L u = f` in Ω, `u = g` outside.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub omega: GaugeBall,
    pub f: SmoothFn,
    pub g: SmoothFn,
    pub params: OperatorParams,
}

impl DirichletProblem {
    pub fn new(omega: GaugeBall, f: SmoothFn, g: SmoothFn, params: OperatorParams) -> Result<Self> {
        let n = params.n();
        if omega.n() != n || f.dim() != n || g.dim() != n {
            return Err(Error::domain("Ω, f, g and the parameters must live on the same group"));
        }
        if g.sup_abs().is_none() {
            return Err(Error::domain("exterior data g must be bounded (declare sup|g|)"));
        }
        Ok(DirichletProblem { omega, f, g, params })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub scheme: Scheme,
    /// Defaults to [`solver_quadrature`] of the grid.
    pub quadrature: Option<QuadratureSpec>,
    /// Relative tolerance of the inner linear solves (policy iteration).
    pub linear_tol: f64,
    pub linear_max_iter: usize,
    /// Fixed-point damping; defaults to [`damping_bound`].
    pub damping: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            scheme: Scheme::PolicyIteration,
            quadrature: None,
            linear_tol: 1e-4,
            linear_max_iter: 5000,
            damping: None,
        }
    }
}

/// Outcome of [`solve_dirichlet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final `sup |L_h u − f|` over interior nodes.
    pub residual_sup: f64,
    /// τ for the fixed-point scheme, last line-search step for policy iteration.
    pub damping: f64,
    pub converged: bool,
    pub scheme: Scheme,
    pub tolerance: f64,
    pub linear_iterations: usize,
    pub interior_nodes: usize,
    pub tail_radius: f64,
    /// Bound on the discarded kernel tail `|η| > tail_radius`.
    pub tail_bound: f64,
    pub residual_history: Vec<f64>,
}

/// Quadrature used by the solver: inner radius `h`, one shell per octave.
pub fn solver_quadrature(grid: &Grid) -> QuadratureSpec {
    QuadratureSpec {
        inner_radius: grid.h(),
        annuli_per_octave: 1,
        radial_nodes: 3,
        polar_nodes: 6,
        azimuthal_nodes: 6,
        ..QuadratureSpec::default()
    }
}

fn stencil_l1(grid: &Grid, g: &DMatrix<f64>) -> f64 {
    let d = grid.dim();
    let mut w = 0.0;
    for a in 0..d {
        let ha = grid.spacing(a);
        w += 4.0 * g[(a, a)].abs() / (ha * ha);
        for b in 0..d {
            if a != b {
                w += g[(a, b)].abs() / (ha * grid.spacing(b));
            }
        }
    }
    w
}

/// `τ = 1 / (α Λ w_σ + βc (2 W + w_inner))`, with `w_σ` the largest l1 norm
/// of the second-difference stencil of `tr(σᵀσ D²)` over the interior,
/// `W = σ_gauge h^{−2s}/(2s)` the kernel mass outside `B_h` and `w_inner`
/// the stencil l1 norm of the closed-form `B_h` term.
pub fn damping_bound(grid: &Grid, p: &OperatorParams) -> f64 {
    let n = grid.n();
    let d = grid.dim();
    let s = p.s();
    let r0 = grid.h();
    let kz = gauge_moment_z(n) / (2 * n) as f64 * r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let kt = gauge_moment_t(n) * r0.powf(4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    let mass = gauge_sphere_measure(n) * r0.powf(-2.0 * s) / (2.0 * s);
    let nodes: Vec<usize> = if grid.interior_count() > 0 { grid.interior_indices() } else { (0..grid.len()).collect() };
    let (w_sigma, w_inner) = nodes
        .par_iter()
        .map(|&i| {
            let sig = sigma_coords(n, &grid.local_coords(i));
            let ss = sig.transpose() * &sig;
            let mut inner = &ss * (0.5 * kz);
            inner[(d - 1, d - 1)] += 0.5 * kt;
            (stencil_l1(grid, &ss), stencil_l1(grid, &inner))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let kappa = p.beta() * p.c_norm();
    1.0 / (p.alpha() * p.ellipticity().big_lambda() * w_sigma + kappa * (2.0 * mass + w_inner))
}

/// Checks that the grid box contains Ω.
fn check_cover(grid: &Grid, omega: &GaugeBall) -> Result<()> {
    let l = grid.to_local(omega.center().coords());
    let r = omega.radius();
    let d = grid.dim();
    let z: f64 = l[..d - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    let xy_ok = l[..d - 1].iter().all(|v| v.abs() + r <= grid.half_xy() * (1.0 + 1e-12));
    let t_ok = l[d - 1].abs() + r * r + 2.0 * z * r <= grid.half_t() * (1.0 + 1e-12);
    if xy_ok && t_ok {
        Ok(())
    } else {
        Err(Error::domain("grid box does not cover Ω"))
    }
}

/// Constant initial guess: mean of the exterior data over exterior nodes
/// adjacent to the interior.
fn boundary_mean(grid: &Grid, op: &GridOperator) -> f64 {
    let d = grid.dim();
    let ext = op.exterior_values();
    let mut strides = vec![1usize; d];
    for a in (0..d - 1).rev() {
        strides[a] = if a + 2 == d { grid.n_t() } else { strides[a + 1] * grid.n_xy() };
    }
    let mask = grid.interior_mask();
    let mut vals = Vec::new();
    for i in 0..grid.len() {
        if mask[i] {
            continue;
        }
        let adjacent = (0..d).any(|a| {
            let sa = strides[a];
            (i >= sa && mask[i - sa]) || (i + sa < grid.len() && mask[i + sa])
        });
        if adjacent {
            vals.push(ext[i]);
        }
    }
    crate::fracsublap::pairwise_sum(&vals) / vals.len().max(1) as f64
}

/// Solves with the default [`SolverOptions`].
pub fn solve_dirichlet(prob: &DirichletProblem, grid: Grid, tol: f64, max_iter: usize) -> Result<(FieldWithExterior, SolveReport)> {
    solve_dirichlet_with(prob, grid, tol, max_iter, &SolverOptions::default())
}

pub fn solve_dirichlet_with(
    prob: &DirichletProblem,
    grid: Grid,
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
) -> Result<(FieldWithExterior, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::config("tol", "must be positive"));
    }
    if grid.n() != prob.params.n() {
        return Err(Error::domain("grid and problem live on different groups"));
    }
    check_cover(&grid, &prob.omega)?;
    let grid = Arc::new(grid.with_domain(&prob.omega));
    let spec = opts.quadrature.clone().unwrap_or_else(|| solver_quadrature(&grid));
    let op = GridOperator::new(grid.clone(), prob.params, &spec, &prob.g)?;
    let f: Vec<f64> = op.interior().par_iter().map(|&i| prob.f.value(&grid.point(i))).collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("f is not finite on Ω's nodes"));
    }
    let u0 = boundary_mean(&grid, &op);
    let mut u = vec![u0; op.interior().len()];
    let mut report = SolveReport {
        iterations: 0,
        residual_sup: f64::INFINITY,
        damping: 1.0,
        converged: false,
        scheme: opts.scheme,
        tolerance: tol,
        linear_iterations: 0,
        interior_nodes: op.interior().len(),
        tail_radius: op.tail_radius(),
        tail_bound: op.tail_bound(),
        residual_history: Vec::new(),
    };
    match opts.scheme {
        Scheme::Richardson => richardson(&op, &f, &mut u, tol, max_iter, opts, &mut report)?,
        Scheme::PolicyIteration => policy_iteration(&op, &f, &mut u, tol, max_iter, opts, &mut report)?,
    }
    let field = FieldWithExterior::new(grid, op.extend(&u), Arc::new(prob.g.clone()))?;
    Ok((field, report))
}

fn residual(op: &GridOperator, policy: &Policy, full: &[f64], f: &[f64]) -> Vec<f64> {
    let mut r = op.apply_linear(policy, full, true);
    r.iter_mut().zip(f).for_each(|(a, b)| *a -= b);
    r
}

fn nonfinite(report: &SolveReport, what: &str) -> Error {
    Error::Numerical { message: format!("non-finite {what}"), report: Some(Box::new(report.clone())) }
}

fn richardson(
    op: &GridOperator,
    f: &[f64],
    u: &mut [f64],
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
    report: &mut SolveReport,
) -> Result<()> {
    let tau = opts.damping.unwrap_or_else(|| damping_bound(op.grid(), op.params()));
    report.damping = tau;
    let mut checkpoint = f64::INFINITY;
    for it in 0..=max_iter {
        let full = op.extend(u);
        let pol = op.policy(&full).map_err(|_| nonfinite(report, "iterate"))?;
        let r = residual(op, &pol, &full, f);
        let rs = krylov::sup_norm(&r);
        report.iterations = it;
        report.residual_sup = rs;
        if !rs.is_finite() {
            return Err(nonfinite(report, "residual"));
        }
        if it % 100 == 0 {
            report.residual_history.push(rs);
            if rs > 10.0 * checkpoint {
                return Err(Error::Numerical {
                    message: format!("fixed-point iteration diverges: residual {rs:e} after {it} iterations"),
                    report: Some(Box::new(report.clone())),
                });
            }
            checkpoint = rs;
        }
        if rs < tol {
            report.converged = true;
            return Ok(());
        }
        if it == max_iter {
            break;
        }
        u.par_iter_mut().zip(&r).for_each(|(x, ri)| *x += tau * ri);
    }
    Ok(())
}

fn policy_iteration(
    op: &GridOperator,
    f: &[f64],
    u: &mut Vec<f64>,
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
    report: &mut SolveReport,
) -> Result<()> {
    let scratch = RefCell::new(op.zero_full());
    let mut stalls = 0;
    let mut full = op.extend(u);
    let mut pol = op.policy(&full).map_err(|_| nonfinite(report, "iterate"))?;
    let mut r = residual(op, &pol, &full, f);
    let mut rs = krylov::sup_norm(&r);
    for it in 0..=max_iter {
        report.iterations = it;
        report.residual_sup = rs;
        report.residual_history.push(rs);
        if !rs.is_finite() {
            return Err(nonfinite(report, "residual"));
        }
        if rs < tol {
            report.converged = true;
            return Ok(());
        }
        if it == max_iter || stalls >= 3 {
            break;
        }
        let diag = op.diagonal(&pol);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let eta = (0.1 * tol / rs).clamp(1e-10, opts.linear_tol);
        let apply = |v: &[f64], out: &mut [f64]| {
            let mut s = scratch.borrow_mut();
            op.extend_zero(v, &mut s);
            out.copy_from_slice(&op.apply_linear(&pol, &s, false));
        };
        let (delta, outcome) = bicgstab(apply, &diag, &rhs, eta, opts.linear_max_iter);
        report.linear_iterations += outcome.iterations;
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(nonfinite(report, "Newton step"));
        }
        let mut accepted = None;
        let mut best: Option<(f64, Vec<f64>, Policy, Vec<f64>, f64)> = None;
        for theta in [1.0, 0.5, 0.25, 0.125] {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + theta * b).collect();
            let cfull = op.extend(&cand);
            let Ok(cpol) = op.policy(&cfull) else { continue };
            let cr = residual(op, &cpol, &cfull, f);
            let crs = krylov::sup_norm(&cr);
            if !crs.is_finite() {
                continue;
            }
            if crs < rs {
                accepted = Some((theta, cand, cpol, cr, crs));
                break;
            }
            if best.as_ref().is_none_or(|b| crs < b.4) {
                best = Some((theta, cand, cpol, cr, crs));
            }
        }
        let (theta, cand, cpol, cr, crs) = match accepted {
            Some(a) => {
                stalls = 0;
                a
            }
            None => {
                stalls += 1;
                best.ok_or_else(|| nonfinite(report, "line search"))?
            }
        };
        report.damping = theta;
        *u = cand;
        full = op.extend(u);
        pol = cpol;
        r = cr;
        rs = crs;
    }
    let _ = full;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Sub,
    Super,
}

/// Worst pointwise violation of `L_h u ≥ f` (sub) or `L_h u ≤ f` (super).
#[derive(Clone, Debug, Serialize)]
pub struct ViscosityReport {
    pub side: Side,
    /// `max(0, max_i (f − L_h u))` for sub, mirrored for super.
    pub worst_violation: f64,
    pub worst_point: Option<GroupPoint>,
    pub nodes_checked: usize,
}

pub fn check_viscosity_inequality(
    u: &FieldWithExterior,
    f: &dyn ScalarField,
    p: &OperatorParams,
    q: &QuadratureSpec,
    side: Side,
) -> Result<ViscosityReport> {
    let grid = u.grid();
    let op = GridOperator::new(grid.clone(), *p, q, u.exterior().as_ref())?;
    let lu = op.apply_nonlinear(u.values());
    let mut worst = 0.0;
    let mut at = None;
    for (&i, l) in op.interior().iter().zip(lu) {
        let fi = f.value(&grid.point(i));
        let v = match side {
            Side::Sub => fi - l,
            Side::Super => l - fi,
        };
        if v.is_nan() {
            return Err(Error::domain("operator evaluation is not finite"));
        }
        if v > worst {
            worst = v;
            at = Some(i);
        }
    }
    Ok(ViscosityReport {
        side,
        worst_violation: worst,
        worst_point: at.map(|i| grid.point(i)),
        nodes_checked: op.interior().len(),
    })
}
