//! Horizontal calculus on ℍ^N: the σ frame, horizontal gradients and
//! Hessians, and nested vector-field finite differences.
//!
//! The horizontal fields are `X_i = ∂_{x_i} + 2y_i ∂_t` and
//! `Y_i = ∂_{y_i} − 2x_i ∂_t`; stacked as rows they form
//! `σ(ξ) = [I 0 2y; 0 I −2x]`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hgroup::{compose_coords, GroupPoint};

/// A real function on ℍ^N, possibly with exact Euclidean derivatives.
///
/// `eval` receives the flat coordinate slice `[x.., y.., t]` so that hot
/// loops can avoid building [`GroupPoint`]s.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, coords: &[f64]) -> f64;

    fn value(&self, p: &GroupPoint) -> f64 {
        self.eval(p.coords())
    }

    /// Exact Euclidean gradient, if known.
    fn gradient(&self, _coords: &[f64]) -> Option<DVector<f64>> {
        None
    }

    /// Exact (or field-native) Euclidean Hessian, if known.
    fn hessian(&self, _coords: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Upper bound on `sup |u|` over all of ℍ^N; `None` means unbounded or unknown.
    fn sup_abs(&self) -> Option<f64> {
        None
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// Closed-form field built from closures.
#[derive(Clone)]
pub struct SmoothFn {
    n: usize,
    name: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
    hessian: Option<Arc<HessFn>>,
    sup_abs: Option<f64>,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("exact_gradient", &self.gradient.is_some())
            .field("exact_hessian", &self.hessian.is_some())
            .field("sup_abs", &self.sup_abs)
            .finish()
    }
}

impl SmoothFn {
    pub fn new(n: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        assert!(n > 0, "N must be positive");
        SmoothFn {
            n,
            name: String::from("anonymous"),
            value: Arc::new(value),
            gradient: None,
            hessian: None,
            sup_abs: None,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let d = 2 * n + 1;
        SmoothFn::new(n, move |_| c)
            .named(format!("const:{c}"))
            .with_gradient(move |_| DVector::zeros(d))
            .with_hessian(move |_| DMatrix::zeros(d, d))
            .with_sup_abs(c.abs())
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_sup_abs(mut self, bound: f64) -> Self {
        self.sup_abs = Some(bound);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_exact_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_exact_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    /// Drops the exact derivative evaluators, forcing finite differences.
    pub fn without_derivatives(mut self) -> Self {
        self.gradient = None;
        self.hessian = None;
        self
    }

    /// `ξ ↦ a·u(ξ) + b·v(ξ)`.
    pub fn linear_combination(a: f64, u: &SmoothFn, b: f64, v: &SmoothFn) -> Result<SmoothFn> {
        if u.n != v.n {
            return Err(Error::domain("linear combination of fields on different groups"));
        }
        let (fu, fv) = (u.value.clone(), v.value.clone());
        let mut out = SmoothFn::new(u.n, move |c| a * fu(c) + b * fv(c))
            .named(format!("{a}*{}+{b}*{}", u.name, v.name));
        if let (Some(gu), Some(gv)) = (u.gradient.clone(), v.gradient.clone()) {
            out = out.with_gradient(move |c| gu(c) * a + gv(c) * b);
        }
        if let (Some(hu), Some(hv)) = (u.hessian.clone(), v.hessian.clone()) {
            out = out.with_hessian(move |c| hu(c) * a + hv(c) * b);
        }
        if let (Some(su), Some(sv)) = (u.sup_abs, v.sup_abs) {
            out = out.with_sup_abs(a.abs() * su + b.abs() * sv);
        }
        Ok(out)
    }

    /// `ξ ↦ u(a ∘ ξ)`. Derivatives fall back to finite differences.
    pub fn left_translated(&self, a: &GroupPoint) -> Result<SmoothFn> {
        if a.n() != self.n {
            return Err(Error::domain("translation by a point of another group"));
        }
        let f = self.value.clone();
        let (n, shift) = (self.n, a.coords().to_vec());
        let mut out = SmoothFn::new(n, move |c| f(&compose_coords(n, &shift, c)))
            .named(format!("{}∘τ", self.name));
        out.sup_abs = self.sup_abs;
        Ok(out)
    }

    /// `ξ ↦ u(Φ_λ ξ)`. Exact derivatives are carried through the chain rule.
    pub fn dilated(&self, lambda: f64) -> Result<SmoothFn> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("dilation factor must be positive, got {lambda}")));
        }
        let n = self.n;
        let d = 2 * n + 1;
        let scale = move |c: &[f64]| -> Vec<f64> {
            let mut v = c.to_vec();
            for x in &mut v[..d - 1] {
                *x *= lambda;
            }
            v[d - 1] *= lambda * lambda;
            v
        };
        let jac: DVector<f64> =
            DVector::from_fn(d, |i, _| if i + 1 == d { lambda * lambda } else { lambda });
        let f = self.value.clone();
        let mut out = SmoothFn::new(n, move |c| f(&scale(c))).named(format!("{}∘Φ", self.name));
        if let Some(g) = self.gradient.clone() {
            let j = jac.clone();
            out = out.with_gradient(move |c| g(&scale(c)).component_mul(&j));
        }
        if let Some(h) = self.hessian.clone() {
            let j = jac.clone();
            out = out.with_hessian(move |c| {
                let mut m = h(&scale(c));
                for r in 0..d {
                    for q in 0..d {
                        m[(r, q)] *= j[r] * j[q];
                    }
                }
                m
            });
        }
        out.sup_abs = self.sup_abs;
        Ok(out)
    }
}

impl ScalarField for SmoothFn {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, coords: &[f64]) -> f64 {
        (self.value)(coords)
    }

    fn gradient(&self, coords: &[f64]) -> Option<DVector<f64>> {
        self.gradient.as_ref().map(|g| g(coords))
    }

    fn hessian(&self, coords: &[f64]) -> Option<DMatrix<f64>> {
        self.hessian.as_ref().map(|h| h(coords))
    }

    fn sup_abs(&self) -> Option<f64> {
        self.sup_abs
    }
}

/// σ(ξ), a 2N × (2N+1) matrix whose rows are the coefficient vectors of
/// `X_1..X_N, Y_1..Y_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaFrame {
    matrix: DMatrix<f64>,
}

impl SigmaFrame {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Symmetric 2N × 2N matrix `Sym(σ D²u σᵀ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalHessian {
    matrix: DMatrix<f64>,
}

impl HorizontalHessian {
    /// Wraps a square matrix after explicit symmetrisation.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::domain(format!(
                "horizontal Hessian must be 2N×2N, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite Hessian entry"));
        }
        Ok(HorizontalHessian { matrix: symmetrize(&m) })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sigma_at(p: &GroupPoint) -> SigmaFrame {
    SigmaFrame { matrix: sigma_coords(p.n(), p.coords()) }
}

pub(crate) fn sigma_coords(n: usize, c: &[f64]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n + 1);
    for i in 0..n {
        s[(i, i)] = 1.0;
        s[(i, 2 * n)] = 2.0 * c[n + i];
        s[(n + i, n + i)] = 1.0;
        s[(n + i, 2 * n)] = -2.0 * c[i];
    }
    s
}

/// `A = σᵀσ`, the (2N+1)×(2N+1) degenerate principal-symbol matrix.
pub fn degeneracy_matrix(p: &GroupPoint) -> DMatrix<f64> {
    let s = sigma_at(p).into_matrix();
    s.transpose() * s
}

fn first_step(c: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + c.abs())
}

fn second_step(c: f64) -> f64 {
    f64::EPSILON.powf(0.25) * (1.0 + c.abs())
}

/// Euclidean gradient: exact when available, otherwise central differences.
pub fn euclidean_gradient(u: &dyn ScalarField, c: &[f64]) -> DVector<f64> {
    if let Some(g) = u.gradient(c) {
        return g;
    }
    let d = c.len();
    let mut buf = c.to_vec();
    DVector::from_fn(d, |i, _| {
        let h = first_step(c[i]);
        buf[i] = c[i] + h;
        let fp = u.eval(&buf);
        buf[i] = c[i] - h;
        let fm = u.eval(&buf);
        buf[i] = c[i];
        (fp - fm) / (2.0 * h)
    })
}

/// Euclidean Hessian: exact when available, otherwise central differences.
pub fn euclidean_hessian(u: &dyn ScalarField, c: &[f64]) -> DMatrix<f64> {
    if let Some(h) = u.hessian(c) {
        return h;
    }
    let steps: Vec<f64> = c.iter().map(|&v| second_step(v)).collect();
    fd_hessian(|p| u.eval(p), c, &steps)
}

/// Central-difference Hessian with per-axis steps.
pub(crate) fn fd_hessian(f: impl Fn(&[f64]) -> f64, c: &[f64], steps: &[f64]) -> DMatrix<f64> {
    let d = c.len();
    let mut buf = c.to_vec();
    let f0 = f(c);
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let hi = steps[i];
        buf[i] = c[i] + hi;
        let fp = f(&buf);
        buf[i] = c[i] - hi;
        let fm = f(&buf);
        buf[i] = c[i];
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                buf[i] = c[i] + si * hi;
                buf[j] = c[j] + sj * hj;
                let v = f(&buf);
                buf[i] = c[i];
                buf[j] = c[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * hi * hj);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn check_finite(what: &str, v: impl IntoIterator<Item = f64>) -> Result<()> {
    if v.into_iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(format!("{what}: field evaluation produced a non-finite value")));
    }
    Ok(())
}

fn same_group(u: &dyn ScalarField, p: &GroupPoint) -> Result<()> {
    if u.dim() != p.n() {
        return Err(Error::domain(format!(
            "field on ℍ^{} evaluated at a point of ℍ^{}",
            u.dim(),
            p.n()
        )));
    }
    Ok(())
}

/// `∇_ℍ u = σ(ξ) ∇u`.
pub fn horizontal_gradient(u: &dyn ScalarField, p: &GroupPoint) -> Result<DVector<f64>> {
    same_group(u, p)?;
    let g = sigma_at(p).into_matrix() * euclidean_gradient(u, p.coords());
    check_finite("horizontal gradient", g.iter().copied())?;
    Ok(g)
}

/// `Sym(σ D²u σᵀ)`.
pub fn horizontal_hessian(u: &dyn ScalarField, p: &GroupPoint) -> Result<HorizontalHessian> {
    same_group(u, p)?;
    let d2 = euclidean_hessian(u, p.coords());
    check_finite("Hessian", d2.iter().copied())?;
    HorizontalHessian::from_matrix(conjugate_by_sigma(p.n(), p.coords(), &d2))
}

pub(crate) fn conjugate_by_sigma(n: usize, c: &[f64], d2: &DMatrix<f64>) -> DMatrix<f64> {
    let s = sigma_coords(n, c);
    &s * d2 * s.transpose()
}

/// `Δ_ℍ u = Σ X_i²u + Y_i²u`, the trace of the horizontal Hessian.
pub fn sublaplacian(u: &dyn ScalarField, p: &GroupPoint) -> Result<f64> {
    Ok(horizontal_hessian(u, p)?.trace())
}

/// Coefficient vector of the horizontal field with index `k` (0..N are
/// `X_{k+1}`, N..2N are `Y_{k-N+1}`) at `c`.
fn field_direction(n: usize, k: usize, c: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; 2 * n + 1];
    v[k] = 1.0;
    v[2 * n] = if k < n { 2.0 * c[n + k] } else { -2.0 * c[k - n] };
    v
}

fn nested_step(c: &[f64]) -> f64 {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    second_step(scale)
}

/// `V_k u(c)` by a central difference along the field's direction at `c`.
fn apply_field(u: &dyn ScalarField, n: usize, k: usize, c: &[f64], h: f64) -> f64 {
    let v = field_direction(n, k, c);
    let plus: Vec<f64> = c.iter().zip(&v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = c.iter().zip(&v).map(|(a, b)| a - h * b).collect();
    (u.eval(&plus) - u.eval(&minus)) / (2.0 * h)
}

/// `V_j V_k u(c)` with both derivatives taken by finite differences.
fn apply_nested(u: &dyn ScalarField, n: usize, j: usize, k: usize, c: &[f64], h: f64) -> f64 {
    let v = field_direction(n, j, c);
    let plus: Vec<f64> = c.iter().zip(&v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = c.iter().zip(&v).map(|(a, b)| a - h * b).collect();
    (apply_field(u, n, k, &plus, h) - apply_field(u, n, k, &minus, h)) / (2.0 * h)
}

/// `(X_i X_j u)_Sym` assembled from nested vector-field differences,
/// independently of the σ-conjugation path.
pub fn nested_horizontal_hessian(u: &dyn ScalarField, p: &GroupPoint) -> Result<HorizontalHessian> {
    same_group(u, p)?;
    let n = p.n();
    let c = p.coords();
    let h = nested_step(c);
    let m = DMatrix::from_fn(2 * n, 2 * n, |j, k| apply_nested(u, n, j, k, c, h));
    check_finite("nested Hessian", m.iter().copied())?;
    HorizontalHessian::from_matrix(m)
}

/// `X_i Y_i u − Y_i X_i u + 4 ∂_t u` at `p` for `i = 1`.
pub fn commutator_defect(u: &dyn ScalarField, p: &GroupPoint) -> Result<f64> {
    commutator_defect_at(u, p, 0)
}

/// As [`commutator_defect`] for the pair `(X_{i+1}, Y_{i+1})`.
pub fn commutator_defect_at(u: &dyn ScalarField, p: &GroupPoint, i: usize) -> Result<f64> {
    same_group(u, p)?;
    let n = p.n();
    if i >= n {
        return Err(Error::domain(format!("field index {i} out of range for N = {n}")));
    }
    let c = p.coords();
    let h = nested_step(c);
    let xy = apply_nested(u, n, i, n + i, c, h);
    let yx = apply_nested(u, n, n + i, i, c, h);
    let dt = euclidean_gradient(u, c)[2 * n];
    let v = xy - yx + 4.0 * dt;
    check_finite("commutator", [v])?;
    Ok(v)
}
