//! Registry of named closed-form fields used by configs and examples.
//!
//! Names take inline parameters separated by `:` and may be summed with
//! `+`, e.g. `tanh_x:1+bump:0.5:2`.

use nalgebra::{DMatrix, DVector};

use crate::barrier::Barrier;
use crate::error::{Error, Result};
use crate::hcalculus::SmoothFn;

/// Every registered name with its parameter syntax.
pub const REGISTRY: &[(&str, &str)] = &[
    ("const:c", "the constant c"),
    ("x1", "the first horizontal coordinate (unbounded)"),
    ("tanh_x[:k]", "tanh(k·x₁), k = 1 by default"),
    ("gaussian_gauge[:amp[:scale]]", "amp·exp(−(|ξ|/scale)⁴)"),
    ("gauge_pow:p", "|ξ|^p (unbounded)"),
    ("gauge_quartic", "|ξ|⁴ = |z|⁴ + t² (unbounded)"),
    ("barrier[:C]", "the barrier φ_h with constant C"),
    ("bump[:amp[:radius]]", "amp·exp(1 − 1/(1 − (|ξ|/radius)⁴)) inside the ball, 0 outside"),
];

/// Parses a registry expression into a field on ℍ^N.
pub fn parse(expr: &str, n: usize) -> Result<SmoothFn> {
    if n == 0 {
        return Err(Error::config("n", "must be a positive integer"));
    }
    let mut terms = expr.split('+').map(str::trim);
    let first = terms.next().filter(|t| !t.is_empty()).ok_or_else(|| bad(expr, "empty expression"))?;
    let mut acc = parse_term(first, n)?;
    for t in terms {
        let next = parse_term(t, n)?;
        acc = SmoothFn::linear_combination(1.0, &acc, 1.0, &next)?;
    }
    Ok(acc.named(expr))
}

fn bad(expr: &str, msg: &str) -> Error {
    Error::config("function", format!("`{expr}`: {msg}"))
}

fn args(expr: &str, parts: &[&str], max: usize) -> Result<Vec<f64>> {
    if parts.len() > max {
        return Err(bad(expr, &format!("takes at most {max} parameter(s)")));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(expr, &format!("`{p}` is not a finite number")))
        })
        .collect()
}

fn parse_term(term: &str, n: usize) -> Result<SmoothFn> {
    let mut it = term.split(':');
    let name = it.next().unwrap_or_default();
    let rest: Vec<&str> = it.collect();
    let d = 2 * n + 1;
    let f = match name {
        "const" => {
            let a = args(term, &rest, 1)?;
            let c = *a.first().ok_or_else(|| bad(term, "needs a value, e.g. const:7"))?;
            SmoothFn::constant(n, c)
        }
        "x1" => {
            args(term, &rest, 0)?;
            SmoothFn::new(n, |c| c[0])
                .with_gradient(move |_| {
                    let mut g = DVector::zeros(d);
                    g[0] = 1.0;
                    g
                })
                .with_hessian(move |_| DMatrix::zeros(d, d))
        }
        "tanh_x" => {
            let a = args(term, &rest, 1)?;
            tanh_x(n, a.first().copied().unwrap_or(1.0))
        }
        "gaussian_gauge" => {
            let a = args(term, &rest, 2)?;
            let amp = a.first().copied().unwrap_or(1.0);
            let scale = a.get(1).copied().unwrap_or(1.0);
            if !(scale > 0.0) {
                return Err(bad(term, "scale must be positive"));
            }
            gaussian_gauge(n, amp, scale)
        }
        "gauge_pow" => {
            let a = args(term, &rest, 1)?;
            let p = *a.first().ok_or_else(|| bad(term, "needs an exponent, e.g. gauge_pow:0.5"))?;
            if !(p > 0.0) {
                return Err(bad(term, "exponent must be positive"));
            }
            gauge_pow(n, p)
        }
        "gauge_quartic" => {
            args(term, &rest, 0)?;
            gauge_quartic(n)
        }
        "barrier" => {
            let a = args(term, &rest, 1)?;
            Barrier::new(a.first().copied().unwrap_or(1.0))?.to_field(n)
        }
        "bump" => {
            let a = args(term, &rest, 2)?;
            let amp = a.first().copied().unwrap_or(0.5);
            let radius = a.get(1).copied().unwrap_or(2.0);
            if !(radius > 0.0) {
                return Err(bad(term, "radius must be positive"));
            }
            bump(n, amp, radius)
        }
        _ => return Err(bad(term, "unknown function name")),
    };
    Ok(f.named(term))
}

fn quartic(c: &[f64]) -> f64 {
    let last = c.len() - 1;
    let z2: f64 = c[..last].iter().map(|v| v * v).sum();
    z2 * z2 + c[last] * c[last]
}

fn quartic_grad(c: &[f64]) -> DVector<f64> {
    let last = c.len() - 1;
    let z2: f64 = c[..last].iter().map(|v| v * v).sum();
    DVector::from_fn(c.len(), |i, _| if i == last { 2.0 * c[last] } else { 4.0 * z2 * c[i] })
}

fn quartic_hess(c: &[f64]) -> DMatrix<f64> {
    let last = c.len() - 1;
    let z2: f64 = c[..last].iter().map(|v| v * v).sum();
    DMatrix::from_fn(c.len(), c.len(), |i, j| {
        if i == last || j == last {
            if i == j {
                2.0
            } else {
                0.0
            }
        } else {
            8.0 * c[i] * c[j] + if i == j { 4.0 * z2 } else { 0.0 }
        }
    })
}

/// `|ξ|⁴ = |z|⁴ + t²`.
pub fn gauge_quartic(n: usize) -> SmoothFn {
    SmoothFn::new(n, quartic).with_gradient(quartic_grad).with_hessian(quartic_hess)
}

/// `amp · exp(−(|ξ|/scale)⁴)` with exact derivatives.
pub fn gaussian_gauge(n: usize, amp: f64, scale: f64) -> SmoothFn {
    let k = scale.powi(-4);
    SmoothFn::new(n, move |c| amp * (-k * quartic(c)).exp())
        .with_gradient(move |c| quartic_grad(c) * (-k * amp * (-k * quartic(c)).exp()))
        .with_hessian(move |c| {
            let u = amp * (-k * quartic(c)).exp();
            let g = quartic_grad(c);
            (&g * g.transpose() * (k * k) - quartic_hess(c) * k) * u
        })
        .with_sup_abs(amp.abs())
}

/// `tanh(k x₁)` with exact derivatives.
pub fn tanh_x(n: usize, k: f64) -> SmoothFn {
    let d = 2 * n + 1;
    SmoothFn::new(n, move |c| (k * c[0]).tanh())
        .with_gradient(move |c| {
            let th = (k * c[0]).tanh();
            let mut g = DVector::zeros(d);
            g[0] = k * (1.0 - th * th);
            g
        })
        .with_hessian(move |c| {
            let th = (k * c[0]).tanh();
            let mut h = DMatrix::zeros(d, d);
            h[(0, 0)] = -2.0 * k * k * th * (1.0 - th * th);
            h
        })
        .with_sup_abs(1.0)
}

/// `|ξ|^p`; not differentiable at the origin for `p < 4`.
pub fn gauge_pow(n: usize, p: f64) -> SmoothFn {
    SmoothFn::new(n, move |c| quartic(c).powf(p / 4.0))
}

/// Smooth bump supported in the gauge ball of radius `radius`.
pub fn bump(n: usize, amp: f64, radius: f64) -> SmoothFn {
    let r4 = radius.powi(4);
    SmoothFn::new(n, move |c| {
        let q = quartic(c) / r4;
        if q < 1.0 {
            amp * (1.0 - 1.0 / (1.0 - q)).exp()
        } else {
            0.0
        }
    })
    .with_sup_abs(amp.abs())
}
