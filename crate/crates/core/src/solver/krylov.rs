//! Jacobi-preconditioned BiCGSTAB with thread-count independent reductions.

use rayon::prelude::*;

use crate::fracsublap::pairwise_sum;

const CHUNK: usize = 4096;

/// `⟨a, b⟩` summed in fixed chunks, then pairwise.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    pairwise_sum(&parts)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` from `x = 0`. `apply(v, out)` writes `A v`.
pub fn bicgstab<F>(apply: F, diag: &[f64], b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, KrylovOutcome)
where
    F: Fn(&[f64], &mut [f64]),
{
    let m = b.len();
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let precond = |v: &[f64], out: &mut [f64]| {
        out.par_iter_mut().zip(v).zip(&inv).for_each(|((o, x), d)| *o = x * d);
    };
    let mut x = vec![0.0; m];
    let mut r = b.to_vec();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return (x, KrylovOutcome { iterations: 0, relative_residual: 0.0, converged: true });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; m];
    let mut p = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut s = vec![0.0; m];
    let mut t = vec![0.0; m];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: false });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p.par_iter_mut()
            .zip(&r)
            .zip(&v)
            .for_each(|((pi, ri), vi)| *pi = ri + beta * (*pi - omega * vi));
        precond(&p, &mut y);
        apply(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        s.par_iter_mut()
            .zip(&r)
            .zip(&v)
            .for_each(|((si, ri), vi)| *si = ri - alpha * vi);
        let s_norm = norm(&s);
        if s_norm / b_norm < rel_tol {
            x.par_iter_mut().zip(&y).for_each(|(xi, yi)| *xi += alpha * yi);
            return (x, KrylovOutcome { iterations: it, relative_residual: s_norm / b_norm, converged: true });
        }
        precond(&s, &mut z);
        apply(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        x.par_iter_mut()
            .zip(&y)
            .zip(&z)
            .for_each(|((xi, yi), zi)| *xi += alpha * yi + omega * zi);
        r.par_iter_mut()
            .zip(&s)
            .zip(&t)
            .for_each(|((ri, si), ti)| *ri = si - omega * ti);
        rel = norm(&r) / b_norm;
        if rel < rel_tol {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: true });
        }
        if omega == 0.0 || !rel.is_finite() {
            return (x, KrylovOutcome { iterations: it, relative_residual: rel, converged: false });
        }
    }
    (x, KrylovOutcome { iterations: max_iter, relative_residual: rel, converged: false })
}
