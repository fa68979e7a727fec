//! `(−Δ_ℍ)^s` of the gauge Gaussian: closed form at the origin, dilation
//! covariance and the certified tail.

use hmix::fracsublap::rules::gauge_sphere_measure;
use hmix::fracsublap::{FracSubLaplacian, OperatorParams, QuadratureSpec};
use hmix::functions;
use hmix::hgroup::GroupPoint;
use statrs::function::gamma::gamma;

fn main() -> hmix::Result<()> {
    let q = QuadratureSpec::default();
    let u = functions::gaussian_gauge(1, 1.0, 1.0);
    let origin = GroupPoint::origin(1);
    for s in [0.25, 0.5, 0.75] {
        let p = OperatorParams::desk_default().with_s(s)?;
        let op = FracSubLaplacian::for_field(p, &q, &u)?;
        let ev = op.evaluate(&u, &origin)?;
        let exact = gauge_sphere_measure(1) * gamma(1.0 - s / 2.0) / (2.0 * s);
        println!(
            "s = {s}: value {:.8} (closed form {exact:.8}), inner {:.2e}, tail radius {:.1}, tail bound {:.1e}",
            ev.value, ev.inner, ev.tail_radius, ev.tail_bound
        );
        let xi = GroupPoint::h1(0.2, -0.1, 0.05)?;
        for lam in [2.0, 4.0] {
            let ul = u.dilated(lam)?.with_sup_abs(1.0);
            let lhs = FracSubLaplacian::for_field(p, &q, &ul)?.eval(&ul, &xi)?;
            let rhs = op.eval(&u, &xi.dilate(lam)?)?;
            println!("    λ = {lam}: log_λ(lhs / rhs) = {:.5} (2s = {})", (lhs / rhs).ln() / f64::ln(lam), 2.0 * s);
        }
    }
    Ok(())
}
