//! Group law, inverses, dilations and gauge balls on ℍ¹.

use hmix::hgroup::{GaugeBall, GroupPoint, HomogeneousDim};

fn main() -> hmix::Result<()> {
    let a = GroupPoint::h1(1.0, 0.0, 0.0)?;
    let b = GroupPoint::h1(0.0, 1.0, 0.0)?;
    println!("a ∘ b = {}", a.compose(&b)?);
    println!("b ∘ a = {}", b.compose(&a)?);
    println!("a⁻¹   = {}", a.inverse());

    let xi = GroupPoint::h1(0.5, -0.25, 0.75)?;
    for lam in [0.5, 1.0, 2.0, 10.0] {
        let d = xi.dilate(lam)?;
        println!("Φ_{lam}(ξ) = {d}, |Φ_λ ξ| / λ = {:.15}", d.gauge_norm() / lam);
    }
    println!("d(a, b) = {:.15}", a.gauge_distance(&b)?);

    let ball = GaugeBall::centered(1, 2.0)?;
    for t in [3.99, 4.0] {
        let p = GroupPoint::h1(0.0, 0.0, t)?;
        println!("(0, 0, {t}) in B_2: {}", ball.contains(&p));
    }
    let q = HomogeneousDim::new(1)?;
    println!("N = {}, Q = {}", q.n(), q.q());
    Ok(())
}
