//! Find `C` with `L φ_h ≤ −1` on the normalised ball `B_1((2, 0, 0))`.

use hmix::barrier::{decompose, find_c, Barrier, BarrierSearch};
use hmix::fracsublap::{OperatorParams, QuadratureSpec};
use hmix::hgroup::{GaugeBall, GroupPoint};

fn main() -> hmix::Result<()> {
    let p = OperatorParams::desk_default();
    let omega = GaugeBall::new(GroupPoint::h1(2.0, 0.0, 0.0)?, 1.0)?;
    let result = find_c(&p, &omega, &BarrierSearch::default())?;
    println!("C = {}", result.c);
    println!("certified max L φ_h = {:.6}", result.certificate.certified_max);
    println!("lattice points {}, margin {:.3e}", result.certificate.lattice_points, result.certificate.margin);
    for (c, m) in &result.trace {
        println!("  C = {c:>9.4}  max = {m:.5}");
    }
    let b = Barrier::new(result.c)?;
    let d = decompose(&p, &QuadratureSpec::default(), &b, &omega, &GroupPoint::h1(2.0, 0.3, 0.1)?)?;
    println!("terms {:?}", d.terms);
    println!("sum {:.6} direct {:.6}", d.sum, d.direct);
    Ok(())
}
