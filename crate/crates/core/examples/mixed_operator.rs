//! The mixed operator `L u = α M⁺(D²_{ℍ,S} u) − β (−Δ_ℍ)^s u`, split into
//! its local and nonlocal parts.

use hmix::fracsublap::{OperatorParams, QuadratureSpec};
use hmix::functions;
use hmix::hgroup::GroupPoint;
use hmix::mixedop::MixedOperator;

fn main() -> hmix::Result<()> {
    let p = OperatorParams::desk_default();
    let q = QuadratureSpec::default();
    for expr in ["gaussian_gauge", "tanh_x:2", "tanh_x:1+bump:0.5:2", "barrier:3"] {
        let u = functions::parse(expr, 1)?;
        let op = MixedOperator::for_field(p, &q, &u)?;
        println!("{expr}");
        for c in [[0.0, 0.0, 0.0], [0.3, -0.2, 0.15], [1.0, 0.5, -0.25]] {
            let xi = GroupPoint::from_flat(&c)?;
            let ev = op.evaluate(&u, &xi)?;
            println!(
                "  ξ = {xi}: L u = {:>10.6}  local {:>10.6}  nonlocal {:>10.6}",
                ev.value, ev.local, ev.nonlocal.value
            );
        }
    }
    Ok(())
}
