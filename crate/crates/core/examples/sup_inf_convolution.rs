//! Sup- and inf-convolutions of a sampled field: ordering, maximiser
//! proximity and convergence as `ε → 0`.

use std::sync::Arc;

use hmix::convolution::{inf_convolution_detailed, sup_convolution_detailed};
use hmix::functions;
use hmix::grid::{FieldWithExterior, Grid};
use hmix::hgroup::GaugeBall;

fn main() -> hmix::Result<()> {
    let grid = Arc::new(Grid::for_ball(&GaugeBall::centered(1, 1.0)?, 17, 33)?);
    let u = FieldWithExterior::sample(grid, Arc::new(functions::parse("tanh_x:2+bump:0.5:2", 1)?))?;
    for eps in [1e-1, 1e-2, 1e-3] {
        let up = sup_convolution_detailed(&u, eps)?;
        let lo = inf_convolution_detailed(&u, eps)?;
        let gap = |v: &FieldWithExterior| {
            v.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ordered = (0..u.values().len())
            .all(|i| lo.field.values()[i] <= u.values()[i] && u.values()[i] <= up.field.values()[i]);
        let prox = up.proximity();
        println!(
            "ε = {eps:.0e}: max|u^ε − u| {:.4e}, max|u − u_ε| {:.4e}, ordered {ordered}, worst |η*⁻¹∘ξ|⁴ {:.3e} ≤ {:.3e}",
            gap(&up.field),
            gap(&lo.field),
            prox.worst_quartic,
            prox.window
        );
    }
    Ok(())
}
