//! Dyadic oscillation profile and Hölder fit of `|ξ|^p` sampled on a grid.
//! Usage: `cargo run --release --example holder_fit -- [p]`.

use std::sync::Arc;

use hmix::functions;
use hmix::grid::{FieldWithExterior, Grid};
use hmix::hgroup::GaugeBall;
use hmix::regularity::{dyadic_profile, fit_holder};

fn main() -> hmix::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let ball = GaugeBall::centered(1, 1.0)?;
    let grid = Arc::new(Grid::for_ball(&ball, 65, 129)?);
    let u = FieldWithExterior::sample(grid, Arc::new(functions::gauge_pow(1, p)))?;
    let profile = dyadic_profile(&u, 3)?;
    for e in &profile.entries {
        println!("k {}  radius {:<7}  osc {:.5}  nodes {}", e.k, e.radius, e.osc, e.nodes);
    }
    let fit = fit_holder(&profile)?;
    println!("gamma {:.4} (exact {p}), delta {:.4}, C {:.4}", fit.gamma_fit, fit.delta_fit, fit.c_fit);
    Ok(())
}
