//! Solve `L u = 0` on the unit gauge ball with `g = tanh(x₁) + bump`.

use std::time::Instant;

use hmix::fracsublap::OperatorParams;
use hmix::functions;
use hmix::grid::Grid;
use hmix::hcalculus::SmoothFn;
use hmix::hgroup::GaugeBall;
use hmix::solver::{solve_dirichlet, DirichletProblem};

fn main() -> hmix::Result<()> {
    let omega = GaugeBall::centered(1, 1.0)?;
    let prob = DirichletProblem::new(
        omega.clone(),
        SmoothFn::constant(1, 0.0),
        functions::parse("tanh_x:1+bump:0.5:2", 1)?,
        OperatorParams::desk_default(),
    )?;
    let start = Instant::now();
    let (u, report) = solve_dirichlet(&prob, Grid::for_ball(&omega, 33, 65)?, 1e-3, 50)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("interior max {:.6}, min {:.6}", u.node_max(), u.node_min());
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
