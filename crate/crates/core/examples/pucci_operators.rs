//! Pucci extremal operators and the maximising coefficient matrix.

use hmix::pucci::{linear_l_gamma, optimizer_matrix, pucci_minus, pucci_plus, Ellipticity};
use nalgebra::DMatrix;

fn main() -> hmix::Result<()> {
    let e = Ellipticity::new(1.0, 2.0)?;
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -3.0]);
    println!("M = {m}");
    println!("M⁺(M) = {:.6}, M⁻(M) = {:.6}", pucci_plus(&m, e)?, pucci_minus(&m, e)?);
    println!("−M⁻(−M) = {:.6}", -pucci_minus(&(-&m), e)?);

    let a = optimizer_matrix(&m, e)?;
    println!("A* = {a}");
    println!("tr(A* M) = {:.6}", (&a * &m).trace());

    let gamma = a.clone().cholesky().expect("A* is positive definite").l();
    println!("L_γ(M) with γγᵀ = A*: {:.6}", linear_l_gamma(&gamma, &m, e)?);

    let one = Ellipticity::new(1.0, 1.0)?;
    println!("λ = Λ = 1: M⁺(M) = {:.6}, tr M = {:.6}", pucci_plus(&m, one)?, m.trace());
    Ok(())
}
