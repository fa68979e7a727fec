//! Horizontal Hessian, sub-Laplacian, commutator and the degenerate symbol.

use hmix::functions;
use hmix::hcalculus::{
    commutator_defect, degeneracy_matrix, horizontal_gradient, horizontal_hessian, nested_horizontal_hessian,
    sigma_at, sublaplacian, SmoothFn,
};
use hmix::hgroup::GroupPoint;

fn main() -> hmix::Result<()> {
    let xi = GroupPoint::h1(0.3, -0.4, 0.2)?;
    println!("σ(ξ) = {}", sigma_at(&xi).matrix());

    let u = functions::gauge_quartic(1);
    println!("∇_ℍ|ξ|⁴ = {}", horizontal_gradient(&u, &xi)?.transpose());
    let h = horizontal_hessian(&u, &xi)?;
    let nested = nested_horizontal_hessian(&u, &xi)?;
    println!("D²_ℍ,S |ξ|⁴ (σ path) = {}", h.matrix());
    println!("max |σ path − nested FD| = {:.2e}", (h.matrix() - nested.matrix()).amax());

    let t2 = SmoothFn::new(1, |c| c[2] * c[2]);
    println!("Δ_ℍ t² = {:.6}  (8(x² + y²) = {:.6})", sublaplacian(&t2, &xi)?, 8.0 * (0.09 + 0.16));

    let w = SmoothFn::new(1, |c| c[0] * c[0] * c[2] + c[1]);
    println!("X₁Y₁u − Y₁X₁u + 4∂_t u = {:.2e}", commutator_defect(&w, &xi)?);

    let a = degeneracy_matrix(&xi);
    println!("det σᵀσ = {:.2e}, eigenvalues {}", a.determinant(), a.symmetric_eigenvalues().transpose());
    Ok(())
}
