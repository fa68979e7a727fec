//! Pucci extremal operators on symmetric 2N × 2N matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ellipticity constants `0 < λ ≤ Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
}

impl Ellipticity {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::config("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if !(big_lambda >= lambda) || !big_lambda.is_finite() {
            return Err(Error::config(
                "Lambda",
                format!("must satisfy lambda ≤ Lambda < ∞, got lambda = {lambda}, Lambda = {big_lambda}"),
            ));
        }
        Ok(Ellipticity { lambda, big_lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
}

const ASYMMETRY_TOL: f64 = 1e-9;

fn checked_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if !m.is_square() {
        return Err(Error::domain(format!("matrix is {}×{}, not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > ASYMMETRY_TOL * scale {
        return Err(Error::domain(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    Ok(SymmetricEigen::new((m + m.transpose()) * 0.5))
}

/// `M⁺(M) = Λ Σ_{e ≥ 0} e + λ Σ_{e < 0} e`.
pub fn pucci_plus(m: &DMatrix<f64>, e: Ellipticity) -> Result<f64> {
    let eig = checked_eigen(m)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&v| if v >= 0.0 { e.big_lambda * v } else { e.lambda * v })
        .sum())
}

/// `M⁻(M) = Λ Σ_{e ≤ 0} e + λ Σ_{e > 0} e`.
pub fn pucci_minus(m: &DMatrix<f64>, e: Ellipticity) -> Result<f64> {
    let eig = checked_eigen(m)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&v| if v <= 0.0 { e.big_lambda * v } else { e.lambda * v })
        .sum())
}

/// The maximiser `A* = Λ P₊ + λ P₋` of `tr(A M)` over matrices with
/// spectrum in `[λ, Λ]`. Zero eigenvalues go to `P₊`.
pub fn optimizer_matrix(m: &DMatrix<f64>, e: Ellipticity) -> Result<DMatrix<f64>> {
    let eig = checked_eigen(m)?;
    let d = m.nrows();
    let mut a = DMatrix::zeros(d, d);
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        let w = if v >= 0.0 { e.big_lambda } else { e.lambda };
        let q = eig.eigenvectors.column(k);
        a += q * q.transpose() * w;
    }
    Ok((&a + a.transpose()) * 0.5)
}

/// `L_γ(M) = ⟨γγᵀ, M⟩`, requiring the spectrum of `γγᵀ` to lie in `[λ, Λ]`.
pub fn linear_l_gamma(gamma: &DMatrix<f64>, m: &DMatrix<f64>, e: Ellipticity) -> Result<f64> {
    if gamma.nrows() != m.nrows() || gamma.ncols() != m.ncols() {
        return Err(Error::domain("γ and M must have the same shape"));
    }
    let a = gamma * gamma.transpose();
    let spectrum = checked_eigen(&a)?.eigenvalues;
    let slack = 1e-12 * e.big_lambda;
    if let Some(bad) = spectrum
        .iter()
        .find(|&&v| v < e.lambda - slack || v > e.big_lambda + slack)
    {
        return Err(Error::domain(format!(
            "γγᵀ has eigenvalue {bad} outside [{}, {}]",
            e.lambda, e.big_lambda
        )));
    }
    checked_eigen(m)?;
    Ok(a.component_mul(m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell(l: f64, big: f64) -> Ellipticity {
        Ellipticity::new(l, big).unwrap()
    }

    #[test]
    fn spec_examples() {
        let e = ell(1.0, 2.0);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!((pucci_plus(&i2, e).unwrap() - 4.0).abs() < 1e-14);
        assert!((pucci_plus(&(-&i2), e).unwrap() + 2.0).abs() < 1e-14);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!((pucci_plus(&d, e).unwrap() - 1.0).abs() < 1e-14);
        assert!((pucci_minus(&i2, e).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(pucci_minus(&DMatrix::zeros(2, 2), e).unwrap(), 0.0);
    }

    #[test]
    fn optimizer_examples() {
        let e = ell(0.5, 3.0);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!((optimizer_matrix(&i2, e).unwrap() - &i2 * 3.0).amax() < 1e-14);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        let a = optimizer_matrix(&d, e).unwrap();
        assert!((a[(0, 0)] - 3.0).abs() < 1e-14 && (a[(1, 1)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn l_gamma_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!((linear_l_gamma(&i2, &m, ell(1.0, 1.0)).unwrap() - m.trace()).abs() < 1e-14);
        let g = &i2 * 2.0f64.sqrt();
        assert!((linear_l_gamma(&g, &m, ell(1.0, 2.0)).unwrap() - 2.0 * m.trace()).abs() < 1e-12);
        assert!(linear_l_gamma(&(&i2 * 3.0), &m, ell(1.0, 2.0)).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(pucci_plus(&m, ell(1.0, 1.0)).is_err());
        assert!(Ellipticity::new(2.0, 1.0).is_err());
        assert!(Ellipticity::new(0.0, 1.0).is_err());
    }
}
