//! The assembled operator `L u = α M⁺(D²_{ℍ,S} u) − β (−Δ_ℍ)^s u`.

use serde::Serialize;

use crate::error::Result;
use crate::fracsublap::{FracEvaluation, FracSubLaplacian, OperatorParams, QuadratureSpec};
use crate::grid::FieldWithExterior;
use crate::hcalculus::{horizontal_hessian, ScalarField};
use crate::hgroup::GroupPoint;
use crate::pucci::pucci_plus;
use crate::solver::discrete::GridOperator;

/// Local and nonlocal parts of one evaluation of `L u(ξ)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MixedEvaluation {
    pub value: f64,
    /// `α M⁺(D²_{ℍ,S} u)`.
    pub local: f64,
    pub nonlocal: FracEvaluation,
}

/// Point evaluator reusing one quadrature rule across many points.
#[derive(Clone, Debug)]
pub struct MixedOperator {
    frac: FracSubLaplacian,
}

impl MixedOperator {
    /// For fields whose oscillation is bounded by `osc_bound`.
    pub fn new(params: OperatorParams, spec: &QuadratureSpec, osc_bound: f64) -> Result<Self> {
        Ok(MixedOperator { frac: FracSubLaplacian::new(params, spec, osc_bound)? })
    }

    pub fn for_field(params: OperatorParams, spec: &QuadratureSpec, u: &dyn ScalarField) -> Result<Self> {
        Ok(MixedOperator { frac: FracSubLaplacian::for_field(params, spec, u)? })
    }

    pub fn params(&self) -> &OperatorParams {
        self.frac.params()
    }

    pub fn fractional(&self) -> &FracSubLaplacian {
        &self.frac
    }

    pub fn eval(&self, u: &dyn ScalarField, xi: &GroupPoint) -> Result<f64> {
        Ok(self.evaluate(u, xi)?.value)
    }

    pub fn evaluate(&self, u: &dyn ScalarField, xi: &GroupPoint) -> Result<MixedEvaluation> {
        let p = self.frac.params();
        let local = if p.alpha() == 0.0 {
            0.0
        } else {
            let h = horizontal_hessian(u, xi)?;
            p.alpha() * pucci_plus(h.matrix(), p.ellipticity())?
        };
        let nonlocal = self.frac.evaluate(u, xi)?;
        Ok(MixedEvaluation { value: local - p.beta() * nonlocal.value, local, nonlocal })
    }
}

/// `L u(ξ)` at a single point.
pub fn evaluate_l(u: &dyn ScalarField, xi: &GroupPoint, p: &OperatorParams, q: &QuadratureSpec) -> Result<f64> {
    MixedOperator::for_field(*p, q, u)?.eval(u, xi)
}

/// `L_h u − f` at every interior node of `u`'s grid (in the order of
/// `Grid::interior_indices`), using the same discretisation as the solver.
pub fn residual_field(
    u: &FieldWithExterior,
    f: &dyn ScalarField,
    p: &OperatorParams,
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let op = GridOperator::new(u.grid().clone(), *p, q, u.exterior().as_ref())?;
    let lu = op.apply_nonlinear(u.values());
    let grid = u.grid();
    Ok(op
        .interior()
        .iter()
        .zip(lu)
        .map(|(&i, v)| v - f.value(&grid.point(i)))
        .collect())
}
