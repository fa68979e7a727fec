//! Numerical engine for the mixed local/nonlocal operator
//! `L u = α M⁺_{λ,Λ}(D²_{ℍ,S} u) − β (−Δ_ℍ)^s u` on the Heisenberg group ℍ^N.

pub mod barrier;
pub mod cli;
pub mod convolution;
pub mod error;
pub mod fracsublap;
pub mod functions;
pub mod grid;
pub mod hcalculus;
pub mod hgroup;
pub mod mixedop;
pub mod pucci;
pub mod regularity;
pub mod solver;

pub use error::{Error, Result};
