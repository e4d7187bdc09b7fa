//! Numerics for the parabolic Anderson model driven by a symmetric Lévy
//! generator and Gaussian noise with covariance `|t-s|^{-β₀} γ(x-y)`.
//!
//! The crate checks spectral integrability conditions, estimates
//! Feynman-Kac moments by Monte Carlo, sums truncated chaos series and
//! evaluates a set of closed-form bounds against quadrature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod mc;
pub mod model;
pub mod moments;
pub mod oracles;
pub mod pathsim;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{CovarianceKernel, InitialCondition, KernelFamily, LevyFamily, LevyProcessSpec, NoiseSpec};

/// Artifact float format: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
