//! Optimal stopping for generalized Brownian bridges.
//!
//! A generalized bridge is a time-changed mean-reverting Ornstein–Uhlenbeck
//! process pinned at `γ(1)` at time one:
//!
//! ```text
//! dX_s = (1+α²)(X_s − γ(1)) b'(s)/b(s) ds + √(−2 b'(s) b(s) / β²) dB_s,   b(s) = γ(s) − γ(1)
//! ```
//!
//! The crate computes the barrier constant `β(α)`, the closed-form value
//! function `V*(x, t)` of the problem `sup_τ E[X_τ]`, samples the process
//! exactly from its Gaussian transitions, and checks the optimality of the
//! barrier `γ(t)` by Monte Carlo.
//!
//! Modules, bottom-up:
//! - [`specfun`]: the decaying solution `h₁` built on Kummer `M` and `ln Γ`.
//! - [`curves`]: the view curve `γ` and its bridge offset `b`.
//! - [`process`]: transition moments, exact and Euler samplers.
//! - [`freeboundary`]: the root `x_α` and `β(α)`.
//! - [`valuefn`]: the reduced solution `f(y)` and `V*(x, t)`.
//! - [`mc`]: barrier stopping rules evaluated on simulated paths.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod freeboundary;
pub mod mc;
pub mod process;
mod quad;
pub mod specfun;
pub mod valuefn;

pub use curves::{CurveFamily, CurveSpec, ValidationReport, Violation};
pub use error::{Error, Result};
pub use freeboundary::{barrier, beta_of_alpha, solve_x_alpha, BoundarySolution};
pub use mc::{McConfig, McEstimate, OptimalityScan, StoppingRule, ValueCheck};
pub use process::{ModelParams, PathGrid};
pub use specfun::SpecialFnContext;
pub use valuefn::ValueContext;

/// Shortest round-trip text for a float, switching to exponent form for very
/// small or large magnitudes.
pub(crate) fn real(v: f64) -> String {
    format!("{v:?}")
}
