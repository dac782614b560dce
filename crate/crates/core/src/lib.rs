//! Physics-informed network training with truncated-exponential time
//! sampling of the residual loss, plus numerical checks of the optimal
//! sampling theory.
//!
//! Modules, bottom-up:
//! - [`sampling`]: the truncated exponential law and collocation grids.
//! - [`net`]: tanh MLP with exact input derivatives and parameter gradients.
//! - [`problems`]: linear ODE, viscous Burgers and Lorenz residual losses.
//! - [`reference`]: closed-form and numerical reference solutions.
//! - [`trainer`]: full-batch Adam.
//! - [`theory`]: budget-constrained error bounds and optimal densities.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod net;
pub mod par;
pub mod problems;
pub mod reference;
pub mod sampling;
pub mod theory;
pub mod trainer;

pub use error::{Error, Result};
pub use par::Execution;
