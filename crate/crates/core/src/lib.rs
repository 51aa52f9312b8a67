//! Upper bounds on the number of equiangular lines in `R^n`.
//!
//! The crate builds the three-point semidefinite program for equiangular
//! line sets with a fixed angle `arccos a`, solves it with a small dense
//! interior-point method, and combines the result with the classical
//! closed-form and linear-programming bounds:
//!
//! * [`numerics`]: exact rationals, polynomials and small symmetric matrices
//! * [`gegenbauer`]: Gegenbauer polynomials and basis expansions
//! * [`threepoint`]: the matrix kernels `Y_k^n` and `S_k^n`
//! * [`sdp_model`]: the block-diagonal LMI model and SDPA exchange
//! * [`sdp_solver`]: the interior-point solver and residual checker
//! * [`bounds`]: Gerzon, relative, Lemmens–Seidel and Delsarte LP bounds
//! * [`pipeline`]: per-dimension orchestration, tables and known values

pub mod bounds;
pub mod error;
pub mod gegenbauer;
pub mod numerics;
pub mod pipeline;
pub mod sdp_model;
pub mod sdp_solver;
pub mod threepoint;

pub use error::{Error, Result};
