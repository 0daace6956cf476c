//! Numerical toolkit for holomorphic curves in symplectic manifolds.
//!
//! Coordinates on `R^{2n}` are interleaved, `(p1, q1, p2, q2, ...)`, so the
//! standard form has `Ω[2j][2j+1] = 1` and the standard complex structure
//! is block diagonal with blocks `[[0, -1], [1, 0]]`. The Cauchy-Riemann
//! operator is unhalved: `∂̄ = ∂_s + i ∂_t`.

pub mod cli;
pub mod cr_operators;
pub mod error;
pub mod flows;
pub mod holomorphic_solver;
pub mod moduli_calc;
pub mod nonsqueezing;
pub mod quadrature;
pub mod symplectic_linear;

pub use error::{Error, Result};
