//! Variational solvers for the two-dimensional nonlinear Schrödinger equation
//! with an attractive point interaction at the origin, in the
//! regular-plus-singular representation `u = φ_λ + q G_λ`.
//!
//! * [`specfun`]: `K₀`, Green's function, `θ_λ`, threshold `ω₀`, closed-form norms.
//! * [`rgrid`]: graded radial grid, quadrature, radial derivatives.
//! * [`functionals`]: mass, `Q`, `E`, `S_ω`, `I_ω`, `S̃`, change of `λ`.
//! * [`nehari`]: the singular branch `q G_λ` of the Nehari manifold.
//! * [`minimize`]: soliton, ground-state and action-minimizer solvers.
//! * [`rearrange`]: discrete symmetric decreasing rearrangement.
//! * [`verify`]: post-hoc checks on computed states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod minimize;
pub mod nehari;
pub mod rearrange;
pub mod rgrid;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
