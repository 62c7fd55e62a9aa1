//! Effective junction conditions for coercive Hamilton-Jacobi equations on a
//! junction of `N` half-lines.
//!
//! The junction problem couples `N` scalar equations `u_t + H^a(u_x) = 0` on
//! half-lines glued at the origin, where a desired junction condition
//! `u_t + F0(u_x) = 0` is imposed on the vector of one-sided gradients. A
//! desired condition is in general not satisfied pointwise by solutions; the
//! condition actually enforced is its relaxation. This crate computes that
//! relaxation three independent ways and cross-checks them:
//!
//! 1. composition of the sub- and super-relaxation operators
//!    (`relaxation::relax`),
//! 2. a single Godunov-flux fixed point (`relaxation::godunov_relax`),
//! 3. the junction time-slope of numerical Riemann solutions
//!    (`riemann::solve_riemann`).
//!
//! A fourth, closed-form route is available when every Hamiltonian has
//! finitely many extrema: the limiter tensor of [`limiters`].
//!
//! Everything is built on an exact piecewise-linear calculus
//! ([`hamiltonians`]) so that interval extrema, monotone hulls and level
//! crossings are computed without discretization error.

pub mod error;
pub mod hamiltonians;
pub mod junction;
pub mod limiters;
pub mod relaxation;
pub mod riemann;
pub mod scenario;
pub mod solver;
pub mod tol;

pub use error::{Error, Result};
pub use hamiltonians::{BranchHamiltonian, CrossingDirection, ExtremaProfile, PiecewiseLinearFunction};
pub use junction::{JunctionFamily, JunctionFunction, JunctionHamiltonian, JunctionMap};
pub use relaxation::{RelaxationValue, RelaxMethod};
