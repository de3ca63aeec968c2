//! Structure-preserving integrators for forced Euler-Poincare and Lie-Poisson
//! systems on SO(3).
//!
//! A forced reduced system `(l, f)` is embedded in a doubled system on
//! `g x G x g` whose generalized potential reproduces the force on the identity
//! section. Discretizing the doubled action with Runge-Kutta-Munthe-Kaas
//! quadrature yields variational integrators of the tableau's order; the
//! [`rkmk`] module solves the resulting stage equations restricted to the
//! identities.
//!
//! Module map:
//!
//! * [`lie`]: so(3) kernel, retractions and their trivialized tangents.
//! * [`systems`]: reduced Lagrangians, forces and the Lie-Poisson vector field.
//! * [`groupoid`]: the Poisson groupoid `g* x G x g*` and the forced Hamiltonian.
//! * [`discrete`]: discrete Legendre maps and the discrete flow on `G x G x G`.
//! * [`rkmk`]: Butcher tableaus, stage residuals, one-step maps, RK4 baseline.
//! * [`harness`]: trajectories, drift series, convergence sweeps, CSV output.
//! * [`oracle`]: finite-difference oracles used by `verify` and the test suite.
//! * [`cli`]: the `forced-ep` command-line front end.

pub mod cli;
pub mod config;
pub mod discrete;
pub mod error;
pub mod groupoid;
pub mod harness;
pub mod lie;
mod newton;
pub mod oracle;
pub mod rkmk;
pub mod systems;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, DualVector, GroupElement, Retraction, RetractionKind};
