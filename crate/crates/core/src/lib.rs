//! Approximate N-body propagation through per-body two-body analogues.
//!
//! Each body `k` is paired with a fictitious companion carrying the mass of
//! all other bodies, placed at their centre of mass. The relative separation
//! of that pair is propagated in closed form with the `W_{-1}` branch of the
//! Lambert W function, and the body's own radius and polar angle follow by
//! integrating the resulting acceleration and angular-momentum relations.
//!
//! The crate also carries the numerical ground truth used to measure every
//! approximation layer: a direct N-body integrator, scalar ODE integrators
//! for the separation equation and adaptive Gauss-Kronrod quadrature.

pub mod error;
pub mod harness;
pub mod lambertw;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod reduction;
pub mod validity;

pub use error::{Error, Result};
pub use model::{Body, PolarState, SystemState, Trajectory, Vec2};
