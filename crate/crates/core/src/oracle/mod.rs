//! Numerical ground truth for every approximation layer of the closed form.

mod nbody;
mod ode;
mod quadrature;
mod scalar;

pub use nbody::{
    integrate_nbody, integrate_nbody_until_collision, min_pairwise_distance, nbody_accelerations,
    CartesianSample,
};
pub use ode::{solve, IntegratorConfig, Method, OdeSolution};
pub use quadrature::{quadrature, quadrature_with_limit};
pub use crate::model::Trajectory;
pub use scalar::{integrate_scalar_x, ScalarForm, ScalarSample, SeparationOde};
