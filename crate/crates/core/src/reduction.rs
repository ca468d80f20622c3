//! Per-body two-body reduction.
//!
//! Body `k` is paired with a companion of mass `M_k = sum_{n != k} m_n`
//! located at the centre of mass of the other bodies. The pair's separation
//! scalar `x_k = r_k + r_Mk` is the quantity propagated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cartesian_to_polar, SystemState, Vec2};

/// How the initial separation scalar is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Xk0Mode {
    /// `x0 = r0 + |r_Mk(0)|`, `x_dot0 = r_dot0 + r_dot_Mk(0)`.
    #[default]
    Consistent,
    /// `x0 = r0`, `x_dot0 = r_dot0`.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPair {
    pub body_index: usize,
    pub body_mass: f64,
    pub companion_mass: f64,
    pub companion_com_position: Vec2,
    pub companion_com_velocity: Vec2,
    pub x0: f64,
    pub x_dot0: f64,
    pub r0: f64,
    pub r_dot0: f64,
    pub theta0: f64,
    pub theta_dot0: f64,
}

impl ReducedPair {
    pub fn pair_mass(&self) -> f64 {
        self.body_mass + self.companion_mass
    }
}

fn check_index(k: usize, state: &SystemState) -> Result<()> {
    if k >= state.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: state.len(),
        });
    }
    Ok(())
}

/// Sum of every mass except `m_k`, in ascending index order.
pub fn companion_mass(k: usize, state: &SystemState) -> Result<f64> {
    check_index(k, state)?;
    Ok(state
        .bodies
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != k)
        .map(|(_, b)| b.mass)
        .sum())
}

/// Centre of mass position and velocity of all bodies except `k`.
pub fn companion_com(k: usize, state: &SystemState) -> Result<(Vec2, Vec2)> {
    let mass = companion_mass(k, state)?;
    if state.len() == 2 {
        let other = &state.bodies[1 - k];
        return Ok((other.position, other.velocity));
    }
    let mut pos = Vec2::zeros();
    let mut vel = Vec2::zeros();
    for (n, b) in state.bodies.iter().enumerate() {
        if n != k {
            pos += b.mass * b.position;
            vel += b.mass * b.velocity;
        }
    }
    Ok((pos / mass, vel / mass))
}

/// Builds the reduced pair for body `k`. The state must already be in the
/// centre-of-mass frame.
pub fn build_reduced_pair(k: usize, state: &SystemState, mode: Xk0Mode) -> Result<ReducedPair> {
    let companion = companion_mass(k, state)?;
    let (cpos, cvel) = companion_com(k, state)?;
    let body = &state.bodies[k];
    let own = cartesian_to_polar(&body.position, &body.velocity)?;
    let other = cartesian_to_polar(&cpos, &cvel)?;
    let (x0, x_dot0) = match mode {
        Xk0Mode::Consistent => (own.r + other.r, own.r_dot + other.r_dot),
        Xk0Mode::Paper => (own.r, own.r_dot),
    };
    Ok(ReducedPair {
        body_index: k,
        body_mass: body.mass,
        companion_mass: companion,
        companion_com_position: cpos,
        companion_com_velocity: cvel,
        x0,
        x_dot0,
        r0: own.r,
        r_dot0: own.r_dot,
        theta0: own.theta,
        theta_dot0: own.theta_dot,
    })
}

/// Angle between `r_k` and `-r_Mk`, zero when the pair is exactly collinear
/// through the origin.
pub fn collinearity_deviation(body_position: &Vec2, companion_position: &Vec2) -> f64 {
    let a = body_position;
    let b = -companion_position;
    crate::model::cross(a, &b).abs().atan2(a.dot(&b))
}
