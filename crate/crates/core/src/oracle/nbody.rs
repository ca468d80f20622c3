//! Direct integration of the full pairwise-gravity equations of motion.

use crate::error::{Error, Result};
use crate::model::{SystemState, Vec2};

use super::ode::{solve, IntegratorConfig};
use crate::model::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianSample {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Smallest pairwise distance and the pair that attains it.
pub fn min_pairwise_distance(positions: &[Vec2]) -> (f64, (usize, usize)) {
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = (positions[i] - positions[j]).norm();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    best
}

/// Pairwise accumulation over `[x0, y0, x1, y1, ...]`, ascending index order.
fn accumulate(g: f64, masses: &[f64], pos: &[f64], acc: &mut [f64]) {
    acc.iter_mut().for_each(|a| *a = 0.0);
    let n = masses.len();
    for i in 0..n {
        for j in i + 1..n {
            let dx = pos[2 * j] - pos[2 * i];
            let dy = pos[2 * j + 1] - pos[2 * i + 1];
            let d2 = dx * dx + dy * dy;
            let s = g / (d2 * d2.sqrt());
            acc[2 * i] += masses[j] * s * dx;
            acc[2 * i + 1] += masses[j] * s * dy;
            acc[2 * j] -= masses[i] * s * dx;
            acc[2 * j + 1] -= masses[i] * s * dy;
        }
    }
}

/// Newtonian accelerations `a_k = sum_{n != k} G m_n (r_n - r_k) / |r_n - r_k|^3`.
pub fn nbody_accelerations(state: &SystemState, collision_epsilon: f64) -> Result<Vec<Vec2>> {
    let positions: Vec<Vec2> = state.bodies.iter().map(|b| b.position).collect();
    let (d, pair) = min_pairwise_distance(&positions);
    if d <= collision_epsilon {
        return Err(Error::CollisionDetected {
            pair,
            distance: d,
            t: state.t0,
        });
    }
    let flat: Vec<f64> = positions.iter().flat_map(|p| [p.x, p.y]).collect();
    let mut acc = vec![0.0; flat.len()];
    accumulate(state.g, &state.masses(), &flat, &mut acc);
    Ok(acc.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect())
}

/// Integrates the system from `state.t0`, sampling every body at `times`.
///
/// A collision (pair distance at or below `collision_epsilon_factor` times
/// the initial minimum distance) aborts with the time it was detected.
pub fn integrate_nbody(
    state: &SystemState,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<Trajectory<CartesianSample>>> {
    let (trajectories, collision) = integrate_nbody_until_collision(state, times, config)?;
    match collision {
        Some(e) => Err(e),
        None => Ok(trajectories),
    }
}

/// Like [`integrate_nbody`], but a collision ends the run cleanly: the
/// samples taken before it are kept, every trajectory is marked truncated
/// at the detection time, and the collision is returned alongside.
pub fn integrate_nbody_until_collision(
    state: &SystemState,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<(Vec<Trajectory<CartesianSample>>, Option<Error>)> {
    state.validate()?;
    let n = state.len();
    let masses = state.masses();
    let positions: Vec<Vec2> = state.bodies.iter().map(|b| b.position).collect();
    let (d0, pair0) = min_pairwise_distance(&positions);
    let epsilon = config.collision_epsilon_factor * d0;
    if d0 == 0.0 {
        return Err(Error::CollisionDetected {
            pair: pair0,
            distance: 0.0,
            t: state.t0,
        });
    }
    let mut y0 = Vec::with_capacity(4 * n);
    for b in &state.bodies {
        y0.extend([b.position.x, b.position.y]);
    }
    for b in &state.bodies {
        y0.extend([b.velocity.x, b.velocity.y]);
    }
    let g = state.g;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (pos, vel) = y.split_at(2 * n);
        let (dpos, dvel) = dy.split_at_mut(2 * n);
        dpos.copy_from_slice(vel);
        accumulate(g, &masses, pos, dvel);
    };
    let mut collision = None;
    let guard = |t: f64, y: &[f64]| -> Result<bool> {
        let pts: Vec<Vec2> = y[..2 * n].chunks(2).map(|c| Vec2::new(c[0], c[1])).collect();
        let (d, pair) = min_pairwise_distance(&pts);
        if d <= epsilon || !d.is_finite() {
            collision = Some(Error::CollisionDetected { pair, distance: d, t });
            return Ok(true);
        }
        Ok(false)
    };
    let sol = solve(rhs, state.t0, &y0, times, config, guard)?;
    let trajectories = (0..n)
        .map(|k| Trajectory {
            body_index: k,
            times: sol.times.clone(),
            samples: sol
                .states
                .iter()
                .map(|y| CartesianSample {
                    position: Vec2::new(y[2 * k], y[2 * k + 1]),
                    velocity: Vec2::new(y[2 * n + 2 * k], y[2 * n + 2 * k + 1]),
                })
                .collect(),
            truncated_at: sol.stopped_at,
        })
        .collect();
    Ok((trajectories, collision))
}
