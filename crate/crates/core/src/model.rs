//! Planar point-mass state and the centre-of-mass frame.

use std::f64::consts::PI;

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    pub mass: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl Body {
    pub fn new(name: impl Into<String>, mass: f64, position: Vec2, velocity: Vec2) -> Self {
        Body {
            name: name.into(),
            mass,
            position,
            velocity,
        }
    }
}

/// N gravitating point masses at epoch `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub g: f64,
    pub bodies: Vec<Body>,
    pub t0: f64,
}

impl SystemState {
    /// Validates masses, finiteness, `G` and body count.
    pub fn new(g: f64, bodies: Vec<Body>, t0: f64) -> Result<Self> {
        let state = SystemState { g, bodies, t0 };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::NonPositiveGravity(self.g));
        }
        if self.bodies.len() < 2 {
            return Err(Error::FewerThanTwoBodies(self.bodies.len()));
        }
        for (index, b) in self.bodies.iter().enumerate() {
            if !(b.mass.is_finite() && b.mass > 0.0) {
                return Err(Error::NonPositiveMass {
                    index,
                    mass: b.mass,
                });
            }
            if !(b.position.iter().chain(b.velocity.iter()).all(|c| c.is_finite())) {
                return Err(Error::NonFiniteState(index));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.bodies.iter().map(|b| b.mass).collect()
    }

    /// Mass-weighted mean position and velocity.
    pub fn center_of_mass(&self) -> (Vec2, Vec2) {
        let total = self.total_mass();
        let mut pos = Vec2::zeros();
        let mut vel = Vec2::zeros();
        for b in &self.bodies {
            pos += b.mass * b.position;
            vel += b.mass * b.velocity;
        }
        (pos / total, vel / total)
    }

    /// Largest |position| over the bodies, used to scale frame tolerances.
    pub fn length_scale(&self) -> f64 {
        self.bodies
            .iter()
            .map(|b| b.position.norm())
            .fold(0.0, f64::max)
    }

    /// Translates and boosts into the frame where the centre of mass sits
    /// at rest at the origin.
    pub fn to_com_frame(&self) -> Result<SystemState> {
        self.validate()?;
        let (pos, vel) = self.center_of_mass();
        let bodies = self
            .bodies
            .iter()
            .map(|b| Body {
                name: b.name.clone(),
                mass: b.mass,
                position: b.position - pos,
                velocity: b.velocity - vel,
            })
            .collect();
        Ok(SystemState {
            g: self.g,
            bodies,
            t0: self.t0,
        })
    }

    /// Total kinetic plus pairwise potential energy.
    pub fn energy(&self) -> f64 {
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        for (i, a) in self.bodies.iter().enumerate() {
            kinetic += 0.5 * a.mass * a.velocity.norm_squared();
            for b in &self.bodies[i + 1..] {
                potential -= self.g * a.mass * b.mass / (a.position - b.position).norm();
            }
        }
        kinetic + potential
    }

    pub fn momentum(&self) -> Vec2 {
        self.bodies
            .iter()
            .fold(Vec2::zeros(), |acc, b| acc + b.mass * b.velocity)
    }

    /// Scalar (z-component) angular momentum about the origin.
    pub fn angular_momentum(&self) -> f64 {
        self.bodies
            .iter()
            .map(|b| b.mass * cross(&b.position, &b.velocity))
            .sum()
    }
}

/// z-component of the planar cross product.
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Reduces an angle to (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Polar coordinates of a planar point and their rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
}

pub fn cartesian_to_polar(position: &Vec2, velocity: &Vec2) -> Result<PolarState> {
    let r = position.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::OriginSingularity);
    }
    Ok(PolarState {
        r,
        theta: position.y.atan2(position.x),
        r_dot: position.dot(velocity) / r,
        theta_dot: cross(position, velocity) / (r * r),
    })
}

pub fn polar_to_cartesian(p: &PolarState) -> (Vec2, Vec2) {
    let (s, c) = p.theta.sin_cos();
    let radial = Vec2::new(c, s);
    let transverse = Vec2::new(-s, c);
    (
        p.r * radial,
        p.r_dot * radial + p.r * p.theta_dot * transverse,
    )
}

/// Samples of one body (or one scalar quantity) on an ascending time grid.
///
/// When a run stops early, `samples` covers only the times reached and
/// `truncated_at` carries the stop time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub body_index: usize,
    pub times: Vec<f64>,
    pub samples: Vec<S>,
    pub truncated_at: Option<f64>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_at.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn body(mass: f64, p: (f64, f64), v: (f64, f64)) -> Body {
        Body::new("b", mass, Vec2::new(p.0, p.1), Vec2::new(v.0, v.1))
    }

    #[test]
    fn symmetric_pair_is_already_com() {
        let s = SystemState::new(
            1.0,
            vec![body(1.0, (1.0, 0.0), (0.0, 0.0)), body(1.0, (-1.0, 0.0), (0.0, 0.0))],
            0.0,
        )
        .unwrap();
        assert_eq!(s.to_com_frame().unwrap(), s);
    }

    #[test]
    fn com_shift_by_weighted_mean() {
        let s = SystemState::new(
            1.0,
            vec![body(1.0, (0.0, 0.0), (0.0, 0.0)), body(3.0, (4.0, 0.0), (0.0, 0.0))],
            0.0,
        )
        .unwrap();
        let c = s.to_com_frame().unwrap();
        assert_eq!(c.bodies[0].position, Vec2::new(-3.0, 0.0));
        assert_eq!(c.bodies[1].position, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn zero_momentum_is_left_alone() {
        let s = SystemState::new(
            1.0,
            vec![body(1.0, (0.0, 0.0), (1.0, 0.0)), body(1.0, (0.0, 0.0), (-1.0, 0.0))],
            0.0,
        )
        .unwrap();
        assert_eq!(s.to_com_frame().unwrap(), s);
    }

    #[test]
    fn rejects_bad_systems() {
        let one = vec![body(1.0, (1.0, 0.0), (0.0, 0.0))];
        assert_eq!(
            SystemState::new(1.0, one, 0.0),
            Err(Error::FewerThanTwoBodies(1))
        );
        let neg = vec![body(1.0, (1.0, 0.0), (0.0, 0.0)), body(-2.0, (0.0, 0.0), (0.0, 0.0))];
        assert!(matches!(
            SystemState::new(1.0, neg, 0.0),
            Err(Error::NonPositiveMass { index: 1, .. })
        ));
        let nan = vec![body(1.0, (f64::NAN, 0.0), (0.0, 0.0)), body(1.0, (0.0, 0.0), (0.0, 0.0))];
        assert_eq!(SystemState::new(1.0, nan, 0.0), Err(Error::NonFiniteState(0)));
    }

    #[test]
    fn polar_examples() {
        let p = cartesian_to_polar(&Vec2::new(0.0, 2.0), &Vec2::new(-1.0, 0.0)).unwrap();
        assert_eq!(p.r, 2.0);
        assert_relative_eq!(p.theta, PI / 2.0);
        assert_eq!(p.r_dot, 0.0);
        assert_eq!(p.theta_dot, 0.5);

        let p = cartesian_to_polar(&Vec2::new(3.0, 4.0), &Vec2::new(0.6, 0.8)).unwrap();
        assert_eq!(p.r, 5.0);
        assert_relative_eq!(p.r_dot, 1.0);
        assert!(p.theta_dot.abs() < 1e-15);

        let p = cartesian_to_polar(&Vec2::new(1.0, 0.0), &Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!((p.r, p.theta, p.r_dot, p.theta_dot), (1.0, 0.0, 0.0, 1.0));

        assert_eq!(
            cartesian_to_polar(&Vec2::zeros(), &Vec2::new(1.0, 0.0)),
            Err(Error::OriginSingularity)
        );
    }

    #[test]
    fn cartesian_examples() {
        let (x, v) = polar_to_cartesian(&PolarState {
            r: 2.0,
            theta: PI / 2.0,
            r_dot: 0.0,
            theta_dot: 0.5,
        });
        assert_relative_eq!(x, Vec2::new(0.0, 2.0), epsilon = 1e-15);
        assert_relative_eq!(v, Vec2::new(-1.0, 0.0), epsilon = 1e-15);

        let (x, v) = polar_to_cartesian(&PolarState {
            r: 1.0,
            theta: 0.0,
            r_dot: 0.0,
            theta_dot: 0.0,
        });
        assert_eq!((x, v), (Vec2::new(1.0, 0.0), Vec2::zeros()));

        let (x, v) = polar_to_cartesian(&PolarState {
            r: 5.0,
            theta: 4f64.atan2(3.0),
            r_dot: 1.0,
            theta_dot: 0.0,
        });
        assert_relative_eq!(x, Vec2::new(3.0, 4.0), max_relative = 1e-15);
        assert_relative_eq!(v, Vec2::new(0.6, 0.8), max_relative = 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0);
        assert_relative_eq!(wrap_angle(7.0), 7.0 - 2.0 * PI);
    }

    fn arb_state() -> impl Strategy<Value = SystemState> {
        prop::collection::vec(
            (0.1f64..10.0, -5.0f64..5.0, -5.0f64..5.0, -2.0f64..2.0, -2.0f64..2.0),
            2..6,
        )
        .prop_map(|v| {
            let bodies = v
                .into_iter()
                .map(|(m, x, y, vx, vy)| body(m, (x, y), (vx, vy)))
                .collect();
            SystemState::new(1.0, bodies, 0.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn com_frame_is_idempotent_and_rigid(s in arb_state()) {
            let once = s.to_com_frame().unwrap();
            let twice = once.to_com_frame().unwrap();
            let scale = s.length_scale().max(1.0);
            let (p, v) = once.center_of_mass();
            prop_assert!(p.norm() <= 1e-12 * scale);
            prop_assert!(v.norm() <= 1e-12 * scale);
            for (a, b) in once.bodies.iter().zip(&twice.bodies) {
                prop_assert!((a.position - b.position).norm() <= 1e-12 * scale);
                prop_assert!((a.velocity - b.velocity).norm() <= 1e-12 * scale);
            }
            for i in 0..s.len() {
                for j in 0..s.len() {
                    let d0 = (s.bodies[i].position - s.bodies[j].position).norm();
                    let d1 = (once.bodies[i].position - once.bodies[j].position).norm();
                    prop_assert!((d0 - d1).abs() <= 1e-12 * scale);
                    let w0 = s.bodies[i].velocity - s.bodies[j].velocity;
                    let w1 = once.bodies[i].velocity - once.bodies[j].velocity;
                    prop_assert!((w0 - w1).norm() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn polar_round_trip(r in 1e-3f64..1e3, theta in -3.1f64..3.1,
                            r_dot in -10.0f64..10.0, theta_dot in -10.0f64..10.0) {
            let p = PolarState { r, theta, r_dot, theta_dot };
            let (x, v) = polar_to_cartesian(&p);
            let q = cartesian_to_polar(&x, &v).unwrap();
            prop_assert!((q.r - r).abs() <= 1e-12 * r);
            prop_assert!((q.theta - theta).abs() <= 1e-12 * theta.abs().max(1.0));
            let vs = r_dot.abs().max(r * theta_dot.abs()).max(1e-300);
            prop_assert!((q.r_dot - r_dot).abs() <= 1e-12 * vs);
            prop_assert!((q.theta_dot - theta_dot).abs() * r <= 1e-12 * vs);
        }
    }
}
