//! Scalar separation ODEs: the second-order radial equation
//! `x'' = -A / (2 x^2)` and its first integral `x' = ±sqrt(A/x + B)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::PropagatorConstants;
use crate::reduction::ReducedPair;

use super::ode::{solve, IntegratorConfig};
use crate::model::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarForm {
    /// Second-order system from `(x0, x_dot0)`.
    Ode4c,
    /// First-order energy form with a fixed sign and constant `B`.
    Ode5a,
}

/// Data for the separation equations of one reduced pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationOde {
    /// `2 G (m_k + M_k)`.
    pub a: f64,
    pub b: f64,
    /// +1 or -1.
    pub sign: f64,
    pub x0: f64,
    pub x_dot0: f64,
}

impl SeparationOde {
    pub fn from_constants(c: &PropagatorConstants, pair: &ReducedPair) -> Self {
        SeparationOde {
            a: c.a,
            b: c.b,
            sign: c.sign.value(),
            x0: pair.x0,
            x_dot0: pair.x_dot0,
        }
    }

    /// Energy-consistent `B` for the second-order equation.
    pub fn energy_constant(&self) -> f64 {
        self.x_dot0 * self.x_dot0 - self.a / self.x0
    }

    pub fn radicand(&self, x: f64) -> f64 {
        self.a / x + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSample {
    pub x: f64,
    pub x_dot: f64,
}

/// Integrates the separation scalar with the chosen form.
///
/// Both forms stop cleanly (marking the trajectory truncated) when the
/// separation reaches zero; the energy form also stops when its radicand
/// drops below `1e-14 |B|`, i.e. at a radial turning point.
pub fn integrate_scalar_x(
    ode: &SeparationOde,
    t0: f64,
    times: &[f64],
    config: &IntegratorConfig,
    form: ScalarForm,
) -> Result<Trajectory<ScalarSample>> {
    if !(ode.x0 > 0.0) {
        return Err(Error::NonPositiveX0(ode.x0));
    }
    let turning = 1e-14 * ode.b.abs();
    let (times_out, samples, stopped_at) = match form {
        ScalarForm::Ode4c => {
            let half_a = 0.5 * ode.a;
            let sol = solve(
                |_t, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -half_a / (y[0] * y[0]);
                },
                t0,
                &[ode.x0, ode.x_dot0],
                times,
                config,
                |_t, y| Ok(!(y[0] > 0.0) || !y[1].is_finite()),
            )?;
            let samples = sol
                .states
                .iter()
                .map(|y| ScalarSample { x: y[0], x_dot: y[1] })
                .collect();
            (sol.times, samples, sol.stopped_at)
        }
        ScalarForm::Ode5a => {
            let r0 = ode.radicand(ode.x0);
            if r0 < 0.0 {
                return Err(Error::RadicandNegative(r0));
            }
            let rate = |x: f64| ode.sign * ode.radicand(x).max(0.0).sqrt();
            let sol = solve(
                |_t, y, dy| dy[0] = rate(y[0]),
                t0,
                &[ode.x0],
                times,
                config,
                |_t, y| Ok(!(y[0] > 0.0) || ode.radicand(y[0]) <= turning),
            )?;
            let samples = sol
                .states
                .iter()
                .map(|y| ScalarSample { x: y[0], x_dot: rate(y[0]) })
                .collect();
            (sol.times, samples, sol.stopped_at)
        }
    };
    Ok(Trajectory {
        body_index: 0,
        times: times_out,
        samples,
        truncated_at: stopped_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn energy_form_infall_decreases() {
        let ode = SeparationOde { a: 12.0, b: 48.0, sign: -1.0, x0: 0.5, x_dot0: 0.0 };
        let tr = integrate_scalar_x(&ode, 0.0, &grid(20, 0.01), &IntegratorConfig::default(), ScalarForm::Ode5a).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].x < w[0].x));
    }

    #[test]
    fn second_order_from_rest_falls() {
        let ode = SeparationOde { a: 2.0, b: 0.0, sign: -1.0, x0: 1.0, x_dot0: 0.0 };
        let tr = integrate_scalar_x(&ode, 0.0, &grid(20, 0.5), &IntegratorConfig::default(), ScalarForm::Ode4c).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].x < w[0].x));
        assert!(tr.samples.iter().all(|s| -0.5 * ode.a / (s.x * s.x) < 0.0));
    }

    #[test]
    fn both_forms_agree_with_consistent_constant() {
        let a = 2.0;
        let x0 = 1.0;
        let x_dot0 = 3.0;
        let mut ode = SeparationOde { a, b: 0.0, sign: 1.0, x0, x_dot0 };
        ode.b = ode.energy_constant();
        let times = grid(50, 2.0);
        let cfg = IntegratorConfig::default();
        let t4 = integrate_scalar_x(&ode, 0.0, &times, &cfg, ScalarForm::Ode4c).unwrap();
        let t5 = integrate_scalar_x(&ode, 0.0, &times, &cfg, ScalarForm::Ode5a).unwrap();
        for (p, q) in t4.samples.iter().zip(&t5.samples) {
            assert!((p.x - q.x).abs() <= 1e-8 * q.x);
        }
    }

    #[test]
    fn energy_form_stops_at_turning_point() {
        // Bound outward motion: B < 0, turning point at x = A / -B = 2.
        let ode = SeparationOde { a: 2.0, b: -1.0, sign: 1.0, x0: 1.0, x_dot0: 1.0 };
        let tr = integrate_scalar_x(&ode, 0.0, &grid(100, 10.0), &IntegratorConfig::default(), ScalarForm::Ode5a).unwrap();
        assert!(tr.is_truncated());
        assert!(tr.samples.iter().all(|s| s.x < 2.0 + 1e-9));
        let bad = SeparationOde { b: -3.0, ..ode };
        assert!(matches!(
            integrate_scalar_x(&bad, 0.0, &[1.0], &IntegratorConfig::default(), ScalarForm::Ode5a),
            Err(Error::RadicandNegative(_))
        ));
    }
}
