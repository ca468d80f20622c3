use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    #[default]
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Relative and absolute local error target for the adaptive method.
    pub tolerance: f64,
    /// Step size for the fixed-step method.
    pub step: f64,
    pub max_steps: usize,
    /// Collision threshold as a fraction of the initial minimum pairwise
    /// distance.
    pub collision_epsilon_factor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive,
            tolerance: 1e-10,
            step: 1e-3,
            max_steps: 1_000_000,
            collision_epsilon_factor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Time at which the stop predicate fired, if it did.
    pub stopped_at: Option<f64>,
    pub steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stages {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize, count: usize) -> Self {
        Stages {
            k: vec![vec![0.0; n]; count],
            tmp: vec![0.0; n],
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` and samples at `times`.
///
/// `times` must be ascending with `times[0] >= t0`. Steps are clipped to land
/// on every output time exactly. After each accepted step `stop(t, y)` may
/// end the run early; it returns `Ok(true)` to stop cleanly or an error to
/// abort.
pub fn solve<F, S>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    config: &IntegratorConfig,
    mut stop: S,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> Result<bool>,
{
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::BadTimes);
    }
    let n = y0.len();
    let mut out = OdeSolution {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        stopped_at: None,
        steps: 0,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    if stop(t, &y)? {
        out.stopped_at = Some(t);
        return Ok(out);
    }
    let span = times.last().map_or(0.0, |&tf| tf - t0);
    let mut h = match config.method {
        Method::Rk4Fixed => config.step,
        Method::Rk45Adaptive => initial_step(&mut rhs, t0, &y, span, config.tolerance),
    };
    let mut stages = Stages::new(n, 7);
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    for &target in times {
        while t < target {
            if out.steps >= config.max_steps {
                return Err(Error::MaxStepsExceeded(config.max_steps));
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(Error::StepSizeUnderflow(t));
            }
            let accepted = match config.method {
                Method::Rk4Fixed => {
                    rk4_step(&mut rhs, t, &y, step, &mut stages, &mut y_new);
                    true
                }
                Method::Rk45Adaptive => {
                    dopri_step(&mut rhs, t, &y, step, &mut stages, &mut y_new, &mut err);
                    let e = error_norm(&y, &y_new, &err, config.tolerance);
                    let factor = if e == 0.0 {
                        5.0
                    } else {
                        (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    let ok = e <= 1.0 && y_new.iter().all(|v| v.is_finite());
                    if !ok || !clipped {
                        h = if e.is_finite() { step * factor } else { 0.2 * step };
                    }
                    ok
                }
            };
            out.steps += 1;
            if !accepted {
                continue;
            }
            t = if clipped { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            if stop(t, &y)? {
                out.stopped_at = Some(t);
                return Ok(out);
            }
        }
        out.times.push(target);
        out.states.push(y.clone());
    }
    Ok(out)
}

fn initial_step<F>(rhs: &mut F, t0: f64, y: &[f64], span: f64, tol: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut f0 = vec![0.0; y.len()];
    rhs(t0, y, &mut f0);
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let guess = if d0 > 1e-5 && d1 > 1e-5 {
        0.01 * d0 / d1
    } else {
        1e-6
    };
    let guess = guess * (tol / 1e-6).powf(0.2).min(1.0);
    if span > 0.0 {
        guess.min(span)
    } else {
        guess
    }
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], tol: f64) -> f64 {
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = tol + tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / y.len() as f64).sqrt()
}

fn dopri_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    st: &mut Stages,
    y_new: &mut [f64],
    err: &mut [f64],
) where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    for s in 0..7 {
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..s {
                acc += h * A[s][j] * st.k[j][i];
            }
            st.tmp[i] = acc;
        }
        rhs(t + C[s] * h, &st.tmp, &mut st.k[s]);
    }
    for i in 0..n {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for s in 0..7 {
            hi += B5[s] * st.k[s][i];
            lo += B4[s] * st.k[s][i];
        }
        y_new[i] = y[i] + h * hi;
        err[i] = h * (hi - lo);
    }
}

fn rk4_step<F>(rhs: &mut F, t: f64, y: &[f64], h: f64, st: &mut Stages, y_new: &mut [f64])
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let nodes = [0.0, 0.5, 0.5, 1.0];
    for s in 0..4 {
        for i in 0..n {
            st.tmp[i] = if s == 0 {
                y[i]
            } else {
                y[i] + nodes[s] * h * st.k[s - 1][i]
            };
        }
        rhs(t + nodes[s] * h, &st.tmp, &mut st.k[s]);
    }
    for i in 0..n {
        y_new[i] = y[i] + h / 6.0 * (st.k[0][i] + 2.0 * st.k[1][i] + 2.0 * st.k[2][i] + st.k[3][i]);
    }
}
