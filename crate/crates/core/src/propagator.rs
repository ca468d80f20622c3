//! Closed-form propagation of one body's two-body analogue.
//!
//! With `A = 2G(m_k + M_k)`, `h = A / 2B` and the first-order expansion of
//! the separation integral, the separation obeys `x - h ln x = f(t)` with
//! `f` linear in time. Its explicit solution is
//! `x(t) = -h W(c4 exp(c5 t))`, and the radius and polar angle follow by
//! integrating `r'' = -G M_k / x^2` and `theta' = x0^2 theta_dot0 / x^2`
//! through the substitution `dt = (1 + W) / (c5 W) dW`.
//!
//! Internally the Lambert W argument is carried as
//! `s(t) = -ln(-c4 exp(c5 t)) = s0 + c2 (t - t0)` with `s0 = u0 - ln u0`,
//! `u0 = x0 / h`, which avoids underflow of the exponential and makes
//! `x(t0) = x0` exact on the `-1` branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambertw::{lambert_w, neg_w_of_neg_exp, Branch};
use crate::model::{polar_to_cartesian, PolarState, SystemState, Trajectory, Vec2};
use crate::reduction::{build_reduced_pair, ReducedPair, Xk0Mode};

/// Choice of the separation constant `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BMode {
    /// `B = A / x0^2`.
    #[default]
    Paper,
    /// `B = x_dot0^2 - A / x0`, the energy integral of the separation.
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// Follow the sign of `x_dot0`; zero falls back to infall.
    #[default]
    Auto,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// How `r(t)` and `theta(t)` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// The radial and angular formulas with positive powers of W, as
    /// typeset.
    AsPrinted,
    /// Exact antiderivatives through the W substitution.
    #[default]
    Rederived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorOptions {
    pub xk0_mode: Xk0Mode,
    pub b_mode: BMode,
    pub sign_mode: SignMode,
    pub eval_mode: EvalMode,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConstants {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
    pub c5: f64,
    pub h_a: f64,
    pub h1: f64,
    pub h2: f64,
    pub sign: Sign,
    /// True when `SignMode::Auto` met `x_dot0 = 0` and fell back to minus.
    pub sign_defaulted: bool,
    pub branch: Branch,
    pub b_mode: BMode,
    pub eval_mode: EvalMode,
    /// `-ln(-c4 exp(c5 t0))`.
    pub s0: f64,
    /// `W(c4 exp(c5 t0))` on the selected branch.
    pub w0: f64,
    /// Linear coefficient of the re-derived radius.
    pub h1_rederived: f64,
}

/// Derives every constant of the closed form for one reduced pair.
pub fn derive_constants(
    reduced: &ReducedPair,
    g: f64,
    pair_mass: f64,
    t0: f64,
    options: &PropagatorOptions,
) -> Result<PropagatorConstants> {
    let x0 = reduced.x0;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::NonPositiveX0(x0));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::NonPositiveGravity(g));
    }
    let a = 2.0 * g * pair_mass;
    let b = match options.b_mode {
        BMode::Paper => a / (x0 * x0),
        BMode::Consistent => reduced.x_dot0 * reduced.x_dot0 - a / x0,
    };
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::NonPositiveB(b));
    }
    let (sign, sign_defaulted) = match options.sign_mode {
        SignMode::Plus => (Sign::Plus, false),
        SignMode::Minus => (Sign::Minus, false),
        SignMode::Auto if reduced.x_dot0 > 0.0 => (Sign::Plus, false),
        SignMode::Auto if reduced.x_dot0 < 0.0 => (Sign::Minus, false),
        SignMode::Auto => (Sign::Minus, true),
    };
    let h = a / (2.0 * b);
    let inv_h = 2.0 * b / a;
    let c2 = sign.value() * inv_h * b.sqrt();
    let c5 = -c2;
    let c1 = -inv_h * (-inv_h * (x0 - h * x0.ln())).exp();
    let c4 = c1 * (c2 * t0).exp();

    let u0 = x0 / h;
    let s0 = u0 - u0.ln();
    let on_branch = match options.branch {
        Branch::MinusOne => u0 >= 1.0,
        Branch::Principal => u0 <= 1.0,
    };
    let w0 = if on_branch {
        -u0
    } else {
        -neg_w_of_neg_exp(options.branch, s0)?
    };

    let gm = g * reduced.companion_mass;
    let h_a = -4.0 * b * b * gm / (a * a);
    let h2 = h_a / (2.0 * c5);
    let h1 = reduced.r_dot0 - h_a / (2.0 * c5) * (1.0 + 2.0 * w0);
    let h1_rederived = reduced.r_dot0 - h_a / c5 * rate_primitive(w0);

    Ok(PropagatorConstants {
        a,
        b,
        h,
        c1,
        c2,
        c4,
        c5,
        h_a,
        h1,
        h2,
        sign,
        sign_defaulted,
        branch: options.branch,
        b_mode: options.b_mode,
        eval_mode: options.eval_mode,
        s0,
        w0,
        h1_rederived,
    })
}

/// `P(w) = -(1 + 2w) / (2 w^2)`, an antiderivative of `(1 + w) / w^3`.
fn rate_primitive(w: f64) -> f64 {
    -(1.0 + 2.0 * w) / (2.0 * w * w)
}

/// `Q(w) = 1/(4w^2) + 3/(2w) - ln(-w)`, satisfying `dQ/dt = c5 P(W)`.
fn position_primitive(w: f64) -> f64 {
    0.25 / (w * w) + 1.5 / w - (-w).ln()
}

/// `w^4/2 + w^3 + w^2/2`, the radial bracket as typeset.
fn printed_radial_bracket(w: f64) -> f64 {
    let w2 = w * w;
    0.5 * w2 * w2 + w2 * w + 0.5 * w2
}

/// `(1 + 2w) w^2`, the angular bracket as typeset.
fn printed_angular_bracket(w: f64) -> f64 {
    (1.0 + 2.0 * w) * w * w
}

/// Time interval on which the Lambert W argument stays in `[-1/e, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluableWindow {
    pub start: f64,
    pub end: f64,
}

impl EvaluableWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// The closed-form motion of one body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySolution {
    pub constants: PropagatorConstants,
    pub reduced: ReducedPair,
    pub t0: f64,
    pub g: f64,
    pub window: EvaluableWindow,
}

impl BodySolution {
    pub fn new(reduced: ReducedPair, g: f64, t0: f64, options: &PropagatorOptions) -> Result<Self> {
        let constants = derive_constants(&reduced, g, reduced.pair_mass(), t0, options)?;
        // s(t) reaches the branch point s = 1 after (s0 - 1) / |c2|.
        let reach = (constants.s0 - 1.0) / constants.c2.abs();
        let window = match constants.sign {
            Sign::Minus => EvaluableWindow {
                start: f64::NEG_INFINITY,
                end: t0 + reach,
            },
            Sign::Plus => EvaluableWindow {
                start: t0 - reach,
                end: f64::INFINITY,
            },
        };
        Ok(BodySolution {
            constants,
            reduced,
            t0,
            g,
            window,
        })
    }

    /// `-ln(-z(t))` for the Lambert W argument `z(t) = c4 exp(c5 t)`.
    pub fn log_argument(&self, t: f64) -> f64 {
        self.constants.s0 + self.constants.c2 * (t - self.t0)
    }

    /// The Lambert W argument `c4 exp(c5 t)` evaluated literally.
    pub fn w_argument(&self, t: f64) -> f64 {
        self.constants.c4 * (self.constants.c5 * t).exp()
    }

    /// `W(c4 exp(c5 t))` on the selected branch.
    pub fn w_of_t(&self, t: f64) -> Result<f64> {
        if t == self.t0 {
            return Ok(self.constants.w0);
        }
        let s = self.log_argument(t);
        // A time that rounds onto the window edge may leave s slightly below
        // 1; allow for the rounding of s0 + c2 (t - t0).
        let c = &self.constants;
        let slack = 1e-12 + 4.0 * f64::EPSILON * (c.s0.abs() + c.c2.abs() * (t.abs() + self.t0.abs()));
        if !(s >= 1.0 - slack) {
            let window_end = if t < self.t0 { self.window.start } else { self.window.end };
            return Err(Error::WArgOutOfDomain { t, window_end });
        }
        Ok(-neg_w_of_neg_exp(self.constants.branch, s.max(1.0))?)
    }

    /// Separation scalar `x(t) = -h W(c4 exp(c5 t))`.
    pub fn x_of_t(&self, t: f64) -> Result<f64> {
        Ok(-self.constants.h * self.w_of_t(t)?)
    }

    /// Rate of the closed-form separation, `sign sqrt(B) / (1 - h/x)`.
    pub fn x_dot_of_t(&self, t: f64) -> Result<f64> {
        let x = self.x_of_t(t)?;
        let c = &self.constants;
        Ok(c.sign.value() * c.b.sqrt() / (1.0 - c.h / x))
    }

    pub fn r_of_t(&self, t: f64) -> Result<f64> {
        let w = self.w_of_t(t)?;
        let c = &self.constants;
        let w0 = c.w0;
        let dt = t - self.t0;
        let r0 = self.reduced.r0;
        Ok(match c.eval_mode {
            EvalMode::Rederived => {
                r0 + c.h1_rederived * dt
                    + c.h_a / (c.c5 * c.c5) * (position_primitive(w) - position_primitive(w0))
            }
            EvalMode::AsPrinted => {
                r0 + c.h1 * dt
                    + c.h2 / c.c5 * (printed_radial_bracket(w) - printed_radial_bracket(w0))
            }
        })
    }

    /// Radial rate of the re-derived radius, `r_dot0 + (h_a/c5)(P(W) - P(W0))`.
    pub fn r_dot_of_t(&self, t: f64) -> Result<f64> {
        let w = self.w_of_t(t)?;
        let c = &self.constants;
        Ok(self.reduced.r_dot0 + c.h_a / c.c5 * (rate_primitive(w) - rate_primitive(c.w0)))
    }

    /// Cumulative (unwrapped) polar angle.
    pub fn theta_of_t(&self, t: f64) -> Result<f64> {
        let w = self.w_of_t(t)?;
        let c = &self.constants;
        let th0 = self.reduced.theta0;
        let lz = self.reduced.x0 * self.reduced.x0 * self.reduced.theta_dot0;
        if lz == 0.0 {
            return Ok(th0);
        }
        let k = lz / (c.h * c.h * c.c5);
        Ok(match c.eval_mode {
            EvalMode::Rederived => th0 + k * (rate_primitive(w) - rate_primitive(c.w0)),
            EvalMode::AsPrinted => {
                th0 + k * (printed_angular_bracket(c.w0) - printed_angular_bracket(w))
            }
        })
    }

    /// Angular rate `x0^2 theta_dot0 / x(t)^2`.
    pub fn theta_dot_of_t(&self, t: f64) -> Result<f64> {
        let x = self.x_of_t(t)?;
        let x0 = self.reduced.x0;
        Ok(x0 * x0 * self.reduced.theta_dot0 / (x * x))
    }

    pub fn sample(&self, t: f64) -> Result<ClosedFormSample> {
        let x = self.x_of_t(t)?;
        let r = self.r_of_t(t)?;
        let theta = self.theta_of_t(t)?;
        let (position, _) = polar_to_cartesian(&PolarState {
            r,
            theta,
            r_dot: 0.0,
            theta_dot: 0.0,
        });
        Ok(ClosedFormSample {
            x,
            r,
            theta,
            position,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSample {
    pub x: f64,
    pub r: f64,
    /// Cumulative angle, not wrapped.
    pub theta: f64,
    /// `(r cos theta, r sin theta)`.
    pub position: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyRun {
    pub solution: BodySolution,
    pub trajectory: Trajectory<ClosedFormSample>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("body {body_index}: {error}")]
pub struct BodyError {
    pub body_index: usize,
    pub error: Error,
}

/// Propagates every body independently through its own two-body analogue.
///
/// The state is first moved to the centre-of-mass frame. A body whose
/// constants cannot be built yields a [`BodyError`] without affecting the
/// others; a body whose closed form leaves its window is truncated at the
/// first time outside it.
pub fn propagate_system(
    state: &SystemState,
    times: &[f64],
    options: &PropagatorOptions,
) -> Result<Vec<std::result::Result<BodyRun, BodyError>>> {
    let state = state.to_com_frame()?;
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < state.t0) {
        return Err(Error::BadTimes);
    }
    Ok((0..state.len())
        .map(|k| {
            let tag = |error| BodyError { body_index: k, error };
            let pair = build_reduced_pair(k, &state, options.xk0_mode).map_err(tag)?;
            let solution = BodySolution::new(pair, state.g, state.t0, options).map_err(tag)?;
            let mut trajectory = Trajectory {
                body_index: k,
                times: Vec::with_capacity(times.len()),
                samples: Vec::with_capacity(times.len()),
                truncated_at: None,
            };
            for &t in times {
                match solution.sample(t) {
                    Ok(s) => {
                        trajectory.times.push(t);
                        trajectory.samples.push(s);
                    }
                    Err(Error::WArgOutOfDomain { t, .. }) => {
                        trajectory.truncated_at = Some(t);
                        break;
                    }
                    Err(e) => return Err(tag(e)),
                }
            }
            Ok(BodyRun { solution, trajectory })
        })
        .collect())
}

/// Convenience: `W` evaluated through the literal argument, used to check
/// that the logarithmic route agrees with the direct one.
pub fn w_direct(solution: &BodySolution, t: f64) -> Result<f64> {
    lambert_w(solution.constants.branch, solution.w_argument(t))
}
