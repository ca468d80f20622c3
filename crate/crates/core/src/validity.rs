//! Checks the assumptions the closed form rests on and reports a verdict.
//!
//! Hard conditions (checked at the epoch): a positive separation constant
//! `B`, the binomial condition `x0 > A/B`, `|theta_dot| < 1`, no collision,
//! and a constructible reduced pair. Soft conditions: `|theta_dot|` above
//! the warning threshold, collinearity drift of the body against its
//! companion, and loss of the binomial margin later along the trajectory.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{cartesian_to_polar, SystemState, Trajectory, Vec2};
use crate::oracle::{min_pairwise_distance, CartesianSample};
use crate::propagator::{BMode, BodyError, BodyRun, BodySolution, PropagatorOptions};
use crate::reduction::{build_reduced_pair, collinearity_deviation, companion_com};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// `|theta_dot|` above this only warns.
    pub theta_dot_soft: f64,
    /// `|theta_dot|` at or above this fails the scenario.
    pub theta_dot_hard: f64,
    /// Pair distance at or below this counts as a collision at the epoch.
    pub collision_distance: f64,
    /// Collinearity deviation (radians) above which a warning is raised.
    pub collinearity_warn: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            theta_dot_soft: 0.1,
            theta_dot_hard: 1.0,
            collision_distance: 0.0,
            collinearity_warn: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Warned,
    Invalid,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Warned => "warned",
            Verdict::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub body_index: Option<usize>,
    pub severity: Severity,
    pub code: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyValidity {
    pub body_index: usize,
    /// NaN when the reduced pair itself could not be built.
    pub b_value: f64,
    pub b_positive: bool,
    /// `x0 B / A`; the binomial expansion needs this above 1.
    pub binomial_margin: f64,
    pub binomial_ok: bool,
    /// First sampled time at which the closed-form margin fell to 1 or below.
    pub binomial_violated_at: Option<f64>,
    pub theta_dot_max: f64,
    pub theta_dot_ok: bool,
    /// End of the evaluable window; infinite when unbounded, NaN when the
    /// solution could not be built.
    pub window_end: f64,
    pub collinearity_deviation_max: f64,
    pub constructible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub bodies: Vec<BodyValidity>,
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
}

impl ValidityReport {
    fn finish(mut self) -> Self {
        self.verdict = if self.findings.iter().any(|f| f.severity == Severity::Hard) {
            Verdict::Invalid
        } else if self.findings.is_empty() {
            Verdict::Valid
        } else {
            Verdict::Warned
        };
        self
    }

    fn push(&mut self, body_index: Option<usize>, severity: Severity, code: &'static str, detail: String) {
        self.findings.push(Finding {
            body_index,
            severity,
            code,
            detail,
        });
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::NonPositiveMass { .. } => "NonPositiveMass",
        Error::FewerThanTwoBodies(_) => "FewerThanTwoBodies",
        Error::NonPositiveGravity(_) => "NonPositiveGravity",
        Error::NonFiniteState(_) => "NonFiniteState",
        Error::OriginSingularity => "OriginSingularity",
        Error::NonPositiveB(_) => "NonPositiveB",
        Error::NonPositiveX0(_) => "NonPositiveX0",
        Error::DomainError { .. } => "DomainError",
        Error::NoConvergence(_) => "NoConvergence",
        _ => "ConstructionError",
    }
}

/// Evaluates every epoch condition for every body. Never fails: problems
/// become findings.
pub fn check_scenario(
    state: &SystemState,
    options: &PropagatorOptions,
    thresholds: &Thresholds,
) -> ValidityReport {
    let mut report = ValidityReport {
        bodies: Vec::new(),
        verdict: Verdict::Valid,
        findings: Vec::new(),
    };
    let com = match state.to_com_frame() {
        Ok(s) => s,
        Err(e) => {
            report.push(None, Severity::Hard, error_code(&e), e.to_string());
            return report.finish();
        }
    };

    let positions: Vec<Vec2> = com.bodies.iter().map(|b| b.position).collect();
    let (d, (i, j)) = min_pairwise_distance(&positions);
    if d <= thresholds.collision_distance {
        report.push(
            None,
            Severity::Hard,
            "CollisionDetected",
            format!("bodies {i} and {j} are {d:?} apart at the epoch"),
        );
    }

    for k in 0..com.len() {
        let mut body = BodyValidity {
            body_index: k,
            b_value: f64::NAN,
            b_positive: false,
            binomial_margin: f64::NAN,
            binomial_ok: false,
            binomial_violated_at: None,
            theta_dot_max: f64::NAN,
            theta_dot_ok: false,
            window_end: f64::NAN,
            collinearity_deviation_max: 0.0,
            constructible: false,
        };
        let pair = match build_reduced_pair(k, &com, options.xk0_mode) {
            Ok(p) => p,
            Err(e) => {
                report.push(Some(k), Severity::Hard, error_code(&e), e.to_string());
                report.bodies.push(body);
                continue;
            }
        };
        let a = 2.0 * com.g * pair.pair_mass();
        let b = match options.b_mode {
            BMode::Paper => a / (pair.x0 * pair.x0),
            BMode::Consistent => pair.x_dot0 * pair.x_dot0 - a / pair.x0,
        };
        body.b_value = b;
        body.b_positive = b > 0.0 && b.is_finite();
        body.binomial_margin = pair.x0 * b / a;
        body.binomial_ok = body.b_positive && body.binomial_margin > 1.0;
        body.theta_dot_max = pair.theta_dot0.abs();
        body.theta_dot_ok = body.theta_dot_max < thresholds.theta_dot_hard;

        if !body.b_positive {
            report.push(
                Some(k),
                Severity::Hard,
                "NonPositiveB",
                format!("B = {b:?} must be positive"),
            );
        } else if !body.binomial_ok {
            report.push(
                Some(k),
                Severity::Hard,
                "BinomialViolated",
                format!("|x0| = {:?} does not exceed A/B = {:?}", pair.x0, a / b),
            );
        }
        if options.b_mode == BMode::Paper && pair.x0 >= 1.0 {
            report.push(
                Some(k),
                Severity::Soft,
                "RescaleLengths",
                format!(
                    "x0 = {:?} >= 1 with B = A/x0^2 can never satisfy x0 > x0^2; rescale lengths so every separation is below 1",
                    pair.x0
                ),
            );
        }
        if !body.theta_dot_ok {
            report.push(
                Some(k),
                Severity::Hard,
                "AngularRateTooLarge",
                format!(
                    "|theta_dot| = {:?} is not below {:?} rad/time",
                    body.theta_dot_max, thresholds.theta_dot_hard
                ),
            );
        } else if body.theta_dot_max > thresholds.theta_dot_soft {
            report.push(
                Some(k),
                Severity::Soft,
                "AngularRateHigh",
                format!(
                    "|theta_dot| = {:?} exceeds the warning level {:?}",
                    body.theta_dot_max, thresholds.theta_dot_soft
                ),
            );
        }

        match BodySolution::new(pair, com.g, com.t0, options) {
            Ok(sol) => {
                body.constructible = true;
                body.window_end = sol.window.end;
                // On a branch that does not contain x0 the closed form starts
                // from the other root of x - h ln x = const, below h < A/B.
                let x_start = -sol.constants.h * sol.constants.w0;
                if body.binomial_ok && x_start * b / a <= 1.0 {
                    body.binomial_ok = false;
                    report.push(
                        Some(k),
                        Severity::Hard,
                        "BinomialViolated",
                        format!(
                            "the {:?} branch starts the closed form at x = {x_start:?}, not x0 = {:?}, and not above A/B = {:?}",
                            options.branch,
                            pair.x0,
                            a / b
                        ),
                    );
                }
                if sol.constants.sign_defaulted {
                    report.push(
                        Some(k),
                        Severity::Soft,
                        "SignDefaulted",
                        "x_dot0 = 0; infalling branch of the separation assumed".to_string(),
                    );
                }
            }
            Err(e) => {
                // Already reported above when it is the B condition.
                if !matches!(e, Error::NonPositiveB(_)) {
                    report.push(Some(k), Severity::Hard, error_code(&e), e.to_string());
                }
            }
        }
        report.bodies.push(body);
    }
    report.finish()
}

/// Extends an epoch report with diagnostics taken along the trajectories.
///
/// Records per body the largest collinearity deviation between `r_k` and
/// `-r_Mk` (from the direct integration), the largest `|theta_dot|` seen in
/// either solution, and the first time the closed-form binomial margin
/// `x(t) B / A` drops to 1 or below. Findings added here are warnings only.
pub fn check_trajectory(
    report: &ValidityReport,
    state: &SystemState,
    runs: &[std::result::Result<BodyRun, BodyError>],
    oracle: Option<&[Trajectory<CartesianSample>]>,
    thresholds: &Thresholds,
) -> ValidityReport {
    let mut out = report.clone();
    let masses = state.masses();
    for body in out.bodies.iter_mut() {
        let k = body.body_index;
        if let Some(Ok(run)) = runs.get(k) {
            let sol = &run.solution;
            let c = &sol.constants;
            for (&t, s) in run.trajectory.times.iter().zip(&run.trajectory.samples) {
                let margin = s.x * c.b / c.a;
                if margin <= 1.0 && body.binomial_violated_at.is_none() {
                    body.binomial_violated_at = Some(t);
                }
                if let Ok(rate) = sol.theta_dot_of_t(t) {
                    body.theta_dot_max = body.theta_dot_max.max(rate.abs());
                }
            }
        }
        if let Some(trajs) = oracle {
            let n = trajs.len();
            let samples = trajs.first().map_or(0, |t| t.samples.len());
            for i in 0..samples {
                let bodies: Vec<crate::model::Body> = (0..n)
                    .map(|m| {
                        let s = trajs[m].samples[i];
                        crate::model::Body::new("", masses[m], s.position, s.velocity)
                    })
                    .collect();
                let snapshot = SystemState {
                    g: state.g,
                    bodies,
                    t0: state.t0,
                };
                let own = &snapshot.bodies[k];
                if let Ok(polar) = cartesian_to_polar(&own.position, &own.velocity) {
                    body.theta_dot_max = body.theta_dot_max.max(polar.theta_dot.abs());
                }
                if let Ok((cp, _)) = companion_com(k, &snapshot) {
                    if own.position.norm() > 0.0 && cp.norm() > 0.0 {
                        let dev = collinearity_deviation(&own.position, &cp);
                        body.collinearity_deviation_max = body.collinearity_deviation_max.max(dev);
                    }
                }
            }
        }
    }
    let bodies = out.bodies.clone();
    for body in &bodies {
        let k = Some(body.body_index);
        if let Some(t) = body.binomial_violated_at {
            out.push(
                k,
                Severity::Soft,
                "BinomialLostAlongTrajectory",
                format!("x(t) B/A fell to 1 or below at t = {t:?}"),
            );
        }
        if body.collinearity_deviation_max > thresholds.collinearity_warn {
            out.push(
                k,
                Severity::Soft,
                "CollinearityDrift",
                format!(
                    "angle between r_k and -r_Mk reached {:?} rad",
                    body.collinearity_deviation_max
                ),
            );
        }
        if body.theta_dot_max > thresholds.theta_dot_soft
            && !out
                .findings
                .iter()
                .any(|f| f.body_index == k && f.code.starts_with("AngularRate"))
        {
            out.push(
                k,
                Severity::Soft,
                "AngularRateHigh",
                format!("|theta_dot| reached {:?} along the trajectory", body.theta_dot_max),
            );
        }
    }
    // Hard findings come only from the epoch check, so the verdict can only
    // move between valid and warned here.
    out.finish()
}
