//! Scenario files: TOML with explicit keys, validated on load.
//!
//! ```toml
//! name = "radial"
//! G = 1.0
//! t0 = 0.0
//!
//! [times]
//! t_end = 1.0
//! dt_output = 0.01       # or: list = [0.0, 0.5, 1.0]
//!
//! [[bodies]]
//! name = "a"
//! mass = 1.0
//! position = [0.5, 0.0]
//! velocity = [3.0, 0.0]
//!
//! [options]              # every key optional
//! xk0_mode = "consistent"
//! b_mode = "paper"
//! sign_mode = "auto"
//! eval_mode = "rederived"
//! branch = "minus_one"
//!
//! [options.thresholds]
//! theta_dot_soft = 0.1
//!
//! [options.integrator]
//! method = "rk45_adaptive"
//! tolerance = 1e-10
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lambertw::Branch;
use crate::model::{Body, SystemState, Vec2};
use crate::oracle::IntegratorConfig;
use crate::propagator::{BMode, EvalMode, PropagatorOptions, SignMode};
use crate::reduction::Xk0Mode;
use crate::validity::Thresholds;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

/// Every option a run depends on, with defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioOptions {
    pub xk0_mode: Xk0Mode,
    pub b_mode: BMode,
    pub sign_mode: SignMode,
    pub eval_mode: EvalMode,
    pub branch: Branch,
    pub thresholds: Thresholds,
    pub integrator: IntegratorConfig,
}

impl ScenarioOptions {
    pub fn propagator(&self) -> PropagatorOptions {
        PropagatorOptions {
            xk0_mode: self.xk0_mode,
            b_mode: self.b_mode,
            sign_mode: self.sign_mode,
            eval_mode: self.eval_mode,
            branch: self.branch,
        }
    }

    fn validate(&self) -> Result<(), String> {
        let t = &self.thresholds;
        if !(t.theta_dot_soft >= 0.0 && t.theta_dot_soft <= t.theta_dot_hard && t.theta_dot_hard.is_finite()) {
            return Err("thresholds need 0 <= theta_dot_soft <= theta_dot_hard < inf".into());
        }
        if !(t.collision_distance >= 0.0 && t.collinearity_warn >= 0.0) {
            return Err("collision_distance and collinearity_warn must be >= 0".into());
        }
        let i = &self.integrator;
        if !(i.tolerance > 0.0 && i.step > 0.0 && i.max_steps > 0 && i.collision_epsilon_factor >= 0.0) {
            return Err("integrator needs tolerance > 0, step > 0, max_steps > 0, collision_epsilon_factor >= 0".into());
        }
        Ok(())
    }
}

/// Output times: either a uniform grid from `t0` or an explicit list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_output: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<f64>>,
}

impl TimesSpec {
    /// Resolves to an ascending list starting at or after `t0`.
    ///
    /// The grid is `t0 + i dt` for every `i` with `t0 + i dt <= t_end` (up
    /// to a relative slack of 1e-9 of a step, so `t_end` itself is kept when
    /// it is a whole number of steps away).
    pub fn resolve(&self, t0: f64) -> Result<Vec<f64>, String> {
        let times = match (self.t_end, self.dt_output, &self.list) {
            (None, None, Some(list)) => list.clone(),
            (Some(t_end), Some(dt), None) => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(format!("times.dt_output must be > 0, got {dt}"));
                }
                if !(t_end >= t0 && t_end.is_finite()) {
                    return Err(format!("times.t_end = {t_end} must be finite and >= t0 = {t0}"));
                }
                let n = ((t_end - t0) / dt + 1e-9).floor() as usize;
                (0..=n).map(|i| t0 + i as f64 * dt).collect()
            }
            _ => return Err("times needs either t_end and dt_output, or list".into()),
        };
        if times.is_empty() {
            return Err("times must not be empty".into());
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err("times must be finite".into());
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err("times must be strictly ascending".into());
        }
        if times[0] < t0 {
            return Err(format!("times must start at or after t0 = {t0}"));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub name: String,
    pub mass: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    name: Option<String>,
    mass: f64,
    position: Vec<f64>,
    velocity: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    #[serde(rename = "G")]
    g: f64,
    #[serde(default)]
    t0: f64,
    times: TimesSpec,
    bodies: Vec<RawBody>,
    #[serde(default)]
    options: ScenarioOptions,
}

/// A fully resolved scenario. Serializing it gives back a scenario file
/// with every default spelled out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    #[serde(rename = "G")]
    pub g: f64,
    pub t0: f64,
    pub times: TimesSpec,
    pub bodies: Vec<BodySpec>,
    pub options: ScenarioOptions,
    #[serde(skip)]
    pub output_times: Vec<f64>,
}

impl Scenario {
    pub fn state(&self) -> SystemState {
        SystemState {
            g: self.g,
            bodies: self
                .bodies
                .iter()
                .map(|b| {
                    Body::new(
                        b.name.clone(),
                        b.mass,
                        Vec2::new(b.position[0], b.position[1]),
                        Vec2::new(b.velocity[0], b.velocity[1]),
                    )
                })
                .collect(),
            t0: self.t0,
        }
    }

    /// The resolved scenario as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable in TOML")
    }

    /// Re-checks every invariant; used after command-line overrides.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = ScenarioError::Validation;
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(v(format!("G > 0 required, got {}", self.g)));
        }
        if !self.t0.is_finite() {
            return Err(v("t0 must be finite".into()));
        }
        if self.bodies.len() < 2 {
            return Err(v(format!("at least two bodies required, got {}", self.bodies.len())));
        }
        let mut names = BTreeSet::new();
        for (i, b) in self.bodies.iter().enumerate() {
            if b.position.len() != 2 || b.velocity.len() != 2 {
                return Err(v(format!(
                    "body {i} ({}): planar only; position and velocity need 2 components, got {} and {}",
                    b.name,
                    b.position.len(),
                    b.velocity.len()
                )));
            }
            if !(b.mass > 0.0 && b.mass.is_finite()) {
                return Err(v(format!("body {i} ({}): mass > 0 required, got {}", b.name, b.mass)));
            }
            if b.position.iter().chain(&b.velocity).any(|c| !c.is_finite()) {
                return Err(v(format!("body {i} ({}): position and velocity must be finite", b.name)));
            }
            if b.name.is_empty() {
                return Err(v(format!("body {i}: name must not be empty")));
            }
            if !names.insert(file_safe(&b.name)) {
                return Err(v(format!("body {i}: name {:?} is not unique", b.name)));
            }
        }
        self.options.validate().map_err(v)?;
        let times = self.times.resolve(self.t0).map_err(v)?;
        if times != self.output_times {
            return Err(v("output times do not match the times table".into()));
        }
        Ok(())
    }
}

/// Replaces every character outside `[A-Za-z0-9._-]` with `_`.
pub fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses scenario text. `default_name` is used when the file has no `name`.
pub fn parse_scenario(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let bodies = raw
        .bodies
        .into_iter()
        .enumerate()
        .map(|(i, b)| BodySpec {
            name: b.name.unwrap_or_else(|| format!("body{i}")),
            mass: b.mass,
            position: b.position,
            velocity: b.velocity,
        })
        .collect();
    let output_times = raw.times.resolve(raw.t0).map_err(ScenarioError::Validation)?;
    let scenario = Scenario {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        g: raw.g,
        t0: raw.t0,
        times: raw.times,
        bodies,
        options: raw.options,
        output_times,
    };
    if scenario.name.is_empty() {
        return Err(ScenarioError::Validation("name must not be empty".into()));
    }
    scenario.validate()?;
    Ok(scenario)
}

/// Reads and parses a scenario file; the file stem names it by default.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario(&text, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
G = 1.0

[times]
t_end = 1.0
dt_output = 0.25

[[bodies]]
mass = 1.0
position = [0.5, 0.0]
velocity = [0.0, 0.0]

[[bodies]]
mass = 1
position = [-0.5, 0.0]
velocity = [0.0, 0.0]
"#;

    #[test]
    fn minimal_file_gets_documented_defaults() {
        let s = parse_scenario(MINIMAL, "mini").unwrap();
        assert_eq!(s.name, "mini");
        assert_eq!(s.t0, 0.0);
        assert_eq!(s.options.xk0_mode, Xk0Mode::Consistent);
        assert_eq!(s.options.b_mode, BMode::Paper);
        assert_eq!(s.options.eval_mode, EvalMode::Rederived);
        assert_eq!(s.options.branch, Branch::MinusOne);
        assert_eq!(s.output_times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(s.bodies[1].name, "body1");
        assert_eq!(s.bodies[1].mass, 1.0);
    }

    #[test]
    fn three_component_position_is_rejected() {
        let text = MINIMAL.replacen("[0.5, 0.0]", "[0.5, 0.0, 0.0]", 1);
        match parse_scenario(&text, "x") {
            Err(ScenarioError::Validation(m)) => assert!(m.contains("planar only"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_mass_is_rejected() {
        let text = MINIMAL.replacen("mass = 1.0", "mass = -1.0", 1);
        match parse_scenario(&text, "x") {
            Err(ScenarioError::Validation(m)) => assert!(m.contains("mass > 0"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_a_line() {
        let text = MINIMAL.replacen("mass = 1.0", "mass = ", 1);
        match parse_scenario(&text, "x") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replacen("G = 1.0", "G = 1.0\nspeed = 3", 1);
        assert!(matches!(parse_scenario(&text, "x"), Err(ScenarioError::Parse { line: 3, .. })));
    }

    #[test]
    fn explicit_times_must_ascend() {
        let text = MINIMAL.replace("t_end = 1.0\ndt_output = 0.25", "list = [0.0, 0.2, 0.1]");
        assert!(matches!(parse_scenario(&text, "x"), Err(ScenarioError::Validation(_))));
        let text = MINIMAL.replace("t_end = 1.0\ndt_output = 0.25", "list = [0.0]");
        assert_eq!(parse_scenario(&text, "x").unwrap().output_times, vec![0.0]);
    }

    #[test]
    fn resolved_scenario_round_trips() {
        let s = parse_scenario(MINIMAL, "mini").unwrap();
        let again = parse_scenario(&s.to_toml(), "other").unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn options_are_parsed() {
        let text = format!(
            "{MINIMAL}\n[options]\nb_mode = \"consistent\"\nsign_mode = \"plus\"\n[options.integrator]\nmethod = \"rk4_fixed\"\nstep = 0.01\n"
        );
        let s = parse_scenario(&text, "x").unwrap();
        assert_eq!(s.options.b_mode, BMode::Consistent);
        assert_eq!(s.options.sign_mode, SignMode::Plus);
        assert_eq!(s.options.integrator.step, 0.01);
        assert_eq!(s.options.integrator.tolerance, 1e-10);
    }
}
