//! Orchestration of one batch run and the closed-form/oracle comparison.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{wrap_angle, SystemState, Trajectory, Vec2};
use crate::oracle::{integrate_nbody_until_collision, CartesianSample};
use crate::propagator::{propagate_system, BodyError, BodyRun};
use crate::validity::{check_scenario, check_trajectory, ValidityReport, Verdict};

use super::output::{
    approx_csv, compare_csv, error_dat, error_report_text, metadata_header, oracle_csv, path_dat,
    validity_text,
};
use super::scenario::{file_safe, Scenario};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_TRUNCATED: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Check,
    Approx,
    Oracle,
    Compare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Check => "check",
            Mode::Approx => "approx",
            Mode::Oracle => "oracle",
            Mode::Compare => "compare",
        }
    }
}

/// Direct-integration state of one body, reduced to the closed form's
/// variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    /// Distance to the centre of mass of the other bodies.
    pub x: f64,
    pub r: f64,
    /// Unwrapped polar angle, continuous from the epoch.
    pub theta: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Converts direct-integration trajectories to per-body separation, radius
/// and unwrapped angle. `state` is the epoch state the run started from.
pub fn oracle_samples(
    state: &SystemState,
    trajectories: &[Trajectory<CartesianSample>],
) -> Vec<Trajectory<OracleSample>> {
    let masses = state.masses();
    let total: f64 = masses.iter().sum();
    trajectories
        .iter()
        .enumerate()
        .map(|(k, tr)| {
            let p0 = state.bodies[k].position;
            let mut prev = p0.y.atan2(p0.x);
            let samples = (0..tr.samples.len())
                .map(|i| {
                    let own = tr.samples[i];
                    let weighted: Vec2 = trajectories
                        .iter()
                        .zip(&masses)
                        .enumerate()
                        .filter(|(n, _)| *n != k)
                        .map(|(_, (t, &m))| m * t.samples[i].position)
                        .sum();
                    let companion = weighted / (total - masses[k]);
                    let raw = own.position.y.atan2(own.position.x);
                    let theta = prev + wrap_angle(raw - prev);
                    prev = theta;
                    OracleSample {
                        x: (own.position - companion).norm(),
                        r: own.position.norm(),
                        theta,
                        position: own.position,
                        velocity: own.velocity,
                    }
                })
                .collect();
            Trajectory {
                body_index: k,
                times: tr.times.clone(),
                samples,
                truncated_at: tr.truncated_at,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    X,
    R,
    Theta,
    Position,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::X, Quantity::R, Quantity::Theta, Quantity::Position];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::X => "x",
            Quantity::R => "r",
            Quantity::Theta => "theta",
            Quantity::Position => "pos",
        }
    }
}

/// Error statistics of one quantity of one body.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityError {
    pub quantity: Quantity,
    /// Number of times where both series exist.
    pub samples: usize,
    /// First and last compared time; `None` when nothing could be compared.
    pub window: Option<(f64, f64)>,
    pub max_abs: f64,
    /// Largest `|error| / |reference|`. For the angle the reference is the
    /// oracle's swept angle `theta(t) - theta(t0)`; samples with a zero
    /// reference are skipped unless their error is zero too.
    pub max_rel: f64,
    pub rms: f64,
    pub t_max_abs: Option<f64>,
    /// `(t, |error|)` for every compared time.
    pub series: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyErrors {
    pub body_index: usize,
    pub name: String,
    pub quantities: Vec<QuantityError>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub bodies: Vec<BodyErrors>,
    pub warnings: Vec<String>,
}

impl ErrorReport {
    pub fn get(&self, body_index: usize, quantity: Quantity) -> Option<&QuantityError> {
        self.bodies
            .iter()
            .find(|b| b.body_index == body_index)?
            .quantities
            .iter()
            .find(|q| q.quantity == quantity)
    }
}

fn stats(quantity: Quantity, rows: &[(f64, f64, f64)]) -> QuantityError {
    // rows: (t, |error|, reference magnitude)
    let mut q = QuantityError {
        quantity,
        samples: rows.len(),
        window: rows.first().zip(rows.last()).map(|(a, b)| (a.0, b.0)),
        max_abs: f64::NAN,
        max_rel: f64::NAN,
        rms: f64::NAN,
        t_max_abs: None,
        series: rows.iter().map(|&(t, e, _)| (t, e)).collect(),
    };
    if rows.is_empty() {
        return q;
    }
    q.max_abs = 0.0;
    q.max_rel = 0.0;
    let mut sum_sq = 0.0;
    for &(t, e, reference) in rows {
        if e > q.max_abs || q.t_max_abs.is_none() {
            q.max_abs = e;
            q.t_max_abs = Some(t);
        }
        if e == 0.0 {
            // contributes nothing
        } else if reference > 0.0 {
            q.max_rel = q.max_rel.max(e / reference);
        }
        sum_sq += e * e;
    }
    q.rms = (sum_sq / rows.len() as f64).sqrt();
    q
}

/// Compares closed-form runs with the direct integration on the times both
/// cover.
pub fn compute_error_report(
    names: &[String],
    runs: &[Result<BodyRun, BodyError>],
    oracle: &[Trajectory<OracleSample>],
) -> ErrorReport {
    let mut report = ErrorReport::default();
    for (k, name) in names.iter().enumerate() {
        let mut rows: [Vec<(f64, f64, f64)>; 4] = Default::default();
        if let (Some(Ok(run)), Some(o)) = (runs.get(k), oracle.get(k)) {
            let cf = &run.trajectory;
            let theta0 = run.solution.reduced.theta0;
            let n = cf.samples.len().min(o.samples.len());
            for i in 0..n {
                debug_assert_eq!(cf.times[i], o.times[i]);
                let (c, s) = (cf.samples[i], o.samples[i]);
                let t = cf.times[i];
                rows[0].push((t, (c.x - s.x).abs(), s.x.abs()));
                rows[1].push((t, (c.r - s.r).abs(), s.r.abs()));
                rows[2].push((t, (c.theta - s.theta).abs(), (s.theta - theta0).abs()));
                rows[3].push((t, (c.position - s.position).norm(), s.position.norm()));
            }
        }
        if rows[0].is_empty() {
            report
                .warnings
                .push(format!("body {k} ({name}): empty comparison window"));
        }
        report.bodies.push(BodyErrors {
            body_index: k,
            name: name.clone(),
            quantities: Quantity::ALL
                .iter()
                .zip(&rows)
                .map(|(&q, r)| stats(q, r))
                .collect(),
        });
    }
    report
}

/// Central-difference Cartesian velocity of the closed-form position,
/// falling back to a one-sided difference at the edge of the window.
fn fd_velocity(run: &BodyRun, t: f64) -> Option<Vec2> {
    let h = 1e-6 * t.abs().max(1.0);
    let at = |t: f64| run.solution.sample(t).ok().map(|s| s.position);
    match (at(t - h), at(t), at(t + h)) {
        (Some(a), _, Some(b)) => Some((b - a) / (2.0 * h)),
        (None, Some(c), Some(b)) => Some((b - c) / h),
        (Some(a), Some(c), None) => Some((c - a) / h),
        _ => None,
    }
}

/// Finite-difference velocities for every sample of every constructible
/// body; `None` entries mark bodies without a closed form.
pub(crate) fn fd_velocities(runs: &[Result<BodyRun, BodyError>]) -> Vec<Option<Vec<Vec2>>> {
    runs.iter()
        .map(|r| {
            r.as_ref().ok().map(|run| {
                run.trajectory
                    .times
                    .iter()
                    .map(|&t| fd_velocity(run, t).unwrap_or(Vec2::new(f64::NAN, f64::NAN)))
                    .collect()
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: u8,
    pub verdict: Option<Verdict>,
    /// Files written, in the order they were written.
    pub files: Vec<PathBuf>,
    /// Warnings and errors worth showing to the user.
    pub messages: Vec<String>,
    pub validity: Option<ValidityReport>,
    pub error_report: Option<ErrorReport>,
}

struct Writer<'a> {
    dir: &'a Path,
    prefix: String,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, suffix: &str, content: &str) -> std::io::Result<()> {
        let path = self.dir.join(format!("{}_{suffix}", self.prefix));
        std::fs::write(&path, content)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs one scenario in one mode, writing every artifact into `out_dir`.
///
/// Never panics on bad input: problems become an exit code plus messages.
/// `check`, `approx` and `compare` stop with [`EXIT_INVALID`] after writing
/// the validity report when the verdict is invalid; the direct integration
/// alone (`oracle`) does not depend on the closed form's assumptions.
pub fn run(scenario: &Scenario, mode: Mode, out_dir: &Path, fd_velocities: bool) -> RunOutcome {
    let mut outcome = RunOutcome {
        exit_code: EXIT_OK,
        verdict: None,
        files: Vec::new(),
        messages: Vec::new(),
        validity: None,
        error_report: None,
    };
    if let Err(e) = scenario.validate() {
        outcome.exit_code = EXIT_INVALID;
        outcome.messages.push(e.to_string());
        return outcome;
    }
    let mut writer = Writer {
        dir: out_dir,
        prefix: file_safe(&scenario.name),
        files: Vec::new(),
    };
    let result = execute(scenario, mode, fd_velocities, &mut writer, &mut outcome);
    outcome.files = writer.files;
    if let Err(e) = result {
        outcome.exit_code = EXIT_INTERNAL;
        outcome.messages.push(e);
    }
    outcome
}

fn execute(
    scenario: &Scenario,
    mode: Mode,
    fd: bool,
    writer: &mut Writer,
    outcome: &mut RunOutcome,
) -> Result<(), String> {
    let io = |e: std::io::Error| format!("write failed: {e}");
    std::fs::create_dir_all(writer.dir).map_err(io)?;
    let header = metadata_header(scenario, mode, fd);
    let names: Vec<String> = scenario.bodies.iter().map(|b| b.name.clone()).collect();
    let state = scenario.state();
    let com = match state.to_com_frame() {
        Ok(s) => s,
        Err(e) => {
            outcome.exit_code = EXIT_INVALID;
            outcome.messages.push(e.to_string());
            return Ok(());
        }
    };
    let options = scenario.options.propagator();
    let thresholds = &scenario.options.thresholds;
    let times = &scenario.output_times;
    let mut truncated = false;

    let runs = if mode == Mode::Oracle {
        None
    } else {
        let report = check_scenario(&state, &options, thresholds);
        outcome.verdict = Some(report.verdict);
        if mode == Mode::Check || report.verdict == Verdict::Invalid {
            writer
                .write("validity.txt", &validity_text(&header, scenario, &report))
                .map_err(io)?;
            if report.verdict == Verdict::Invalid {
                outcome.exit_code = EXIT_INVALID;
                outcome.messages.push(format!(
                    "scenario is invalid: {}",
                    report
                        .findings
                        .iter()
                        .filter(|f| f.severity == crate::validity::Severity::Hard)
                        .map(|f| match f.body_index {
                            Some(k) => format!("{} (body {k})", f.code),
                            None => f.code.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            outcome.validity = Some(report);
            return Ok(());
        }
        let runs = propagate_system(&state, times, &options).map_err(|e| e.to_string())?;
        for r in &runs {
            match r {
                Ok(run) => {
                    if let Some(t) = run.trajectory.truncated_at {
                        truncated = true;
                        outcome.messages.push(format!(
                            "body {} ({}): closed form left its evaluable window at t = {t:?}",
                            run.solution.reduced.body_index, names[run.solution.reduced.body_index]
                        ));
                    }
                }
                Err(e) => return Err(format!("closed form failed after a valid verdict: {e}")),
            }
        }
        outcome.validity = Some(report);
        Some(runs)
    };

    let oracle = if mode == Mode::Oracle || mode == Mode::Compare {
        let (trajs, collision) =
            match integrate_nbody_until_collision(&com, times, &scenario.options.integrator) {
                Ok(r) => r,
                Err(e @ Error::CollisionDetected { .. }) => {
                    // Coincident bodies at the epoch.
                    outcome.exit_code = EXIT_INVALID;
                    outcome.messages.push(e.to_string());
                    return Ok(());
                }
                Err(e) => return Err(format!("direct integration failed: {e}")),
            };
        if let Some(c) = collision {
            truncated = true;
            outcome.messages.push(format!("direct integration stopped: {c}"));
        }
        Some((oracle_samples(&com, &trajs), trajs))
    } else {
        None
    };

    let velocities = match (&runs, fd) {
        (Some(runs), true) => Some(fd_velocities(runs)),
        _ => None,
    };

    if let Some(runs) = &runs {
        let report = outcome.validity.take().expect("set above");
        let report = match &oracle {
            Some((_, trajs)) => check_trajectory(&report, &com, runs, Some(trajs), thresholds),
            None => check_trajectory(&report, &com, runs, None, thresholds),
        };
        outcome.verdict = Some(report.verdict);
        writer
            .write("validity.txt", &validity_text(&header, scenario, &report))
            .map_err(io)?;
        outcome.validity = Some(report);
        writer
            .write("approx.csv", &approx_csv(&header, &names, times, runs, velocities.as_deref()))
            .map_err(io)?;
    }
    if let Some((samples, _)) = &oracle {
        writer
            .write("oracle.csv", &oracle_csv(&header, &names, times, samples))
            .map_err(io)?;
    }
    if let (Some(runs), Some((samples, _))) = (&runs, &oracle) {
        let errors = compute_error_report(&names, runs, samples);
        outcome.messages.extend(errors.warnings.iter().cloned());
        writer
            .write("compare.csv", &compare_csv(&header, &names, times, runs, samples))
            .map_err(io)?;
        writer
            .write("error_report.txt", &error_report_text(&header, &errors))
            .map_err(io)?;
        outcome.error_report = Some(errors);
    }

    // Plot data: the primary trajectory of the mode, then error series.
    for (k, name) in names.iter().enumerate() {
        let body = file_safe(name);
        let path: Vec<(f64, Vec2)> = match (&runs, &oracle) {
            (Some(runs), _) => match &runs[k] {
                Ok(run) => run
                    .trajectory
                    .times
                    .iter()
                    .zip(&run.trajectory.samples)
                    .map(|(&t, s)| (t, s.position))
                    .collect(),
                Err(_) => Vec::new(),
            },
            (None, Some((samples, _))) => samples[k]
                .times
                .iter()
                .zip(&samples[k].samples)
                .map(|(&t, s)| (t, s.position))
                .collect(),
            (None, None) => Vec::new(),
        };
        writer
            .write(&format!("{body}_path.dat"), &path_dat(&header, name, &path))
            .map_err(io)?;
        if let Some(errors) = &outcome.error_report {
            for q in &errors.bodies[k].quantities {
                writer
                    .write(
                        &format!("{body}_err_{}.dat", q.quantity.as_str()),
                        &error_dat(&header, name, q),
                    )
                    .map_err(io)?;
            }
        }
    }
    if truncated {
        outcome.exit_code = EXIT_TRUNCATED;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Body;

    #[test]
    fn oracle_angle_is_unwrapped_across_pi() {
        let state = SystemState::new(
            1.0,
            vec![
                Body::new("a", 1.0, Vec2::new(-1.0, 0.1), Vec2::zeros()),
                Body::new("b", 3.0, Vec2::new(1.0, 0.0), Vec2::zeros()),
            ],
            0.0,
        )
        .unwrap();
        let at = |phi: f64, r: f64| CartesianSample {
            position: Vec2::new(r * phi.cos(), r * phi.sin()),
            velocity: Vec2::zeros(),
        };
        let trajs = vec![
            Trajectory {
                body_index: 0,
                times: vec![1.0, 2.0],
                samples: vec![at(3.1, 1.0), at(-3.1, 1.0)],
                truncated_at: None,
            },
            Trajectory {
                body_index: 1,
                times: vec![1.0, 2.0],
                samples: vec![at(3.1 - PI_F, 2.0), at(-3.1 + PI_F, 2.0)],
                truncated_at: None,
            },
        ];
        let s = oracle_samples(&state, &trajs);
        assert!((s[0].samples[1].theta - (2.0 * PI_F - 3.1)).abs() < 1e-12);
        // The companion of `a` is `b` itself: separation 1 + 2.
        assert!((s[0].samples[0].x - 3.0).abs() < 1e-12);
        assert!((s[1].samples[0].r - 2.0).abs() < 1e-12);
    }

    const PI_F: f64 = std::f64::consts::PI;

    #[test]
    fn statistics() {
        let q = stats(Quantity::Theta, &[(0.0, 0.0, 0.0), (1.0, 0.3, 3.0), (2.0, 0.4, 0.0), (3.0, 0.1, 1.0)]);
        assert_eq!(q.samples, 4);
        assert_eq!(q.window, Some((0.0, 3.0)));
        assert_eq!(q.max_abs, 0.4);
        assert_eq!(q.t_max_abs, Some(2.0));
        // The zero-reference sample with a nonzero error is skipped.
        assert!((q.max_rel - 0.1).abs() < 1e-15);
        assert!((q.rms - (0.26f64 / 4.0).sqrt()).abs() < 1e-15);

        let empty = stats(Quantity::X, &[]);
        assert_eq!(empty.window, None);
        assert!(empty.max_abs.is_nan() && empty.series.is_empty());
    }
}
