//! Text renderings of every artifact. Floats use Rust's shortest
//! round-trip representation, so identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::model::Vec2;
use crate::propagator::{BodyError, BodyRun};
use crate::validity::ValidityReport;

use super::run::{ErrorReport, Mode, OracleSample, QuantityError};
use super::scenario::Scenario;
use crate::model::Trajectory;

/// Comment block carried by every file: tool, mode and the fully resolved
/// scenario (re-runnable after stripping the leading `# `).
pub fn metadata_header(scenario: &Scenario, mode: Mode, fd_velocities: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# nbody-analogue {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# mode: {}", mode.as_str());
    let _ = writeln!(s, "# fd_velocities: {fd_velocities}");
    let _ = writeln!(s, "# frame: centre of mass of the initial state");
    let _ = writeln!(s, "# resolved scenario:");
    for line in scenario.to_toml().lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            let _ = writeln!(s, "# {line}");
        }
    }
    s
}

fn csv_text(header: &str, columns: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(header.as_bytes().to_vec());
    let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
        w.write_record(columns)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).expect("writing to memory cannot fail");
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("all fields are UTF-8")
}

fn f(v: f64) -> String {
    format!("{v:?}")
}

pub const APPROX_COLUMNS: [&str; 7] = ["t", "body", "r", "theta", "x_scalar", "pos_x", "pos_y"];

/// One row per (time, body) for the closed form; rows stop where a body's
/// window ends. `velocities` adds finite-difference `vel_x, vel_y`.
pub fn approx_csv(
    header: &str,
    names: &[String],
    times: &[f64],
    runs: &[Result<BodyRun, BodyError>],
    velocities: Option<&[Option<Vec<Vec2>>]>,
) -> String {
    let mut columns = APPROX_COLUMNS.to_vec();
    if velocities.is_some() {
        columns.extend(["vel_x", "vel_y"]);
    }
    let mut rows = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        for (k, run) in runs.iter().enumerate() {
            let Ok(run) = run else { continue };
            let Some(s) = run.trajectory.samples.get(i) else { continue };
            let mut row = vec![f(t), names[k].clone(), f(s.r), f(s.theta), f(s.x), f(s.position.x), f(s.position.y)];
            if let Some(v) = velocities.and_then(|v| v[k].as_ref()) {
                row.extend([f(v[i].x), f(v[i].y)]);
            }
            rows.push(row);
        }
    }
    csv_text(header, &columns, rows)
}

pub fn oracle_csv(header: &str, names: &[String], times: &[f64], oracle: &[Trajectory<OracleSample>]) -> String {
    let mut columns = APPROX_COLUMNS.to_vec();
    columns.extend(["vel_x", "vel_y"]);
    let mut rows = Vec::new();
    for i in 0..times.len() {
        for (k, tr) in oracle.iter().enumerate() {
            let Some(s) = tr.samples.get(i) else { continue };
            rows.push(vec![
                f(tr.times[i]),
                names[k].clone(),
                f(s.r),
                f(s.theta),
                f(s.x),
                f(s.position.x),
                f(s.position.y),
                f(s.velocity.x),
                f(s.velocity.y),
            ]);
        }
    }
    csv_text(header, &columns, rows)
}

/// Rows only where both series exist. Errors are closed form minus oracle;
/// `err_pos` is the Euclidean distance between the two positions.
pub fn compare_csv(
    header: &str,
    names: &[String],
    times: &[f64],
    runs: &[Result<BodyRun, BodyError>],
    oracle: &[Trajectory<OracleSample>],
) -> String {
    let mut columns = APPROX_COLUMNS.to_vec();
    columns.extend([
        "oracle_r",
        "oracle_theta",
        "oracle_x_scalar",
        "oracle_pos_x",
        "oracle_pos_y",
        "err_r",
        "err_theta",
        "err_x_scalar",
        "err_pos",
    ]);
    let mut rows = Vec::new();
    for i in 0..times.len() {
        for (k, run) in runs.iter().enumerate() {
            let Ok(run) = run else { continue };
            let (Some(c), Some(o)) = (run.trajectory.samples.get(i), oracle[k].samples.get(i)) else {
                continue;
            };
            rows.push(vec![
                f(times[i]),
                names[k].clone(),
                f(c.r),
                f(c.theta),
                f(c.x),
                f(c.position.x),
                f(c.position.y),
                f(o.r),
                f(o.theta),
                f(o.x),
                f(o.position.x),
                f(o.position.y),
                f(c.r - o.r),
                f(c.theta - o.theta),
                f(c.x - o.x),
                f((c.position - o.position).norm()),
            ]);
        }
    }
    csv_text(header, &columns, rows)
}

/// `key: value` lines, one block per body, then one line per finding.
pub fn validity_text(header: &str, scenario: &Scenario, report: &ValidityReport) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "verdict: {}", report.verdict.as_str());
    for b in &report.bodies {
        let name = scenario.bodies.get(b.body_index).map_or("", |x| x.name.as_str());
        let _ = writeln!(s, "\n[body {} {name:?}]", b.body_index);
        let _ = writeln!(s, "constructible: {}", b.constructible);
        let _ = writeln!(s, "b_value: {:?}", b.b_value);
        let _ = writeln!(s, "b_positive: {}", b.b_positive);
        let _ = writeln!(s, "binomial_margin: {:?}", b.binomial_margin);
        let _ = writeln!(s, "binomial_ok: {}", b.binomial_ok);
        match b.binomial_violated_at {
            Some(t) => {
                let _ = writeln!(s, "binomial_violated_at: {t:?}");
            }
            None => s.push_str("binomial_violated_at: never\n"),
        }
        let _ = writeln!(s, "theta_dot_max: {:?}", b.theta_dot_max);
        let _ = writeln!(s, "theta_dot_ok: {}", b.theta_dot_ok);
        if b.window_end == f64::INFINITY {
            s.push_str("window_end: unbounded\n");
        } else {
            let _ = writeln!(s, "window_end: {:?}", b.window_end);
        }
        let _ = writeln!(s, "collinearity_deviation_max: {:?}", b.collinearity_deviation_max);
    }
    s.push_str("\n[findings]\n");
    for f in &report.findings {
        let body = f.body_index.map_or("-".to_string(), |k| k.to_string());
        let severity = match f.severity {
            crate::validity::Severity::Hard => "hard",
            crate::validity::Severity::Soft => "soft",
        };
        let _ = writeln!(s, "{severity} body={body} {}: {}", f.code, f.detail);
    }
    s
}

/// Whitespace-separated table of error statistics, one row per body and
/// quantity. Empty windows are written as `-`.
pub fn error_report_text(header: &str, report: &ErrorReport) -> String {
    let mut s = header.to_string();
    for w in &report.warnings {
        let _ = writeln!(s, "# warning: {w}");
    }
    s.push_str("body name quantity samples window_start window_end max_abs max_rel rms t_max_abs\n");
    for b in &report.bodies {
        for q in &b.quantities {
            let (start, end) = q
                .window
                .map_or(("-".to_string(), "-".to_string()), |(a, z)| (f(a), f(z)));
            let t_max = q.t_max_abs.map_or("-".to_string(), f);
            let _ = writeln!(
                s,
                "{} {} {} {} {start} {end} {:?} {:?} {:?} {t_max}",
                b.body_index,
                super::scenario::file_safe(&b.name),
                q.quantity.as_str(),
                q.samples,
                q.max_abs,
                q.max_rel,
                q.rms
            );
        }
    }
    s
}

pub(crate) fn path_dat(header: &str, body: &str, path: &[(f64, Vec2)]) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "# body: {body}");
    s.push_str("# t x y\n");
    for (t, p) in path {
        let _ = writeln!(s, "{t:?} {:?} {:?}", p.x, p.y);
    }
    s
}

pub(crate) fn error_dat(header: &str, body: &str, q: &QuantityError) -> String {
    let mut s = header.to_string();
    let _ = writeln!(s, "# body: {body}");
    if q.series.is_empty() {
        s.push_str("# warning: empty comparison window\n");
    }
    let _ = writeln!(s, "# t err_{}", q.quantity.as_str());
    for (t, e) in &q.series {
        let _ = writeln!(s, "{t:?} {e:?}");
    }
    s
}
