use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nbody-analogue"))
}

fn two_body(name: &str, times: &str, va: f64, extra: &str) -> String {
    format!(
        r#"name = "{name}"
G = 1.0
t0 = 0.0
{times}

[[bodies]]
name = "a"
mass = 1.0
position = [0.5, 0.0]
velocity = [{va:?}, 0.0]

[[bodies]]
name = "b"
mass = 1.0
position = [-0.5, 0.0]
velocity = [{vb:?}, 0.0]
{extra}"#,
        vb = -va
    )
}

const GRID: &str = "[times]\nt_end = 1.0\ndt_output = 0.05";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn exec(mode: &str, scenario: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let o = bin()
        .arg(mode)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn bound_pair_in_consistent_mode_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    // A = 4, x0 = 1, x_dot0 = 1: B = 1 - 4 = -3.
    let s = write(dir.path(), "bound.toml", &two_body("bound", GRID, 0.5, "[options]\nb_mode = \"consistent\"\n"));
    let (code, stdout, stderr) = exec("check", &s, dir.path(), &[]);
    assert_eq!(code, 2, "{stdout}{stderr}");
    let report = std::fs::read_to_string(dir.path().join("bound_validity.txt")).unwrap();
    assert!(report.contains("verdict: invalid"));
    assert!(report.contains("NonPositiveB"));
    assert!(report.contains("b_value: -3.0"));
    assert!(stderr.contains("NonPositiveB"));
    // Nothing beyond the report is produced for an invalid scenario.
    let (code, _, _) = exec("approx", &s, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(!dir.path().join("bound_approx.csv").exists());
}

#[test]
fn approx_at_epoch_reproduces_initial_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "epoch.toml", &two_body("epoch", "[times]\nlist = [0.0]", 3.5, "[options]\nb_mode = \"consistent\"\n"));
    let (code, _, stderr) = exec("approx", &s, dir.path(), &[]);
    assert_eq!(code, 0, "{stderr}");
    let csv = std::fs::read_to_string(dir.path().join("epoch_approx.csv")).unwrap();
    let rows = data_lines(&csv);
    assert_eq!(rows[0], "t,body,r,theta,x_scalar,pos_x,pos_y");
    assert_eq!(rows.len(), 3);
    let parse = |row: &str| -> Vec<f64> {
        row.split(',').enumerate().filter(|(i, _)| *i != 1).map(|(_, v)| v.parse().unwrap()).collect()
    };
    let a = parse(rows[1]);
    let b = parse(rows[2]);
    assert_eq!(a, vec![0.0, 0.5, 0.0, 1.0, 0.5, 0.0]);
    assert_eq!(&b[..4], &[0.0, 0.5, std::f64::consts::PI, 1.0]);
    assert!((b[4] + 0.5).abs() < 1e-15 && b[5].abs() < 1e-15);
}

#[test]
fn radial_escape_compare_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "esc.toml", &two_body("esc", GRID, 3.5, "[options]\nb_mode = \"consistent\"\n"));
    let (code, stdout, stderr) = exec("compare", &s, dir.path(), &[]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert!(stdout.contains("verdict: valid"));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("esc_"))
        .collect();
    names.sort();
    let dat: Vec<&String> = names.iter().filter(|n| n.ends_with(".dat")).collect();
    assert_eq!(dat.iter().filter(|n| n.ends_with("_path.dat")).count(), 2);
    assert_eq!(dat.len(), 2 + 2 * 4);
    for n in ["esc_approx.csv", "esc_oracle.csv", "esc_compare.csv", "esc_error_report.txt", "esc_validity.txt"] {
        assert!(names.iter().any(|m| m == n), "{n} missing from {names:?}");
    }
    for n in &names {
        let text = std::fs::read_to_string(dir.path().join(n)).unwrap();
        assert!(text.starts_with("# nbody-analogue"), "{n}");
        assert!(text.contains("# b_mode = \"consistent\""), "{n}");
        assert!(!text.contains('\r'));
    }
    let compare = std::fs::read_to_string(dir.path().join("esc_compare.csv")).unwrap();
    let rows = data_lines(&compare);
    assert!(rows[0].starts_with("t,body,r,theta,x_scalar,pos_x,pos_y,oracle_r"));
    assert_eq!(rows.len(), 1 + 21 * 2);
    let report = std::fs::read_to_string(dir.path().join("esc_error_report.txt")).unwrap();
    let x_row = data_lines(&report).into_iter().find(|l| l.starts_with("0 a x ")).unwrap();
    let max_rel: f64 = x_row.split_whitespace().nth(7).unwrap().parse().unwrap();
    assert!(max_rel <= 2e-2, "{x_row}");
    let path = std::fs::read_to_string(dir.path().join("esc_a_path.dat")).unwrap();
    let rows = data_lines(&path);
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0], "0.0 0.5 0.0");
}

#[test]
fn closed_form_ending_before_first_output_leaves_empty_window() {
    let dir = tempfile::tempdir().unwrap();
    // At rest, x0 = 0.5 on paper B: the infall window closes at t ~ 0.05,
    // well before the pair actually collides (t ~ 0.28).
    let s = write(dir.path(), "fall.toml", &two_body("fall", "[times]\nlist = [0.1, 0.2]", 0.0, ""));
    let s_text = std::fs::read_to_string(&s).unwrap().replace("0.5, 0.0]", "0.25, 0.0]").replace("-0.5, 0.0]", "-0.25, 0.0]");
    std::fs::write(&s, s_text).unwrap();
    let (code, _, stderr) = exec("compare", &s, dir.path(), &[]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("empty comparison window"));
    let err = std::fs::read_to_string(dir.path().join("fall_a_err_x.dat")).unwrap();
    assert!(data_lines(&err).is_empty());
    assert!(err.contains("# warning: empty comparison window"));
    let oracle = std::fs::read_to_string(dir.path().join("fall_oracle.csv")).unwrap();
    assert_eq!(data_lines(&oracle).len(), 1 + 2 * 2);
}

#[test]
fn overrides_reach_the_output_header() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "ov.toml", &two_body("ov", GRID, 3.5, ""));
    let (code, _, stderr) = exec(
        "approx",
        &s,
        dir.path(),
        &["--b-mode", "consistent", "--tolerance", "1e-9", "--fd-velocities"],
    );
    assert_eq!(code, 0, "{stderr}");
    let csv = std::fs::read_to_string(dir.path().join("ov_approx.csv")).unwrap();
    assert!(csv.contains("# b_mode = \"consistent\""));
    assert!(csv.contains("# eval_mode = \"rederived\""));
    assert!(csv.contains("# tolerance = 0.000000001"));
    assert!(csv.contains("# fd_velocities: true"));
    let rows = data_lines(&csv);
    assert_eq!(rows[0], "t,body,r,theta,x_scalar,pos_x,pos_y,vel_x,vel_y");
    // Finite-difference velocity at the epoch equals the initial velocity.
    let first: Vec<&str> = rows[1].split(',').collect();
    let vx: f64 = first[7].parse().unwrap();
    assert!((vx - 3.5).abs() < 1e-5, "{vx}");

    let (code, _, _) = exec("approx", &s, dir.path(), &["--b-mode", "consistent", "--eval-mode", "as_printed"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("ov_approx.csv")).unwrap();
    assert!(csv.contains("# eval_mode = \"as_printed\""));
    assert!(csv.contains("# fd_velocities: false"));

    let (code, _, stderr) = exec("approx", &s, dir.path(), &["--b-mode", "sideways"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn oracle_mode_reports_collision_as_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "crash.toml", &two_body("crash", GRID, 0.0, "[options.integrator]\ncollision_epsilon_factor = 1e-3\n"));
    let (code, _, stderr) = exec("oracle", &s, dir.path(), &[]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("collided"));
    let csv = std::fs::read_to_string(dir.path().join("crash_oracle.csv")).unwrap();
    // Free fall from separation 1 with G(m1 + m2) = 2 lasts pi/4 ~ 0.785.
    let rows = data_lines(&csv);
    let last_t: f64 = rows.last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last_t < 0.8 && last_t > 0.7, "{last_t}");
}

#[test]
fn bad_files_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let planar = two_body("p", GRID, 1.0, "").replacen("[0.5, 0.0]", "[0.5, 0.0, 0.0]", 1);
    let s = write(dir.path(), "p.toml", &planar);
    let (code, _, stderr) = exec("check", &s, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("planar only"), "{stderr}");

    let negative = two_body("n", GRID, 1.0, "").replacen("mass = 1.0", "mass = -2.0", 1);
    let s = write(dir.path(), "n.toml", &negative);
    let (code, _, stderr) = exec("check", &s, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("mass > 0"), "{stderr}");

    let broken = write(dir.path(), "b.toml", "G = \n");
    let (code, _, stderr) = exec("check", &broken, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 1"), "{stderr}");

    let (code, _, _) = exec("check", &dir.path().join("missing.toml"), dir.path(), &[]);
    assert_eq!(code, 1);
}
