use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::value::{Error as DeError, StrDeserializer};
use serde::de::DeserializeOwned;

use nbody_analogue::harness::{load_scenario, run, Mode, Scenario, ScenarioError, EXIT_INTERNAL, EXIT_INVALID};
use nbody_analogue::lambertw::Branch;
use nbody_analogue::oracle::Method;
use nbody_analogue::propagator::{BMode, EvalMode, SignMode};
use nbody_analogue::reduction::Xk0Mode;

/// Approximate N-body propagation through per-body two-body analogues,
/// checked against direct numerical integration.
#[derive(Debug, Parser)]
#[command(name = "nbody-analogue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed form's assumptions and write a validity report.
    Check(RunArgs),
    /// Propagate every body with the closed form.
    Approx(RunArgs),
    /// Integrate the full equations of motion directly.
    Oracle(RunArgs),
    /// Run both and write error statistics and plot data.
    Compare(RunArgs),
}

/// Parses a snake_case option value with the same names as the scenario file.
fn value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    T::deserialize(StrDeserializer::<DeError>::new(s)).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Add finite-difference velocities to the closed-form CSV.
    #[arg(long)]
    fd_velocities: bool,

    /// consistent | paper
    #[arg(long, value_parser = value::<Xk0Mode>)]
    xk0_mode: Option<Xk0Mode>,
    /// paper | consistent
    #[arg(long, value_parser = value::<BMode>)]
    b_mode: Option<BMode>,
    /// auto | plus | minus
    #[arg(long, value_parser = value::<SignMode>)]
    sign_mode: Option<SignMode>,
    /// rederived | as_printed
    #[arg(long, value_parser = value::<EvalMode>)]
    eval_mode: Option<EvalMode>,
    /// minus_one | principal
    #[arg(long, value_parser = value::<Branch>)]
    branch: Option<Branch>,

    #[arg(long)]
    theta_dot_soft: Option<f64>,
    #[arg(long)]
    theta_dot_hard: Option<f64>,
    #[arg(long)]
    collision_distance: Option<f64>,
    #[arg(long)]
    collinearity_warn: Option<f64>,

    /// rk45_adaptive | rk4_fixed
    #[arg(long, value_parser = value::<Method>)]
    method: Option<Method>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    collision_epsilon_factor: Option<f64>,
}

impl RunArgs {
    fn apply(&self, s: &mut Scenario) {
        let o = &mut s.options;
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$src { $dst = v; })*
            };
        }
        set! {
            xk0_mode => o.xk0_mode,
            b_mode => o.b_mode,
            sign_mode => o.sign_mode,
            eval_mode => o.eval_mode,
            branch => o.branch,
            theta_dot_soft => o.thresholds.theta_dot_soft,
            theta_dot_hard => o.thresholds.theta_dot_hard,
            collision_distance => o.thresholds.collision_distance,
            collinearity_warn => o.thresholds.collinearity_warn,
            method => o.integrator.method,
            tolerance => o.integrator.tolerance,
            step => o.integrator.step,
            max_steps => o.integrator.max_steps,
            collision_epsilon_factor => o.integrator.collision_epsilon_factor,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Check(a) => (Mode::Check, a),
        Command::Approx(a) => (Mode::Approx, a),
        Command::Oracle(a) => (Mode::Oracle, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    let mut scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                ScenarioError::Io { .. } => EXIT_INTERNAL,
                _ => EXIT_INVALID,
            });
        }
    };
    args.apply(&mut scenario);

    let outcome = run(&scenario, mode, &args.out, args.fd_velocities);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    if let Some(v) = outcome.verdict {
        println!("verdict: {}", v.as_str());
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    ExitCode::from(outcome.exit_code)
}
