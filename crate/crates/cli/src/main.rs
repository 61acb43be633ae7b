//! `delayctl`: simulation, L1 norms, stability charts and bounds for the
//! delay-compensated adaptive controller.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 simulation
//! diverged, 3 stability condition violated.

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use delayctl_core::continuation::{
    find_start_on_axis, find_tau_s, trace_level_curve, ContinuationOptions,
};
use delayctl_core::norm::{compute_f, compute_g, reference_bounds, transient_constants, DEFAULT_TOL};
use delayctl_core::sim::{simulate_closed_loop, tracking_metrics};
use delayctl_core::{Error, ScenarioConfig};
use serde::Serialize;
use serde_json::{json, Value};

use output::OutputDir;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn condition(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConditionViolated { .. }
            | Error::ConditionViolatedAtZero { .. }
            | Error::ConditionViolatedOnIdentity { .. }
            | Error::StabilityLost { .. } => CliError::condition(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "delayctl", version, about = "Delay-compensated L1 adaptive control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the closed loop and write trace.csv and metrics.json.
    Simulate(SimulateArgs),
    /// Print f, g and the stability condition at one delay pair.
    Norm(NormArgs),
    /// Trace the stability boundary f(tau, tau_hat) = level.
    Chart(ChartArgs),
    /// Print the delay margin along tau_hat = tau.
    TauS(TauSArgs),
    /// Print the reference-system bounds and the transient constants.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario JSON; the built-in two-state example when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set Gamma=1e6` or `--set theta_signal.0.offset=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(ScenarioConfig, BTreeMap<String, Value>), CliError> {
        let overrides = config::parse_overrides(&self.set)?;
        let cfg = config::load(self.config.as_deref(), &overrides)?;
        Ok((cfg, overrides))
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (created if absent).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct DelayArgs {
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long = "tau-hat", allow_negative_numbers = true)]
    tau_hat: Option<f64>,
}

impl DelayArgs {
    fn apply(&self, cfg: &mut ScenarioConfig, overrides: &mut BTreeMap<String, Value>) {
        for (name, flag, slot) in [
            ("k", self.k, &mut cfg.k),
            ("tau", self.tau, &mut cfg.tau),
            ("tau_hat", self.tau_hat, &mut cfg.tau_hat),
        ] {
            if let Some(v) = flag {
                *slot = v;
                overrides.insert(name.to_string(), json!(v));
            }
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Start of the metric window in seconds.
    #[arg(long, default_value_t = 5.0)]
    t_start: f64,
    /// Integrate the nonadaptive reference system alongside.
    #[arg(long)]
    reference: bool,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(flatten)]
    delays: DelayArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ChartArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Level of f to trace; defaults to 1 / theta_b.
    #[arg(long, allow_negative_numbers = true)]
    level: Option<f64>,
    #[arg(long = "tau-max", default_value_t = 1.0)]
    tau_max: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct TauSArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long = "tau-max", default_value_t = 1.0)]
    tau_max: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[command(flatten)]
    delays: DelayArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config_path: Option<String>,
    output_dir: String,
    overrides: &'a BTreeMap<String, Value>,
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(CliError::config(format!("--tol must be finite and > 0, got {tol}")));
    }
    Ok(())
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, CliError> {
    let (mut cfg, mut overrides) = args.cfg.load()?;
    if args.reference {
        cfg.include_reference = true;
        overrides.insert("include_reference".into(), json!(true));
    }
    cfg.validate()?;
    if !(args.t_start >= 0.0 && args.t_start < cfg.t_final) {
        return Err(CliError::config(format!(
            "--t-start must lie in [0, t_final = {}), got {}",
            cfg.t_final, args.t_start
        )));
    }
    let dir = OutputDir::new(&args.out.out, args.out.force);
    let mut names = vec!["trace.csv", "metrics.json", "manifest.json"];
    if args.out.gnuplot {
        names.push("trace.gp");
    }
    dir.prepare(&names)?;

    let trace = simulate_closed_loop(&cfg)?;
    dir.write_with("trace.csv", |w| trace.write_csv(w))?;
    let metrics = match tracking_metrics(&trace, args.t_start) {
        Ok(m) => json!({"max_err": m.max_err, "rms_err": m.rms_err, "osc_freq": m.osc_freq}),
        Err(_) => json!({"max_err": null, "rms_err": null, "osc_freq": null}),
    };
    let mut report = json!({
        "t_start": args.t_start,
        "samples": trace.len(),
        "diverged": trace.diverged,
        "sup_x_tilde": trace.sup_x_tilde(),
        "max_theta_hat_norm": trace.max_theta_hat_norm(),
    });
    report.as_object_mut().unwrap().extend(metrics.as_object().unwrap().clone());
    if let Some(dev) = trace.sup_ref_deviation() {
        report["sup_ref_deviation"] = json!(dev);
    }
    dir.write_str("metrics.json", &(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    let manifest = RunManifest {
        command: "simulate",
        config_path: args.cfg.config.as_ref().map(|p| p.display().to_string()),
        output_dir: args.out.out.display().to_string(),
        overrides: &overrides,
    };
    dir.write_str("manifest.json", &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    if args.out.gnuplot {
        dir.write_str("trace.gp", &output::trace_gnuplot("trace.csv"))?;
    }
    if trace.diverged {
        eprintln!("simulation diverged (|x| exceeded the threshold); trace truncated");
        return Ok(2);
    }
    Ok(0)
}

fn cmd_norm(args: &NormArgs) -> Result<u8, CliError> {
    check_tol(args.tol)?;
    let (mut cfg, mut overrides) = args.cfg.load()?;
    args.delays.apply(&mut cfg, &mut overrides);
    cfg.validate()?;
    let f = compute_f(cfg.k, cfg.tau, cfg.tau_hat, &cfg.a_m, &cfg.b, args.tol);
    let g = compute_g(cfg.k, cfg.tau, cfg.tau_hat, args.tol);
    match (f, g) {
        (Ok(f), Ok(g)) => {
            let stable = f * cfg.theta_b < 1.0;
            print_json(&json!({
                "k": cfg.k,
                "tau": cfg.tau,
                "tau_hat": cfg.tau_hat,
                "f": f,
                "g": g,
                "f_theta_b": f * cfg.theta_b,
                "stable": stable,
            }));
            Ok(0)
        }
        (Err(e @ Error::StabilityLost { .. }), _) | (_, Err(e @ Error::StabilityLost { .. })) => {
            print_json(&json!({
                "k": cfg.k,
                "tau": cfg.tau,
                "tau_hat": cfg.tau_hat,
                "f": null,
                "g": null,
                "f_theta_b": null,
                "stable": false,
                "error": e.to_string(),
            }));
            Ok(3)
        }
        (Err(e), _) | (_, Err(e)) => Err(e.into()),
    }
}

fn k_label(k: f64) -> String {
    let s = format!("{k}");
    s.replace('.', "p")
}

fn cmd_chart(args: &ChartArgs) -> Result<u8, CliError> {
    check_tol(args.tol)?;
    let (mut cfg, mut overrides) = args.cfg.load()?;
    if let Some(k) = args.k {
        cfg.k = k;
        overrides.insert("k".into(), json!(k));
    }
    cfg.validate()?;
    let level = args.level.unwrap_or(1.0 / cfg.theta_b);
    if level <= 0.0 || !level.is_finite() {
        return Err(CliError::config(format!("--level must be finite and > 0, got {level}")));
    }
    let opts = ContinuationOptions {
        tol: args.tol,
        tau_max: args.tau_max,
        ..Default::default()
    };
    let stem = format!("chart_k{}", k_label(cfg.k));
    let (csv, sidecar, script, manifest_name) = (
        format!("{stem}.csv"),
        format!("{stem}.json"),
        format!("{stem}.gp"),
        format!("{stem}_manifest.json"),
    );
    let dir = OutputDir::new(&args.out.out, args.out.force);
    let mut names = vec![csv.as_str(), sidecar.as_str(), manifest_name.as_str()];
    if args.out.gnuplot {
        names.push(script.as_str());
    }
    dir.prepare(&names)?;

    let start = find_start_on_axis(cfg.k, &cfg.a_m, &cfg.b, level, &opts)?;
    let trace = trace_level_curve(cfg.k, &cfg.a_m, &cfg.b, level, (0.0, start), &opts)?;
    dir.write_with(&csv, |w| trace.write_csv(w))?;
    dir.write_str(&sidecar, &(trace.sidecar_json() + "\n"))?;
    let manifest = RunManifest {
        command: "chart",
        config_path: args.cfg.config.as_ref().map(|p| p.display().to_string()),
        output_dir: args.out.out.display().to_string(),
        overrides: &overrides,
    };
    dir.write_str(&manifest_name, &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    if args.out.gnuplot {
        dir.write_str(&script, &output::chart_gnuplot(&csv, cfg.k))?;
    }
    eprintln!(
        "{} points, {} folds, identity crossings {:?}, termination {:?}",
        trace.points.len(),
        trace.folds().count(),
        trace.identity_crossings(),
        trace.termination
    );
    Ok(0)
}

fn cmd_tau_s(args: &TauSArgs) -> Result<u8, CliError> {
    check_tol(args.tol)?;
    let (mut cfg, _) = args.cfg.load()?;
    if let Some(k) = args.k {
        cfg.k = k;
    }
    cfg.validate()?;
    let opts = ContinuationOptions {
        tol: args.tol,
        tau_max: args.tau_max,
        ..Default::default()
    };
    let tau_s = find_tau_s(cfg.k, &cfg.a_m, &cfg.b, cfg.theta_b, &opts)?;
    print_json(&json!({"k": cfg.k, "theta_b": cfg.theta_b, "tau_s": tau_s}));
    Ok(0)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, CliError> {
    check_tol(args.tol)?;
    let (mut cfg, mut overrides) = args.cfg.load()?;
    args.delays.apply(&mut cfg, &mut overrides);
    cfg.validate()?;
    let report = match reference_bounds(&cfg.reference_bounds_input(args.tol)) {
        Ok(r) => r,
        Err(e @ Error::StabilityLost { .. }) => {
            print_json(&json!({"diverged": true, "bounds": null, "transient": null, "error": e.to_string()}));
            return Ok(3);
        }
        Err(e) => return Err(e.into()),
    };
    let transient = match cfg.transient_input(&report, args.tol) {
        Some(input) => Some((transient_constants(&input)?, input)),
        None => None,
    };
    let (constants, assumptions) = match &transient {
        Some((c, i)) => (
            json!(c),
            json!({"rho_u": i.rho_u, "d_theta": i.d_theta, "d_sigma": i.d_sigma, "Gamma": i.gamma}),
        ),
        None => (Value::Null, Value::Null),
    };
    print_json(&json!({
        "k": cfg.k,
        "tau": cfg.tau,
        "tau_hat": cfg.tau_hat,
        "diverged": report.diverged,
        "bounds": report,
        "transient": constants,
        "assumptions": assumptions,
    }));
    Ok(if report.diverged { 3 } else { 0 })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DELAYCTL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("DELAYCTL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot size the worker pool: {e}")))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Norm(a) => cmd_norm(a),
        Command::Chart(a) => cmd_chart(a),
        Command::TauS(a) => cmd_tau_s(a),
        Command::Bounds(a) => cmd_bounds(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("delayctl: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
