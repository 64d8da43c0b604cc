use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use flownet::commands::{
    limitflow_csv, parse_sweep, run_limitflow, run_mincut, run_resilience, run_simulate, trajectory_csv,
    ResilienceArgs, RunManifest, SimulateArgs,
};
use flownet::scenario::{validate_document, Scenario, ScenarioDocument};

const OUT_DIR_ENV: &str = "FLOWNET_OUT_DIR";

/// Dynamical flow networks: simulation, limit flows, min-cuts and weak resilience.
#[derive(Parser)]
#[command(name = "flownet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check topology, flow functions and routing policies.
    Validate {
        scenario: PathBuf,
        /// Random Jacobian samples per node for the cooperativity check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the dynamics and write trajectory.csv, summary.json and manifest.json.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory (default: $FLOWNET_OUT_DIR, then ./flownet-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum origin-destination cut capacity and a witness cut.
    Mincut {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bracket the weak resilience with scaling attacks.
    Resilience {
        scenario: PathBuf,
        /// Comma-separated transfer fractions (default 0.5,0.2,0.1,0.05).
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limit flow as a function of the inflow, as CSV.
    Limitflow {
        scenario: PathBuf,
        /// Inclusive range start:stop:step.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status 1: the input is invalid. Exit status 2: running it failed.
enum Failure {
    Invalid(String),
    Runtime(String),
}

fn out_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_path(path).map_err(|e| match e {
        flownet::scenario::ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
        other => Failure::Invalid(other.to_string()),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_files(dir: &Path, files: &[(&str, &str)], mut manifest: RunManifest) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, content) in files {
        std::fs::write(dir.join(name), content).map_err(io)?;
        manifest.outputs.push(name.to_string());
    }
    manifest.outputs.push("manifest.json".into());
    std::fs::write(dir.join("manifest.json"), to_json(&manifest)).map_err(io)
}

/// Prints `content` and, when an output directory is set, also stores it.
fn emit(out: Option<PathBuf>, name: &str, content: &str, manifest: RunManifest) -> Result<(), Failure> {
    print!("{content}");
    match out_dir(out) {
        Some(dir) => write_files(&dir, &[(name, content)], manifest),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario, samples, out } => {
            let doc = ScenarioDocument::from_path(&scenario).map_err(|e| match e {
                flownet::scenario::ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
                other => Failure::Invalid(other.to_string()),
            })?;
            let report = validate_document(&doc, samples);
            let json = to_json(&report);
            print!("{json}");
            if let Some(dir) = out_dir(out) {
                let mut manifest = RunManifest {
                    schema_version: flownet::commands::OUTPUT_SCHEMA_VERSION,
                    command: "validate".into(),
                    scenario_hash: doc.hash(),
                    seed: doc.seed,
                    tool_version: flownet::commands::TOOL_VERSION.into(),
                    arguments: Default::default(),
                    outputs: vec![],
                };
                manifest.arguments.insert("samples".into(), samples.to_string());
                write_files(&dir, &[("validation.json", &json)], manifest)?;
            }
            if report.valid {
                Ok(())
            } else {
                Err(Failure::Invalid("scenario failed validation".into()))
            }
        }
        Command::Simulate { scenario, horizon, dt, out } => {
            let sc = load(&scenario)?;
            let args = SimulateArgs { horizon, dt };
            let (traj, report) = run_simulate(&sc, &args);
            let dir = out_dir(out).unwrap_or_else(|| PathBuf::from("flownet-out"));
            let mut manifest = RunManifest::new("simulate", &sc, sc.document.seed);
            let cfg = args.config(&sc);
            manifest.arguments.insert("horizon".into(), cfg.horizon.to_string());
            manifest.arguments.insert("dt".into(), cfg.step_for(&sc.network).to_string());
            let summary = to_json(&report);
            match &traj {
                Some(t) => write_files(&dir, &[("trajectory.csv", &trajectory_csv(t)), ("summary.json", &summary)], manifest)?,
                None => write_files(&dir, &[("summary.json", &summary)], manifest)?,
            }
            print!("{summary}");
            match report.error {
                None => Ok(()),
                Some(e) => Err(Failure::Runtime(e)),
            }
        }
        Command::Mincut { scenario, out } => {
            let sc = load(&scenario)?;
            let report = run_mincut(&sc).map_err(|e| Failure::Runtime(e.to_string()))?;
            emit(out, "mincut.json", &to_json(&report), RunManifest::new("mincut", &sc, sc.document.seed))
        }
        Command::Resilience { scenario, alphas, samples, seed, jobs, out } => {
            let sc = load(&scenario)?;
            let args = ResilienceArgs { alphas, samples, seed, jobs };
            let report = run_resilience(&sc, &args).map_err(|e| match e {
                flownet::resilience::ResilienceError::NotResponsive { .. }
                | flownet::resilience::ResilienceError::BadParameter(_)
                | flownet::resilience::ResilienceError::InitialFlow(_) => Failure::Invalid(e.to_string()),
                other => Failure::Runtime(other.to_string()),
            })?;
            let mut manifest = RunManifest::new("resilience", &sc, report.seed);
            let alphas: Vec<String> = report.alpha_sweep.iter().map(|a| a.alpha.to_string()).collect();
            manifest.arguments.insert("alphas".into(), alphas.join(","));
            manifest.arguments.insert("samples".into(), report.samples.to_string());
            emit(out, "resilience.json", &to_json(&report), manifest)
        }
        Command::Limitflow { scenario, sweep, jobs, out } => {
            let sc = load(&scenario)?;
            let inflows = parse_sweep(&sweep).map_err(Failure::Invalid)?;
            let rows = run_limitflow(&sc, &inflows, jobs).map_err(Failure::Runtime)?;
            let mut manifest = RunManifest::new("limitflow", &sc, sc.document.seed);
            manifest.arguments.insert("sweep".into(), sweep);
            emit(out, "limitflow.csv", &limitflow_csv(&sc, &rows), manifest)
        }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
