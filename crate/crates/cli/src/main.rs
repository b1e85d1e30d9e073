use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use singlimit::experiments::{
    estimate_wave_speed, make_initial_data, run_convergence_sweep, simulate_limit, simulate_system,
};
use singlimit::grid::Field;
use singlimit::model::{check_assumptions, equilibria};
use singlimit::output::{errors_svg, manifest_csv, snapshots_svg, write_atomic, write_report, write_snapshot, write_svg};
use singlimit::{config, Error, RunConfig, ScaledModel, Variant};

#[derive(Parser)]
#[command(name = "singlimit", version, about = "Wolbachia reaction-diffusion systems and their bistable limit")]
struct Cli {
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    /// Two-population system of the configured variant.
    System,
    /// Scalar limit equation.
    Limit,
    /// Two-population system under the alternative scaling.
    Alt,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one model and write snapshot CSVs and a manifest.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "system")]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG plot of the frequency snapshots.
        #[arg(long)]
        svg: bool,
    },
    /// Run the epsilon sweep and write report.csv.
    Converge {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Print the homogeneous steady states with their stability.
    Equilibria {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the fitted front speed over the configured window.
    Wavespeed {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "system")]
        model: ModelKind,
    },
    /// Audit the structural assumptions; exits with status 3 on failure.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
    Assumptions,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    config::parse_config(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn model_for(cfg: &RunConfig, kind: ModelKind) -> Result<ScaledModel, Failure> {
    let variant = if kind == ModelKind::Alt {
        Variant::AlternativeScaling
    } else {
        cfg.variant
    };
    Ok(ScaledModel::new(cfg.params, cfg.epsilon, variant)?)
}

fn threads() -> usize {
    match std::env::var("SINGLIMIT_THREADS") {
        Ok(v) => v.trim().parse().unwrap_or(0),
        Err(_) => std::thread::available_parallelism().map_or(0, |n| n.get()),
    }
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

/// Frequency snapshots of one run at the configured output cadence, plus
/// extra named fields for system runs.
fn run_snapshots(
    cfg: &RunConfig,
    kind: ModelKind,
    every: usize,
) -> Result<Vec<(f64, Vec<(&'static str, Field)>)>, Failure> {
    let model = model_for(cfg, kind)?;
    let dt = cfg.solver.dt;
    let mut out = Vec::new();
    match kind {
        ModelKind::Limit => {
            let p = Field::from_fn(cfg.solver.grid, |x| cfg.init.profile(x));
            cfg.init.validate(&cfg.solver.grid)?;
            simulate_limit(&model, p, &cfg.solver, every, |step, p| {
                out.push((step as f64 * dt, vec![("p", p.clone())]));
                Ok(())
            })?;
        }
        ModelKind::System | ModelKind::Alt => {
            let (state, _) = make_initial_data(&model, &cfg.init, cfg.solver.grid)?;
            simulate_system(&model, state, &cfg.solver, every, |step, s, r| {
                out.push((
                    step as f64 * dt,
                    vec![("p", r.p.clone()), ("ni", s.ni.clone()), ("nu", s.nu.clone())],
                ));
                Ok(())
            })?;
        }
    }
    Ok(out)
}

fn simulate(cfg: &RunConfig, kind: ModelKind, out: &Path, svg: bool) -> Outcome {
    create_dir(out)?;
    let every = cfg.solver.output_every;
    let snaps = run_snapshots(cfg, kind, every)?;
    let mut manifest = Vec::new();
    for (k, (t, fields)) in snaps.iter().enumerate() {
        for (name, field) in fields {
            let file = format!("{name}_{k:04}.csv");
            write_snapshot(field, &out.join(&file))?;
            manifest.push((*t, file));
        }
    }
    write_atomic(&out.join("manifest.csv"), &manifest_csv(&manifest))?;
    if svg {
        let series: Vec<_> = snaps.iter().map(|(t, f)| (*t, f[0].1.clone())).collect();
        write_svg(&snapshots_svg(&series, "frequency p"), &out.join("p.svg"))?;
    }
    println!("wrote {} snapshots to {}", snaps.len(), out.display());
    Ok(())
}

fn converge(cfg: &RunConfig, out: &Path, svg: bool) -> Outcome {
    create_dir(out)?;
    let mut sweep = cfg.sweep.clone();
    sweep.threads = threads();
    let report = run_convergence_sweep(cfg.params, cfg.variant, &sweep, &cfg.init, &cfg.solver)?;
    write_report(&report, &out.join("report.csv"))?;
    if svg {
        write_svg(&errors_svg(&report), &out.join("errors.svg"))?;
    }
    println!("{:>8} {:>12} {:>12} {:>10} {:>8}", "epsilon", "err_p", "err_m", "speed", "seconds");
    for i in 0..report.epsilons.len() {
        let speed = report.speeds[i].map_or("n/a".to_string(), |s| format!("{s:.5}"));
        println!(
            "{:>8} {:>12.6e} {:>12.6e} {:>10} {:>8.2}",
            report.epsilons[i], report.err_p[i], report.err_m[i], speed, report.runtimes[i]
        );
    }
    if let Some(s) = report.limit_speed {
        println!("limit speed {s:.5}");
    }
    Ok(())
}

fn show_equilibria(cfg: &RunConfig) -> Outcome {
    let model = cfg.model()?;
    println!("epsilon = {}, variant = {}", cfg.epsilon, cfg.variant.name());
    println!("{:<12} {:>14} {:>14} {:>10}", "state", "n_i", "n_u", "stability");
    for eq in equilibria(&model)? {
        println!(
            "{:<12} {:>14.9} {:>14.9} {:>10}",
            eq.label.name(),
            eq.ni,
            eq.nu,
            format!("{:?}", eq.stability).to_lowercase()
        );
    }
    Ok(())
}

fn wavespeed(cfg: &RunConfig, kind: ModelKind) -> Outcome {
    let snaps = run_snapshots(cfg, kind, cfg.sweep.speed_every)?;
    let series: Vec<_> = snaps.into_iter().map(|(t, mut f)| (t, f.swap_remove(0).1)).collect();
    let speed = estimate_wave_speed(&series, cfg.sweep.speed_level, cfg.sweep.speed_window)?;
    println!("{speed:.6}");
    Ok(())
}

fn check(cfg: &RunConfig) -> Outcome {
    let report = check_assumptions(&cfg.model()?, 60)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Assumptions)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = (|| -> Outcome {
        let config_path = match &cli.command {
            Some(
                Command::Simulate { config, .. }
                | Command::Converge { config, .. }
                | Command::Equilibria { config }
                | Command::Wavespeed { config, .. }
                | Command::Check { config },
            ) => config.as_deref(),
            None => None,
        };
        let cfg = load(config_path)?;
        if cli.show_config {
            print!("{}", cfg.show());
            return Ok(());
        }
        match &cli.command {
            Some(Command::Simulate { model, out, svg, .. }) => simulate(&cfg, *model, out, *svg),
            Some(Command::Converge { out, svg, .. }) => converge(&cfg, out, *svg),
            Some(Command::Equilibria { .. }) => show_equilibria(&cfg),
            Some(Command::Wavespeed { model, .. }) => wavespeed(&cfg, *model),
            Some(Command::Check { .. }) => check(&cfg),
            None => Err(Failure::Validation("no subcommand given; see --help".into())),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Assumptions) => {
            eprintln!("assumption check failed");
            ExitCode::from(3)
        }
    }
}
