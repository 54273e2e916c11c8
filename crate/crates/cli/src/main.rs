use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use impact_lab::config::{ConfigError, ExperimentConfig};
use impact_lab::executor::{run_schedule_with, run_surface_with, ControlSchedule, ExecConfig};
use impact_lab::experiments::cycle::limit_cycle_study_with;
use impact_lab::experiments::svg::{render_polar_svg, render_trajectory_svg, PolarVariant};
use impact_lab::experiments::sweep::{run_sweep, run_sweep_threads, sweep_csv};
use impact_lab::export::{write_text, WriteError};
use impact_lab::model::Surface;
use impact_lab::shooting::{solve, TerminalKind};
use impact_lab::symmetry::audit_trajectory;

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const THREADS_ENV: &str = "IMPACT_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "impact-lab", version, about = "Bouncing-disk impact experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// How the final time is measured.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Worker threads for the sweep (falls back to IMPACT_LAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Apex,
    FixedTime,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one trajectory; writes trajectory.csv and trajectory.svg.
    Simulate,
    /// Solve one reorientation target; prints a JSON record.
    Solve {
        #[arg(long)]
        theta_f: Option<f64>,
        /// Target duration T.
        #[arg(long = "T", alias = "duration")]
        duration: Option<f64>,
    },
    /// Controllability sweep; writes sweep.csv, controllability.svg and failure.svg.
    Sweep,
    /// Parabola limit-cycle study; writes cycle.csv, cycle.json and cycle.svg.
    LimitCycle,
    /// Momentum-map audit of the simulated trajectory; writes audit.csv.
    Audit,
}

enum Failure {
    Usage(String),
    Config(ConfigError),
    Io(WriteError),
}

impl From<WriteError> for Failure {
    fn from(e: WriteError) -> Self {
        Failure::Io(e)
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).map_err(Failure::Config)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = common.mode {
        cfg.solver.terminal = match mode {
            Mode::Apex => TerminalKind::Apex,
            Mode::FixedTime => TerminalKind::FixedTime,
        };
    }
    Ok(cfg)
}

fn thread_count(common: &Common) -> Result<Option<usize>, Failure> {
    let threads = match common.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
            ),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(Failure::Usage("thread count must be at least 1".into()));
    }
    Ok(threads)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|source| {
        Failure::Io(WriteError {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn simulate_trajectory(cfg: &ExperimentConfig) -> (impact_lab::HybridTrajectory, Surface) {
    let exec = cfg.solver.exec;
    match &cfg.sim.schedule {
        Some(controls) => {
            let schedule = ControlSchedule::from_controls(controls).expect("validated on load");
            let mode = cfg.solver.terminal.mode_for(&cfg.target);
            let traj = run_schedule_with(&cfg.sim.start, &schedule, &cfg.ball, mode, &exec);
            let surface = traj
                .events
                .last()
                .map(|e| e.surface)
                .unwrap_or_else(Surface::flat);
            (traj, surface)
        }
        None => {
            let surface = cfg.sim.surface();
            let traj = run_surface_with(
                &cfg.sim.start,
                &surface,
                &cfg.ball,
                cfg.sim.t_end,
                cfg.sim.max_bounces,
                &exec,
            );
            (traj, surface)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.common)?;
    let out = &cli.common.out;
    match cli.command {
        Command::Simulate => {
            prepare_out(out)?;
            let (traj, surface) = simulate_trajectory(&cfg);
            write_text(&out.join("trajectory.csv"), &traj.to_csv(&cfg.ball, cfg.sim.samples_per_arc))?;
            let svg = render_trajectory_svg(&traj, &surface, &cfg.ball, cfg.sim.samples_per_arc);
            write_text(&out.join("trajectory.svg"), &svg)?;
            println!(
                "{} impacts, terminated by {:?} at t = {}",
                traj.events.len(),
                traj.termination,
                traj.terminal_time
            );
        }
        Command::Solve { theta_f, duration } => {
            let mut target = cfg.target;
            if let Some(v) = theta_f {
                target.theta_f = v;
            }
            if let Some(v) = duration {
                target.duration = v;
            }
            if !target.is_valid() {
                return Err(Failure::Usage("target duration must be positive".into()));
            }
            let record = match solve(&target, &cfg.ball, &cfg.solver, cfg.seed) {
                Some(r) => json!({
                    "theta_f": target.theta_f,
                    "T": target.duration,
                    "bounces": r.bounce_count,
                    "error": r.error,
                    "controls": r.schedule.controls(),
                    "terminal_time": r.terminal_time,
                    "terminal": r.terminal,
                    "seed": r.seed,
                    "restart": r.restart,
                }),
                None => json!({
                    "theta_f": target.theta_f,
                    "T": target.duration,
                    "bounces": -1,
                    "seed": cfg.seed,
                }),
            };
            println!("{record}");
        }
        Command::Sweep => {
            prepare_out(out)?;
            let cells = match thread_count(&cli.common)? {
                Some(n) => run_sweep_threads(&cfg.grid, &cfg.ball, &cfg.solver, cfg.seed, n)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => run_sweep(&cfg.grid, &cfg.ball, &cfg.solver, cfg.seed),
            };
            write_text(&out.join("sweep.csv"), &sweep_csv(&cells))?;
            write_text(
                &out.join("controllability.svg"),
                &render_polar_svg(&cells, PolarVariant::Controllability),
            )?;
            write_text(&out.join("failure.svg"), &render_polar_svg(&cells, PolarVariant::Failure))?;
            let solved = cells.iter().filter(|c| c.is_solved()).count();
            println!("{solved} of {} cells solved", cells.len());
        }
        Command::LimitCycle => {
            prepare_out(out)?;
            let c = &cfg.cycle;
            let report = limit_cycle_study_with(c.alpha, &c.start, &c.ball, c.n_impacts, c.law)
                .map_err(|e| Failure::Config(ConfigError::Invalid(e.to_string())))?;
            write_text(&out.join("cycle.csv"), &report.to_csv())?;
            let summary = json!({
                "converged": report.converged,
                "converged_at": report.converged_at,
                "period": report.period,
                "period_states": report.period_states,
                "ratio_estimate": report.ratio_estimate,
                "mean_ratio": report.mean_ratio,
                "jacobian_radius": report.jacobian_radius,
                "spectral_radius_estimate": report.spectral_radius_estimate,
                "contraction_ratios": report.contraction_ratios,
            });
            let text = serde_json::to_string_pretty(&summary).expect("plain values serialize");
            write_text(&out.join("cycle.json"), &(text + "\n"))?;
            let surface = Surface::Parabola(c.alpha);
            let exec = ExecConfig {
                law: c.law,
                ..cfg.solver.exec
            };
            let traj = run_surface_with(&c.start, &surface, &c.ball, f64::INFINITY, c.n_impacts, &exec);
            write_text(
                &out.join("cycle.svg"),
                &render_trajectory_svg(&traj, &surface, &c.ball, cfg.sim.samples_per_arc),
            )?;
            println!(
                "period {:?}, converged {} (impact {:?}), ratio estimate {:?}, Jacobian radius {:?}",
                report.period,
                report.converged,
                report.converged_at,
                report.ratio_estimate,
                report.jacobian_radius
            );
        }
        Command::Audit => {
            prepare_out(out)?;
            let (traj, _) = simulate_trajectory(&cfg);
            let report = audit_trajectory(&traj, &cfg.ball);
            write_text(&out.join("audit.csv"), &report.to_csv())?;
            println!(
                "{} impacts, max |dJ| = {}, max |dA| = {}",
                report.events.len(),
                report.max_jump_j,
                report.max_jump_a
            );
        }
    }
    Ok(())
}

fn main_with<I: IntoIterator<Item = OsString>>(args: I) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn main() -> ExitCode {
    main_with(std::env::args_os())
}
