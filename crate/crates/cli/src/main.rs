mod commands;
mod config;
mod error;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::Config;
use error::{exit, CliError};
use output::{Manifest, Sink};

/// Laser-driven emission from a flat metal surface: exact boundary solver,
/// wavefield, periodic states and figure reproduction.
#[derive(Parser)]
#[command(name = "photoemission", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration, or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Number of laser periods.
    #[arg(long, global = true, value_name = "N")]
    periods: Option<usize>,
    /// Comma-separated positions in nm.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',', num_args = 1..)]
    x_nm: Option<Vec<f64>>,
    /// Fixed channel truncation -N..=N of the periodic solver.
    #[arg(long, global = true, value_name = "N")]
    channels: Option<usize>,
    /// Upper bound on worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Double every resolution parameter.
    #[arg(long, global = true)]
    refine: bool,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Boundary values psi(0, t), d_x psi(0, t) and j(0, t).
    Solve,
    /// psi(x, t) and j(x, t) at the requested positions.
    Field,
    /// Periodic-state channel amplitudes.
    Floquet,
    /// Exact surface current against a Crank-Nicolson run.
    CompareCn,
    /// Double average of the current across the one-photon threshold.
    Scan,
    /// Running average and its per-period spread.
    Decay,
    /// Recompute one of the published figures.
    Reproduce {
        #[arg(value_parser = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"])]
        figure: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Field => "field",
            Command::Floquet => "floquet",
            Command::CompareCn => "compare-cn",
            Command::Scan => "scan",
            Command::Decay => "decay",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// Applies the command-line overrides on top of the file.
fn resolve(common: &Common, mut cfg: Config) -> Config {
    if let Some(n) = common.periods {
        cfg.periods = n;
    }
    if let Some(x) = &common.x_nm {
        cfg.x_nm = x.clone();
    }
    if let Some(n) = common.channels {
        cfg.channels = Some(n);
    }
    cfg.refine |= common.refine;
    cfg
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let common = &cli.common;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let mut sink = Sink::new(&common.out)?;
    let (config, figure, runs) = match &cli.command {
        Command::Reproduce { figure } => {
            if common.periods.is_some() || common.x_nm.is_some() {
                return Err(CliError::Invalid(
                    "figures fix their periods and positions; drop --periods and --x-nm".into(),
                ));
            }
            let id: u8 = figure[3..].parse().map_err(|_| CliError::Invalid(figure.clone()))?;
            let fig = figures::figure(id).ok_or_else(|| CliError::Invalid(figure.clone()))?;
            let base = match &common.config {
                Some(path) => Config::load(path)?,
                None => Config::with_physics(figures::FERMI_EV, figures::WORK_FUNCTION_EV, 0.0, 1.0),
            };
            let base = resolve(common, base);
            let runs = fig.configs(&base);
            runs.iter().try_for_each(Config::validate)?;
            fig.reproduce(&base, &mut sink)?;
            (runs[0].clone(), Some(fig), runs)
        }
        command => {
            let path = common
                .config
                .as_ref()
                .ok_or_else(|| CliError::Config(format!("`{}` needs --config", command.name())))?;
            let cfg = resolve(common, Config::load(path)?);
            cfg.validate()?;
            match command {
                Command::Solve => commands::solve(&cfg, &mut sink)?,
                Command::Field => commands::field(&cfg, &mut sink)?,
                Command::Floquet => commands::floquet(&cfg, &mut sink)?,
                Command::CompareCn => commands::compare_cn(&cfg, &mut sink)?,
                Command::Scan => commands::scan(&cfg, &mut sink)?,
                Command::Decay => commands::decay(&cfg, &mut sink)?,
                Command::Reproduce { .. } => unreachable!(),
            }
            (cfg, None, Vec::new())
        }
    };
    let manifest = Manifest {
        subcommand: cli.command.name().to_string(),
        figure: figure.map(|f| format!("fig{}", f.id)),
        caption: figure.map(|f| f.caption.to_string()),
        config,
        runs: if runs.len() > 1 { runs } else { Vec::new() },
        outputs: Vec::new(),
        diagnostics: Default::default(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    sink.finish(manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli)));
    let code = match outcome {
        Ok(Ok(path)) => {
            println!("wrote {}", path.display());
            0
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.code()
        }
        Err(_) => exit::INTERNAL,
    };
    ExitCode::from(code as u8)
}
