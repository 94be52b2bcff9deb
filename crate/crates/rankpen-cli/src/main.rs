use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankpen::{estimation, ExpModel, ExpTerm, Kernel, Mode, SolveResult, SolverConfig};
use rankpen_cli::config::{ExperimentConfig, ExperimentKind, GridSpec};
use rankpen_cli::error::{CliError, CliResult};
use rankpen_cli::experiment;
use rankpen_cli::io::{self, Signal};

/// Rank-penalized Hankel approximation and exponential fitting.
#[derive(Parser)]
#[command(name = "rankpen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise equally spaced 1-D samples (CSV `x_1,re,im`).
    Denoise {
        input: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Fit a sum of `--rank` exponentials and print the model as JSON.
    Fit {
        input: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Grid nodes for off-grid 1-D samples (default: odd, at least the sample count).
        #[arg(long)]
        grid_nodes: Option<usize>,
        /// Grid spacing per axis for samples in two or more dimensions.
        #[arg(long, value_delimiter = ',')]
        spacing: Vec<f64>,
        /// Row-domain shape per axis for samples in two or more dimensions.
        #[arg(long, value_delimiter = ',')]
        xi_shape: Vec<usize>,
        #[arg(long, value_enum, default_value = "cubic")]
        kernel: KernelArg,
    },
    /// Run experiments from configs or presets.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run a JSON config; omitted fields come from the named experiment's preset.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a built-in preset.
    Preset {
        name: String,
        #[command(flatten)]
        flags: Flags,
        /// Print the preset config as JSON instead of running it.
        #[arg(long)]
        print_config: bool,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed threshold (selects the fixed-tau mode).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Target rank (selects the fixed-rank mode).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative change at which iteration stops.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KernelArg {
    Linear,
    Cubic,
}

impl Flags {
    fn solver(&self, base: SolverConfig) -> CliResult<SolverConfig> {
        let mut cfg = base;
        match (self.tau, self.rank) {
            (Some(_), Some(_)) => return Err(CliError::config("tau", "pass either --tau or --rank, not both")),
            (Some(tau), None) => {
                cfg.mode = Mode::FixedTau;
                cfg.tau = tau;
            }
            (None, Some(k)) => cfg.mode = Mode::FixedRank { k },
            (None, None) => {}
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(t) = self.tol {
            cfg.rel_tol = t;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Denoise { input, flags } => denoise(&input, &flags),
        Command::Fit { input, flags, grid_nodes, spacing, xi_shape, kernel } => {
            let kernel = match kernel {
                KernelArg::Linear => Kernel::Linear,
                KernelArg::Cubic => Kernel::Cubic,
            };
            fit(&input, &flags, grid_nodes, &spacing, &xi_shape, kernel)
        }
        Command::Experiment { action } => match action {
            ExperimentAction::Run { config, flags } => {
                let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
                run_config(ExperimentConfig::from_json(&text)?, &flags)
            }
            ExperimentAction::Preset { name, flags, print_config } => {
                let cfg = ExperimentConfig::preset(name.parse::<ExperimentKind>()?);
                if print_config {
                    println!("{}", cfg.to_json());
                    return Ok(());
                }
                run_config(cfg, &flags)
            }
        },
    }
}

fn run_config(mut cfg: ExperimentConfig, flags: &Flags) -> CliResult<()> {
    if let Some(seed) = flags.seed {
        cfg.noise.seed = seed;
    }
    if let Some(k) = flags.rank {
        cfg.rank = k;
    }
    cfg.solver = flags.solver(cfg.solver)?;
    let out = flags
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.name()));
    let report = experiment::run_experiment(&cfg)?;
    report.save(&out)?;
    print!("{}", report.summary());
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// Grid spec when the 1-D points are equally spaced to within `1e-9` of the step.
fn equispaced(sig: &Signal) -> Option<GridSpec> {
    if sig.dim() != 1 || sig.len() < 3 {
        return None;
    }
    let x: Vec<f64> = sig.points.iter().map(|p| p[0]).collect();
    let grid = GridSpec { nodes: x.len(), lower: x[0], upper: x[x.len() - 1] };
    let h = grid.spacing();
    let ok = h > 0.0 && x.iter().zip(grid.positions()).all(|(a, b)| (a - b).abs() <= 1e-9 * h);
    ok.then_some(grid)
}

fn report_solve(res: &SolveResult) {
    eprintln!(
        "iterations {}  converged {}  rank {}  tau {:.6e}  certified {} (margin {:.3e})",
        res.iterations,
        res.converged,
        res.rank(),
        res.final_tau,
        res.certificate.certified,
        res.certificate.margin
    );
}

fn denoise(input: &Path, flags: &Flags) -> CliResult<()> {
    if flags.tau.is_none() && flags.rank.is_none() {
        return Err(CliError::config("tau", "pass --tau or --rank"));
    }
    let sig = io::load_signal(input)?;
    let grid = equispaced(&sig).ok_or_else(|| CliError::config("input", "denoise needs equally spaced 1-D samples"))?;
    let cfg = flags.solver(SolverConfig::default())?;
    let map = experiment::hankel_for(grid.nodes)?;
    let res = experiment::solve_grid(&sig.values, None, &map, &cfg)?;
    report_solve(&res);
    let out = flags.out.clone().unwrap_or_else(|| input.with_extension("denoised.csv"));
    io::save_signal(&out, &Signal::new(sig.points.clone(), res.generator))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn fit(
    input: &Path,
    flags: &Flags,
    grid_nodes: Option<usize>,
    spacing: &[f64],
    xi_shape: &[usize],
    kernel: Kernel,
) -> CliResult<()> {
    let k = flags.rank.ok_or_else(|| CliError::config("rank", "fit needs --rank"))?;
    let cfg = flags.solver(SolverConfig::fixed_rank(k))?;
    let sig = io::load_signal(input)?;
    if sig.is_empty() {
        return Err(CliError::config("input", "no samples"));
    }
    let freqs: Vec<Vec<rankpen::c64>> = if sig.dim() == 1 {
        let (res, h) = match (equispaced(&sig), grid_nodes) {
            (Some(grid), None) => {
                let res = experiment::solve_grid(&sig.values, None, &experiment::hankel_for(grid.nodes)?, &cfg)?;
                (res, grid.spacing())
            }
            (_, nodes) => {
                let (lo, hi) = sig.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
                let nodes = nodes.unwrap_or(sig.len() | 1);
                let grid = GridSpec { nodes, lower: lo, upper: hi };
                let setup = experiment::setup_scattered_1d(&sig.points, &grid, kernel, cfg.q)?;
                (experiment::solve_scattered(&setup, &sig.values, None, &cfg)?, grid.spacing())
            }
        };
        report_solve(&res);
        estimation::extract_freqs_1d(&res.generator, k, h)?.freqs.into_iter().map(|z| vec![z]).collect()
    } else {
        let d = sig.dim();
        if spacing.len() != d || xi_shape.len() != d {
            return Err(CliError::config("spacing", format!("{d}-D samples need --spacing and --xi-shape with {d} values")));
        }
        let setup = experiment::setup_scattered_nd(&sig.points, spacing, xi_shape, kernel, cfg.q)?;
        let res = experiment::solve_scattered(&setup, &sig.values, None, &cfg)?;
        report_solve(&res);
        estimation::extract_freqs_nd(&res.a_star, &setup.map, k, spacing)?
    };
    let fit = estimation::fit_coeffs(&freqs, &sig.points, &sig.values)?;
    if fit.ill_conditioned {
        eprintln!("warning: amplitude fit is ill-conditioned (condition {:.3e})", fit.condition);
    }
    let terms = freqs.into_iter().zip(fit.coeffs).map(|(zeta, c)| ExpTerm { c, zeta }).collect();
    let model = ExpModel::new(sig.dim(), terms)?;
    match &flags.out {
        Some(path) => {
            io::save_model(path, &model)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&model).expect("models serialize")),
    }
    Ok(())
}
