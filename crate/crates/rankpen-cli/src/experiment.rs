//! Experiment pipelines shared by the `experiment` and `fit`/`denoise` commands.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankpen::estimation::{self, InterpGrid, InterpSpec, Kernel};
use rankpen::solver::{self, SamplingOperator, SolveResult, SolverConfig};
use rankpen::structure::{self, StructureMap};
use rankpen::{c64, ExpModel, Mode};

use crate::config::{CurveSpec, ExperimentConfig, ExperimentKind, GridSpec, Snr, WeightSpec};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::matching::{match_indices, matched_errors};
use crate::report::{Reconstruction, Report, TrialRow};

/// Square (or nearly square) Hankel structure for `n` equispaced samples.
pub fn hankel_for(n: usize) -> CliResult<StructureMap> {
    Ok(structure::hankel_map(n - n / 2, n / 2 + 1)?)
}

/// Data weights over the nodes of a 1-D grid; `None` selects the plain
/// Frobenius problem.
pub fn resolve_weights(spec: &WeightSpec, grid: &GridSpec, map: &StructureMap, q: f64) -> CliResult<Option<Vec<f64>>> {
    let n = grid.nodes;
    let beta = map.beta_f64();
    Ok(match spec {
        WeightSpec::Triangular => None,
        WeightSpec::Uniform { value } => Some(vec![value.unwrap_or(q); n]),
        WeightSpec::Mask { known } => {
            let mut mu = vec![0.0; n];
            for &i in known {
                mu[i - 1] = q * beta[i - 1];
            }
            Some(mu)
        }
        WeightSpec::Gapped { gap_lower, gap_upper, keep } => {
            let kept = gapped_nodes(grid, *gap_lower, *gap_upper, *keep)?;
            let mut mu = vec![0.0; n];
            for i in kept {
                mu[i] = q * beta[i];
            }
            Some(mu)
        }
        WeightSpec::Custom { path } => {
            let mu = io::load_weights(path)?;
            if mu.len() != n {
                return Err(CliError::config("weights.path", format!("{} weights for {n} nodes", mu.len())));
            }
            Some(mu)
        }
    })
}

/// 0-based kept nodes: everything outside the gap, then odd-indexed nodes are
/// dropped from the outer ends inward until `keep` remain.
pub fn gapped_nodes(grid: &GridSpec, lower: f64, upper: f64, keep: usize) -> CliResult<Vec<usize>> {
    let pos = grid.positions();
    let mut kept: Vec<usize> = (0..grid.nodes).filter(|&i| pos[i] < lower || pos[i] > upper).collect();
    if kept.len() < keep {
        return Err(CliError::config("weights.keep", format!("only {} nodes lie outside the gap", kept.len())));
    }
    let centre = 0.5 * (grid.lower + grid.upper);
    let mut odd: Vec<usize> = kept.iter().copied().filter(|i| i % 2 == 1).collect();
    odd.sort_by(|&a, &b| (pos[b] - centre).abs().total_cmp(&(pos[a] - centre).abs()).then(a.cmp(&b)));
    let excess = kept.len() - keep;
    if excess > odd.len() {
        return Err(CliError::config("weights.keep", "cannot thin that far by parity"));
    }
    let dropped: std::collections::BTreeSet<usize> = odd[..excess].iter().copied().collect();
    kept.retain(|i| !dropped.contains(i));
    Ok(kept)
}

/// Solves on an equispaced 1-D grid.
pub fn solve_grid(values: &[c64], mu: Option<&[f64]>, map: &StructureMap, cfg: &SolverConfig) -> CliResult<SolveResult> {
    Ok(match mu {
        None => solver::solve_basic(&structure::lift(map, values)?, map, cfg)?,
        Some(mu) => solver::solve_weighted(values, mu, map, cfg)?,
    })
}

/// Structure, interpolation and the default weight for scattered samples.
pub struct ScatteredSetup {
    pub map: StructureMap,
    pub grid: InterpGrid,
    pub interp: SamplingOperator,
    /// Largest constant weight admissible for the chosen `q`.
    pub max_uniform_weight: f64,
}

/// 1-D scattered samples interpolated from a Hankel grid of `grid.nodes` nodes.
pub fn setup_scattered_1d(points: &[Vec<f64>], grid: &GridSpec, kernel: Kernel, q: f64) -> CliResult<ScatteredSetup> {
    let map = hankel_for(grid.nodes)?;
    let igrid = InterpGrid::for_structure(&map, vec![grid.lower], vec![grid.spacing()]);
    finish_setup(map, igrid, points, kernel, q)
}

/// d-D scattered samples: nearest-node Upsilon, rectangular Xi, and a grid
/// origin shifted so each sample sits near the middle of its Xi block.
pub fn setup_scattered_nd(
    points: &[Vec<f64>],
    spacing: &[f64],
    xi_shape: &[usize],
    kernel: Kernel,
    q: f64,
) -> CliResult<ScatteredSetup> {
    let (upsilon, xi) = structure::build_grids(points, spacing, xi_shape)?;
    let map = structure::general_domain_map(&xi, &upsilon)?;
    let origin: Vec<f64> = spacing.iter().zip(xi_shape).map(|(l, &s)| -l * ((s - 1) / 2) as f64).collect();
    let igrid = InterpGrid::for_structure(&map, origin, spacing.to_vec());
    finish_setup(map, igrid, points, kernel, q)
}

fn finish_setup(map: StructureMap, grid: InterpGrid, points: &[Vec<f64>], kernel: Kernel, q: f64) -> CliResult<ScatteredSetup> {
    let interp = estimation::build_interp(&InterpSpec { grid: grid.clone(), kernel, points: points.to_vec() })?;
    let (_, hi) = interp.gram_bounds(&map.beta_f64())?;
    Ok(ScatteredSetup { map, grid, interp, max_uniform_weight: q / hi })
}

/// Solves with uniform weights (`mu` or the largest admissible value).
pub fn solve_scattered(setup: &ScatteredSetup, values: &[c64], mu: Option<f64>, cfg: &SolverConfig) -> CliResult<SolveResult> {
    let mu = vec![mu.unwrap_or(setup.max_uniform_weight); values.len()];
    Ok(solver::solve_unequal(values, &mu, &setup.map, &setup.interp, cfg)?)
}

/// Points `extent * (0.05 + 0.9 t, 0.5 + 0.35 sin(3 pi t))` for equally spaced `t` in `[0, 1]`.
pub fn curve_points(spec: &CurveSpec) -> Vec<Vec<f64>> {
    let j = spec.samples;
    (0..j)
        .map(|i| {
            let t = if j > 1 { i as f64 / (j - 1) as f64 } else { 0.5 };
            vec![
                spec.extent * (0.05 + 0.9 * t),
                spec.extent * (0.5 + 0.35 * (3.0 * std::f64::consts::PI * t).sin()),
            ]
        })
        .collect()
}

/// `samples` sorted uniform draws on `[lower, upper]`.
pub fn scatter_points(grid: &GridSpec, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..samples).map(|_| rng.random_range(grid.lower..=grid.upper)).collect();
    xs.sort_by(f64::total_cmp);
    xs.into_iter().map(|x| vec![x]).collect()
}

fn uniform_weight(kind: ExperimentKind, weights: &WeightSpec) -> CliResult<Option<f64>> {
    match weights {
        WeightSpec::Uniform { value } => Ok(*value),
        _ => Err(CliError::config(
            "weights",
            format!("{} supports uniform weights only", kind.name()),
        )),
    }
}

/// Frequency and amplitude estimates for one solve.
struct Estimate {
    freqs: Vec<Vec<c64>>,
    coeffs: Vec<c64>,
}

struct Scores {
    freq_err: Vec<f64>,
    coef_err_max: f64,
}

fn score(model: &ExpModel, est: &Estimate) -> Scores {
    let truth: Vec<(Vec<c64>, c64)> = model.terms().iter().map(|t| (t.zeta.clone(), t.c)).collect();
    let found: Vec<(Vec<c64>, c64)> = est.freqs.iter().cloned().zip(est.coeffs.iter().copied()).collect();
    let dist = |a: &(Vec<c64>, c64), b: &(Vec<c64>, c64)| -> f64 {
        a.0.iter().zip(&b.0).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    };
    let mut freq_err = Vec::new();
    let mut coef_err_max: f64 = 0.0;
    if found.is_empty() {
        let d = model.dim();
        return Scores { freq_err: vec![f64::INFINITY; truth.len() * d], coef_err_max: f64::INFINITY };
    }
    let pairing = match_indices(&truth, &found, dist);
    for (t, m) in truth.iter().zip(pairing) {
        match m {
            Some(j) => {
                freq_err.extend(t.0.iter().zip(&found[j].0).map(|(x, y)| (x - y).norm()));
                coef_err_max = coef_err_max.max((t.1 - found[j].1).norm());
            }
            None => {
                freq_err.extend(std::iter::repeat_n(f64::INFINITY, t.0.len()));
                coef_err_max = f64::INFINITY;
            }
        }
    }
    Scores { freq_err, coef_err_max }
}

fn estimate_1d(generator: &[c64], positions: &[Vec<f64>], k: usize, spacing: f64) -> CliResult<Estimate> {
    let e = estimation::extract_freqs_1d(generator, k, spacing)?;
    let freqs: Vec<Vec<c64>> = e.freqs.iter().map(|&z| vec![z]).collect();
    let fit = estimation::fit_coeffs(&freqs, positions, generator)?;
    Ok(Estimate { freqs, coeffs: fit.coeffs })
}

fn max_and_rel(estimate: &[c64], truth: &[c64]) -> (f64, f64) {
    let max = estimate.iter().zip(truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let num: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = truth.iter().map(|z| z.norm_sqr()).sum();
    (max, (num / den).sqrt())
}

struct Outcome {
    row: TrialRow,
    recon: Reconstruction,
}

fn base_row(trial: usize, seed: u64, snr: Snr, res: &SolveResult, scores: Scores, recon: (f64, f64)) -> TrialRow {
    let mean = scores.freq_err.iter().sum::<f64>() / scores.freq_err.len().max(1) as f64;
    let max = scores.freq_err.iter().copied().fold(0.0, f64::max);
    TrialRow {
        trial,
        seed,
        snr_db: snr,
        freq_err: scores.freq_err,
        freq_err_mean: mean,
        freq_err_max: max,
        coef_err_max: scores.coef_err_max,
        recon_err_max: recon.0,
        recon_err_rel: recon.1,
        esprit_freq_err_mean: None,
        iterations: res.iterations,
        converged: res.converged,
        certified: res.certificate.certified,
        final_tau: res.final_tau,
        estimates: vec![],
        runtime_s: 0.0,
    }
}

/// Runs every trial of the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Report> {
    cfg.validate()?;
    let mut solver_cfg = cfg.solver;
    if let Mode::FixedRank { .. } = solver_cfg.mode {
        solver_cfg.mode = Mode::FixedRank { k: cfg.rank };
    }
    let runner: Box<dyn Fn(usize, u64, Snr) -> CliResult<Outcome>> = match cfg.experiment {
        ExperimentKind::Unequal1d => Box::new(unequal_runner(cfg, solver_cfg)?),
        ExperimentKind::Curve2d => Box::new(curve_runner(cfg, solver_cfg)?),
        _ => Box::new(grid_runner(cfg, solver_cfg)?),
    };
    let mut rows = Vec::new();
    let mut recons = Vec::new();
    let mut trial = 0;
    for &snr in &cfg.noise.snr_db {
        for t in 0..cfg.noise.trials {
            let seed = cfg.noise.seed + t as u64;
            let start = Instant::now();
            let mut out = runner(trial, seed, snr)?;
            out.row.runtime_s = start.elapsed().as_secs_f64();
            rows.push(out.row);
            recons.push(out.recon);
            trial += 1;
        }
    }
    Ok(Report::new(cfg.clone(), rows, recons))
}

fn grid_runner(cfg: &ExperimentConfig, solver_cfg: SolverConfig) -> CliResult<impl Fn(usize, u64, Snr) -> CliResult<Outcome>> {
    let grid = cfg.grid.clone();
    let positions: Vec<Vec<f64>> = grid.positions().into_iter().map(|x| vec![x]).collect();
    let clean = match &cfg.data_path {
        Some(path) => {
            let sig = io::load_signal(path)?;
            if sig.values.len() != grid.nodes || sig.dim() != 1 {
                return Err(CliError::config(
                    "data_path",
                    format!("expected {} 1-D samples, found {}", grid.nodes, sig.values.len()),
                ));
            }
            sig.values
        }
        None => estimation::synthesize(&cfg.model, &positions)?,
    };
    let map = hankel_for(grid.nodes)?;
    let mu = resolve_weights(&cfg.weights, &grid, &map, solver_cfg.q)?;
    let complete_data = !matches!(cfg.weights, WeightSpec::Mask { .. } | WeightSpec::Gapped { .. });
    let model = cfg.model.clone();
    let k = cfg.rank;
    let h = grid.spacing();
    Ok(move |trial: usize, seed: u64, snr: Snr| -> CliResult<Outcome> {
        let noisy = estimation::add_noise(&clean, snr.0, seed)?;
        let res = solve_grid(&noisy, mu.as_deref(), &map, &solver_cfg)?;
        let est = estimate_1d(&res.generator, &positions, k, h)?;
        let scores = score(&model, &est);
        let mut row = base_row(trial, seed, snr, &res, scores, max_and_rel(&res.generator, &clean));
        if complete_data {
            let e = estimation::esprit_1d(&noisy, k, h)?;
            let freqs: Vec<Vec<c64>> = e.freqs.iter().map(|&z| vec![z]).collect();
            let errs = matched_errors(&model.frequencies(), &freqs, |a, b| (a[0] - b[0]).norm());
            row.esprit_freq_err_mean = Some(errs.iter().sum::<f64>() / errs.len().max(1) as f64);
        }
        row.estimates = est.freqs;
        Ok(Outcome { row, recon: Reconstruction { trial, points: positions.clone(), values: res.generator } })
    })
}

fn unequal_runner(cfg: &ExperimentConfig, solver_cfg: SolverConfig) -> CliResult<impl Fn(usize, u64, Snr) -> CliResult<Outcome>> {
    let mu = uniform_weight(cfg.experiment, &cfg.weights)?;
    let scatter = cfg.scatter.clone().expect("validated");
    let points = scatter_points(&cfg.grid, scatter.samples, scatter.seed);
    let setup = setup_scattered_1d(&points, &cfg.grid, cfg.kernel, solver_cfg.q)?;
    let clean = estimation::synthesize(&cfg.model, &points)?;
    let nodes: Vec<Vec<f64>> = setup.grid.nodes.iter().map(|n| setup.grid.position(n)).collect();
    let truth_nodes = estimation::synthesize(&cfg.model, &nodes)?;
    let model = cfg.model.clone();
    let k = cfg.rank;
    let h = cfg.grid.spacing();
    Ok(move |trial: usize, seed: u64, snr: Snr| -> CliResult<Outcome> {
        let noisy = estimation::add_noise(&clean, snr.0, seed)?;
        let res = solve_scattered(&setup, &noisy, mu, &solver_cfg)?;
        let est = estimate_1d(&res.generator, &nodes, k, h)?;
        let mut row = base_row(trial, seed, snr, &res, score(&model, &est), max_and_rel(&res.generator, &truth_nodes));
        row.estimates = est.freqs;
        Ok(Outcome { row, recon: Reconstruction { trial, points: nodes.clone(), values: res.generator } })
    })
}

fn curve_runner(cfg: &ExperimentConfig, solver_cfg: SolverConfig) -> CliResult<impl Fn(usize, u64, Snr) -> CliResult<Outcome>> {
    let mu = uniform_weight(cfg.experiment, &cfg.weights)?;
    let curve = cfg.curve.clone().expect("validated");
    let points = curve_points(&curve);
    let spacing = vec![curve.spacing; 2];
    let setup = setup_scattered_nd(&points, &spacing, &curve.xi_shape, cfg.kernel, solver_cfg.q)?;
    let clean = estimation::synthesize(&cfg.model, &points)?;
    let model = cfg.model.clone();
    let k = cfg.rank;
    Ok(move |trial: usize, seed: u64, snr: Snr| -> CliResult<Outcome> {
        let noisy = estimation::add_noise(&clean, snr.0, seed)?;
        let res = solve_scattered(&setup, &noisy, mu, &solver_cfg)?;
        let freqs = estimation::extract_freqs_nd(&res.a_star, &setup.map, k, &spacing)?;
        let fit = estimation::fit_coeffs(&freqs, &points, &noisy)?;
        let est = Estimate { freqs, coeffs: fit.coeffs };
        let fitted = setup.interp.forward(&res.generator);
        let mut row = base_row(trial, seed, snr, &res, score(&model, &est), max_and_rel(&fitted, &clean));
        row.estimates = est.freqs;
        Ok(Outcome { row, recon: Reconstruction { trial, points: points.clone(), values: fitted } })
    })
}
