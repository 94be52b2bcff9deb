//! Built-in experiment definitions and the published test signals.

use rankpen::{c64, ExpModel, ExpTerm, Kernel, SolverConfig};

use crate::config::{CurveSpec, ExperimentConfig, ExperimentKind, GridSpec, NoiseSpec, ScatterSpec, Snr, WeightSpec};

/// Four-term test signal: imaginary exponents and unit-modulus amplitudes.
#[allow(clippy::approx_constant)]
pub const FOUR_EXP_ZETA: [f64; 4] = [-23.141, -3.1416, 2.7183, 31.006];
pub const FOUR_EXP_COEFF: [(f64, f64); 4] = [(1.0, 0.0), (0.62348, 0.78183), (-0.22252, 0.97493), (-0.90097, 0.43388)];

/// The 20 known samples (1-based) of the missing-data test on 257 nodes.
pub const MISSING_DATA_KNOWN: [usize; 20] = [
    22, 32, 34, 40, 91, 92, 99, 112, 119, 123, 127, 146, 152, 165, 170, 174, 175, 190, 241, 244,
];

/// Oscillation frequencies of the ten-term 2-D curve signal, per axis.
pub const CURVE_TEN_ZETA1: [f64; 10] = [
    -50.0, -42.5903, -35.1806, -20.3613, -6.67724, 4.98657, 9.27734, 19.4458, 36.6455, 47.9858,
];
pub const CURVE_TEN_ZETA2: [f64; 10] = [
    -50.0, 12.8766, 40.7788, -2.72062, -34.2402, -42.4351, 18.0841, -9.77757, -27.3052, 33.6813,
];

pub fn four_exp() -> ExpModel {
    let pairs: Vec<(c64, c64)> = FOUR_EXP_ZETA
        .iter()
        .zip(FOUR_EXP_COEFF)
        .map(|(&z, (re, im))| (c64::new(re, im), c64::new(0.0, z)))
        .collect();
    ExpModel::one_d(&pairs)
}

/// Ten undamped 2-D terms with unit amplitudes.
pub fn curve_ten() -> ExpModel {
    let terms = CURVE_TEN_ZETA1
        .iter()
        .zip(CURVE_TEN_ZETA2)
        .map(|(&a, b)| ExpTerm { c: c64::new(1.0, 0.0), zeta: vec![c64::new(0.0, a), c64::new(0.0, b)] })
        .collect();
    ExpModel::new(2, terms).expect("valid model")
}

/// Two undamped 2-D terms used for curve recovery.
pub fn curve_pair() -> ExpModel {
    let terms = vec![
        ExpTerm { c: c64::new(1.0, 0.0), zeta: vec![c64::new(0.0, -6.0), c64::new(0.0, 3.6)] },
        ExpTerm { c: c64::new(0.7, 0.7), zeta: vec![c64::new(0.0, 4.5), c64::new(0.0, 7.5)] },
    ];
    ExpModel::new(2, terms).expect("valid model")
}

/// Two undamped 1-D terms for the scattered-sample experiment.
pub fn scatter_pair() -> ExpModel {
    ExpModel::one_d(&[
        (c64::new(1.0, 0.0), c64::new(0.0, -12.0)),
        (c64::new(0.8, -0.5), c64::new(0.0, 7.0)),
    ])
}

fn unit_interval(nodes: usize) -> GridSpec {
    GridSpec { nodes, lower: -0.5, upper: 0.5 }
}

fn noiseless() -> NoiseSpec {
    NoiseSpec { snr_db: vec![Snr::NOISELESS], trials: 1, seed: 0 }
}

pub fn preset(kind: ExperimentKind) -> ExperimentConfig {
    let base = ExperimentConfig {
        experiment: kind,
        model: four_exp(),
        data_path: None,
        grid: unit_interval(257),
        noise: noiseless(),
        solver: SolverConfig::fixed_rank(4),
        rank: 4,
        weights: WeightSpec::Triangular,
        kernel: Kernel::Linear,
        scatter: None,
        curve: None,
        output: None,
    };
    match kind {
        ExperimentKind::DenoiseEquispaced => base,
        ExperimentKind::Weighted => ExperimentConfig {
            weights: WeightSpec::Uniform { value: None },
            noise: NoiseSpec { snr_db: vec![Snr(20.0)], trials: 5, seed: 0 },
            solver: SolverConfig::fixed_rank(4).with_rel_tol(1e-8),
            ..base
        },
        ExperimentKind::MissingData => ExperimentConfig {
            weights: WeightSpec::Mask { known: MISSING_DATA_KNOWN.to_vec() },
            solver: SolverConfig::fixed_rank(4).with_q(8.0).with_max_iter(20000),
            ..base
        },
        ExperimentKind::Unequal1d => ExperimentConfig {
            model: scatter_pair(),
            grid: unit_interval(65),
            weights: WeightSpec::Uniform { value: None },
            kernel: Kernel::Cubic,
            scatter: Some(ScatterSpec { samples: 80, seed: 1 }),
            solver: SolverConfig::fixed_rank(2).with_max_iter(20000).with_rel_tol(1e-12),
            rank: 2,
            ..base
        },
        ExperimentKind::Curve2d => ExperimentConfig {
            model: curve_pair(),
            weights: WeightSpec::Uniform { value: None },
            kernel: Kernel::Cubic,
            curve: Some(CurveSpec { extent: 4.0, samples: 1200, spacing: 0.05, xi_shape: vec![8, 8] }),
            solver: SolverConfig::fixed_rank(2).with_max_iter(20000).with_rel_tol(1e-11),
            rank: 2,
            ..base
        },
        ExperimentKind::SnrSweep => ExperimentConfig {
            grid: unit_interval(65),
            weights: WeightSpec::Uniform { value: None },
            noise: NoiseSpec { snr_db: [0.0, 5.0, 10.0, 15.0, 20.0].map(Snr).to_vec(), trials: 50, seed: 0 },
            solver: SolverConfig::fixed_rank(4).with_rel_tol(1e-6),
            ..base
        },
    }
}
