//! Fixtures shared by the benchmarks.

use rankpen::{c64, estimation, structure, ComplexMatrix, ExpModel, StructureMap};

/// Noisy three-term signal on `n` equispaced nodes of `[0, 1]`.
pub fn signal(n: usize, snr_db: f64) -> Vec<c64> {
    let model = ExpModel::one_d(&[
        (c64::new(1.0, 0.0), c64::new(-0.5, 20.0)),
        (c64::new(0.6, 0.3), c64::new(0.0, -7.0)),
        (c64::new(0.4, -0.2), c64::new(-1.0, 41.0)),
    ]);
    let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
    let clean = estimation::synthesize(&model, &pts).expect("1-D model");
    estimation::add_noise(&clean, snr_db, 11).expect("finite samples")
}

/// Square Hankel structure and data matrix for `2m - 1` samples.
pub fn hankel_problem(m: usize, snr_db: f64) -> (StructureMap, ComplexMatrix, Vec<c64>) {
    let map = structure::hankel_map(m, m).expect("positive size");
    let f = signal(2 * m - 1, snr_db);
    let big_f = structure::lift(&map, &f).expect("matching length");
    (map, big_f, f)
}
