//! Rank-penalized approximation of Hankel and general-domain Hankel matrices
//! by fixed-point iteration, with tools for fitting sums of exponentials.
//!
//! ```
//! use rankpen::{c64, estimation, solver, structure};
//!
//! let map = structure::hankel_map(8, 8).unwrap();
//! let f: Vec<c64> = (0..15).map(|n| c64::from_polar(1.0, 0.4 * n as f64)).collect();
//! let big_f = structure::lift(&map, &f).unwrap();
//! let res = solver::solve_basic(&big_f, &map, &solver::SolverConfig::fixed_rank(1)).unwrap();
//! let est = estimation::extract_freqs_1d(&res.generator, 1, 1.0).unwrap();
//! assert!((est.freqs[0] - c64::new(0.0, 0.4)).norm() < 1e-8);
//! ```

pub mod error;
pub mod estimation;
pub mod solver;
pub mod structure;
pub mod svcalc;

pub use faer::Mat;
pub use num_complex::Complex64 as c64;

pub use error::{Error, Result};
pub use estimation::{ExpModel, ExpTerm, FreqEstimate, InterpGrid, InterpSpec, Kernel};
pub use solver::{Certificate, Convexity, Mode, SamplingOperator, SolveResult, SolverConfig, TauRule};
pub use structure::{Generator, GridPoint, StructureMap};
pub use svcalc::SvdFactors;

/// Dense complex matrix, the ambient space for all structured problems.
pub type ComplexMatrix = faer::Mat<c64>;
