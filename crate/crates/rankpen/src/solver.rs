//! Fixed-point solvers for rank-penalized structured approximation.
//!
//! All solvers iterate the pair `(W, A)` where `W` is the dual matrix and
//! `A = Lambda a` the structured approximant:
//!
//! ```text
//! U  = a + beta^-1 M*(h - M a)
//! W' = S_s(q Lambda U + P_perp W)
//! a' = (q U - beta^-1 Lambda* W') / (q - 1)
//! ```
//!
//! The basic problem is the special case `U = f`.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::structure::{Generator, StructureMap};
use crate::svcalc::{self, frob_dist_sq, frob_norm, penalty_r_from_sigma, shrink_unchecked};
use crate::{c64, ComplexMatrix};

const GRAM_TOL: f64 = 1e-8;
const STAGNATION_JUMP: f64 = 0.1;
const STAGNATION_RUN: usize = 50;
const TAU_FLOOR: f64 = 1e-12;
const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mode {
    FixedTau,
    /// Re-choose `tau` every iteration so that `K` singular values survive.
    FixedRank { k: usize },
}

/// How fixed-rank mode derives `tau` from the K-th singular value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauRule {
    #[default]
    SigmaOverQ,
    QTimesSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tau: f64,
    pub q: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub mode: Mode,
    pub gap_tol: f64,
    pub tau_rule: TauRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            q: 2.0,
            max_iter: 5000,
            rel_tol: 1e-10,
            mode: Mode::FixedTau,
            gap_tol: 1e-3,
            tau_rule: TauRule::SigmaOverQ,
        }
    }
}

impl SolverConfig {
    pub fn fixed_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }

    pub fn fixed_rank(k: usize) -> Self {
        Self { mode: Mode::FixedRank { k }, ..Self::default() }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_gap_tol(mut self, gap_tol: f64) -> Self {
        self.gap_tol = gap_tol;
        self
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(invalid_param(format!("q must lie in (1, inf), got {}", self.q)));
        }
        if self.max_iter == 0 {
            return Err(invalid_param("max_iter must be positive"));
        }
        svcalc::positive("rel_tol", self.rel_tol)?;
        svcalc::positive("gap_tol", self.gap_tol)?;
        match self.mode {
            Mode::FixedTau => svcalc::positive("tau", self.tau)?,
            Mode::FixedRank { k } => {
                if k == 0 || k > rows.min(cols) {
                    return Err(invalid_param(format!(
                        "rank {k} must lie in 1..={} for a {rows}x{cols} matrix",
                        rows.min(cols)
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convexity {
    StrictlyConvex,
    Convex,
    Nonconvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub a_star: ComplexMatrix,
    pub w_star: ComplexMatrix,
    pub generator: Generator,
    pub sigma_w: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub iterations: usize,
    /// `||W_{n+1} - W_n||_F` per iteration.
    pub residual_history: Vec<f64>,
    pub objective_value: f64,
    pub certificate: Certificate,
    pub final_tau: f64,
    pub converged: bool,
    /// False when the convergence theory does not cover the run
    /// (fixed-rank mode or a nonconvex objective).
    pub guaranteed: bool,
    pub convexity: Convexity,
    pub tau_frozen: bool,
}

impl SolveResult {
    pub fn rank(&self) -> usize {
        svcalc::rank_from_sigma(&self.sigma_a, RANK_TOL)
    }
}

/// A linear map from generators on Omega to a measurement space.
#[derive(Debug, Clone)]
pub struct SamplingOperator {
    cols: usize,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Diagonal(Vec<f64>),
    Sparse(Vec<Vec<(usize, f64)>>),
    Dense(ComplexMatrix),
}

impl SamplingOperator {
    pub fn diagonal(weights: Vec<f64>) -> Self {
        Self { cols: weights.len(), repr: Repr::Diagonal(weights) }
    }

    /// Real sparse rows of `(column, weight)` pairs.
    pub fn sparse(rows: Vec<Vec<(usize, f64)>>, cols: usize) -> Result<Self> {
        for (j, row) in rows.iter().enumerate() {
            if let Some(&(c, _)) = row.iter().find(|&&(c, _)| c >= cols) {
                return Err(invalid_input(format!("row {j} references column {c} of {cols}")));
            }
        }
        Ok(Self { cols, repr: Repr::Sparse(rows) })
    }

    pub fn dense(matrix: ComplexMatrix) -> Self {
        Self { cols: matrix.ncols(), repr: Repr::Dense(matrix) }
    }

    pub fn rows(&self) -> usize {
        match &self.repr {
            Repr::Diagonal(d) => d.len(),
            Repr::Sparse(r) => r.len(),
            Repr::Dense(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Multiplies row `j` by `s[j]`.
    pub fn scale_rows(&self, s: &[f64]) -> Result<Self> {
        if s.len() != self.rows() {
            return Err(invalid_input(format!("{} row scales for {} rows", s.len(), self.rows())));
        }
        let repr = match &self.repr {
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().zip(s).map(|(x, y)| x * y).collect()),
            Repr::Sparse(rows) => Repr::Sparse(
                rows.iter()
                    .zip(s)
                    .map(|(row, &y)| row.iter().map(|&(c, x)| (c, x * y)).collect())
                    .collect(),
            ),
            Repr::Dense(m) => Repr::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s[i])),
        };
        Ok(Self { cols: self.cols, repr })
    }

    pub fn forward(&self, a: &[c64]) -> Vec<c64> {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().zip(a).map(|(w, x)| x * *w).collect(),
            Repr::Sparse(rows) => rows
                .iter()
                .map(|row| row.iter().map(|&(c, w)| a[c] * w).sum())
                .collect(),
            Repr::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * a[j]).sum())
                .collect(),
        }
    }

    pub fn adjoint(&self, v: &[c64]) -> Vec<c64> {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().zip(v).map(|(w, x)| x * *w).collect(),
            Repr::Sparse(rows) => {
                let mut out = vec![c64::new(0.0, 0.0); self.cols];
                for (row, &x) in rows.iter().zip(v) {
                    for &(c, w) in row {
                        out[c] += x * w;
                    }
                }
                out
            }
            Repr::Dense(m) => (0..m.ncols())
                .map(|j| (0..m.nrows()).map(|i| m[(i, j)].conj() * v[i]).sum())
                .collect(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Diagonal(d) => Mat::from_fn(d.len(), d.len(), |i, j| {
                c64::new(if i == j { d[i] } else { 0.0 }, 0.0)
            }),
            Repr::Sparse(rows) => {
                let mut m = Mat::zeros(rows.len(), self.cols);
                for (i, row) in rows.iter().enumerate() {
                    for &(c, w) in row {
                        m[(i, c)] += c64::new(w, 0.0);
                    }
                }
                m
            }
            Repr::Dense(m) => m.clone(),
        }
    }

    /// Smallest and largest eigenvalue of `D M* M D` with `D = beta^{-1/2}`:
    /// the bounds of `M* M` restricted to the structured subspace.
    pub fn gram_bounds(&self, beta: &[f64]) -> Result<(f64, f64)> {
        if beta.len() != self.cols {
            return Err(invalid_input(format!("{} multiplicities for {} columns", beta.len(), self.cols)));
        }
        if let Repr::Diagonal(d) = &self.repr {
            let vals = d.iter().zip(beta).map(|(w, b)| w * w / b);
            let lo = vals.clone().fold(f64::INFINITY, f64::min);
            let hi = vals.fold(0.0, f64::max);
            return Ok((lo, hi));
        }
        if let Repr::Sparse(rows) = &self.repr {
            let mut b = Mat::<f64>::zeros(rows.len(), self.cols);
            for (i, row) in rows.iter().enumerate() {
                for &(c, w) in row {
                    b[(i, c)] += w / beta[c].sqrt();
                }
            }
            return gram_extremes_real(&b);
        }
        let m = self.to_dense();
        let b = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / beta[j].sqrt());
        gram_extremes(&b)
    }
}

fn gram_extremes_real(b: &Mat<f64>) -> Result<(f64, f64)> {
    let tall = b.nrows() >= b.ncols();
    let gram = if tall { b.transpose() * b } else { b * b.transpose() };
    let eig = gram.self_adjoint_eigenvalues(Side::Lower).map_err(|_| eig_failure(gram.nrows()))?;
    Ok(extremes(&eig, tall))
}

fn gram_extremes(b: &ComplexMatrix) -> Result<(f64, f64)> {
    let tall = b.nrows() >= b.ncols();
    let gram = if tall { b.adjoint() * b } else { b * b.adjoint() };
    let eig = gram.self_adjoint_eigenvalues(Side::Lower).map_err(|_| eig_failure(gram.nrows()))?;
    Ok(extremes(&eig, tall))
}

fn eig_failure(n: usize) -> Error {
    Error::NoConvergence { routine: "self_adjoint_eigenvalues", rows: n, cols: n }
}

// a wide operator has a nontrivial kernel, so its lower bound is 0
fn extremes(eig: &[f64], tall: bool) -> (f64, f64) {
    let hi = eig.last().copied().unwrap_or(0.0).max(0.0);
    let lo = if tall { eig.first().copied().unwrap_or(0.0).max(0.0) } else { 0.0 };
    (lo, hi)
}

fn check_structured(map: &StructureMap, f: &ComplexMatrix) -> Result<Generator> {
    let g = crate::structure::generator_of(map, f)?;
    let off = frob_dist_sq(f, &map.lift_raw(&g)).sqrt();
    if off > 1e-10 * frob_norm(f).max(1.0) {
        return Err(invalid_input(format!("F is not structured: distance to the subspace is {off:.3e}")));
    }
    Ok(g)
}

fn shrink_matrix(z: &ComplexMatrix, tau: f64, q: f64) -> Result<(ComplexMatrix, Vec<f64>)> {
    let d = svcalc::svd(z)?;
    let vals: Vec<f64> = d.sigma.iter().map(|&s| shrink_unchecked(s, tau, q)).collect();
    Ok((d.recompose(&vals), vals))
}

/// One application of the basic operator: `S_s(q F + P_perp W)`.
pub fn basic_step(w: &ComplexMatrix, f: &ComplexMatrix, map: &StructureMap, tau: f64, q: f64) -> Result<ComplexMatrix> {
    svcalc::Shrink::new(tau, q)?;
    svcalc::same_shape(w, f)?;
    let fg = check_structured(map, f)?;
    let z = shift_argument(map, w, &fg, q);
    Ok(shrink_matrix(&z, tau, q)?.0)
}

/// `q Lambda u + W - P_H W`.
fn shift_argument(map: &StructureMap, w: &ComplexMatrix, u: &[c64], q: f64) -> ComplexMatrix {
    let pw = map.average_raw(w);
    let cols = map.cols();
    Mat::from_fn(map.rows(), cols, |m, n| {
        let c = map.cell_index(m, n);
        u[c] * q + w[(m, n)] - pw[c]
    })
}

enum DataTerm<'a> {
    Basic { f: &'a [c64] },
    Sampled { op: &'a SamplingOperator, h: &'a [c64] },
}

impl DataTerm<'_> {
    fn target(&self, a: &[c64], beta: &[f64]) -> Vec<c64> {
        match self {
            DataTerm::Basic { f } => f.to_vec(),
            DataTerm::Sampled { op, h } => {
                let r: Vec<c64> = op.forward(a).iter().zip(h.iter()).map(|(x, y)| y - x).collect();
                let g = op.adjoint(&r);
                a.iter().zip(&g).zip(beta).map(|((x, y), b)| x + y / b).collect()
            }
        }
    }

    /// `q ||M a - h||^2`; equals `q ||A - F||_F^2` in the basic case.
    fn misfit(&self, a: &[c64], beta: &[f64], q: f64) -> f64 {
        match self {
            DataTerm::Basic { f } => q * a.iter().zip(f.iter()).zip(beta).map(|((x, y), b)| b * (x - y).norm_sqr()).sum::<f64>(),
            DataTerm::Sampled { op, h } => q * op.forward(a).iter().zip(h.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>(),
        }
    }
}

fn weighted_norm(a: &[c64], beta: &[f64]) -> f64 {
    a.iter().zip(beta).map(|(x, b)| b * x.norm_sqr()).sum::<f64>().sqrt()
}

/// `sigma_K / q` (or `q sigma_K` under [`TauRule::QTimesSigma`]), floored at
/// `1e-12 sigma_1` when `sigma_K` vanishes.
pub fn adapt_tau(sigma: &[f64], k: usize, q: f64) -> Result<f64> {
    adapt_tau_with(sigma, k, q, TauRule::SigmaOverQ)
}

pub fn adapt_tau_with(sigma: &[f64], k: usize, q: f64, rule: TauRule) -> Result<f64> {
    if k == 0 || k > sigma.len() {
        return Err(invalid_param(format!("rank {k} out of range 1..={}", sigma.len())));
    }
    let sk = sigma[k - 1];
    if sk == 0.0 {
        return Ok(TAU_FLOOR * sigma[0]);
    }
    Ok(match rule {
        TauRule::SigmaOverQ => sk / q,
        TauRule::QTimesSigma => q * sk,
    })
}

struct TauTracker {
    history: Vec<f64>,
    jumps: usize,
    frozen: Option<f64>,
}

impl TauTracker {
    fn new() -> Self {
        Self { history: Vec::new(), jumps: 0, frozen: None }
    }

    fn next(&mut self, proposed: f64) -> f64 {
        if let Some(t) = self.frozen {
            return t;
        }
        if let Some(&prev) = self.history.last() {
            if (proposed - prev).abs() > STAGNATION_JUMP * prev {
                self.jumps += 1;
            } else {
                self.jumps = 0;
            }
        }
        self.history.push(proposed);
        if self.jumps >= STAGNATION_RUN {
            let mut sorted = self.history.clone();
            sorted.sort_by(f64::total_cmp);
            let t = sorted[sorted.len() / 2];
            self.frozen = Some(t);
            return t;
        }
        proposed
    }
}

fn run(
    map: &StructureMap,
    data: DataTerm<'_>,
    a0: Generator,
    cfg: &SolverConfig,
    convexity: Convexity,
) -> Result<SolveResult> {
    cfg.validate(map.rows(), map.cols())?;
    let beta = map.beta_f64();
    let q = cfg.q;
    let mut w: ComplexMatrix = Mat::zeros(map.rows(), map.cols());
    let mut a = a0;
    let mut tracker = TauTracker::new();
    let mut tau = cfg.tau;
    let mut sigma_w = vec![0.0; map.rows().min(map.cols())];
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        let u = data.target(&a, &beta);
        let z = shift_argument(map, &w, &u, q);
        let d = svcalc::svd(&z)?;
        if let Mode::FixedRank { k } = cfg.mode {
            tau = tracker.next(adapt_tau_with(&d.sigma, k, q, cfg.tau_rule)?);
        }
        sigma_w = d.sigma.iter().map(|&s| shrink_unchecked(s, tau, q)).collect();
        let w_next = d.recompose(&sigma_w);
        let pw = map.average_raw(&w_next);
        let a_next: Generator = u.iter().zip(&pw).map(|(x, y)| (x * q - y) / (q - 1.0)).collect();

        let step = frob_dist_sq(&w_next, &w).sqrt();
        let rel_w = step / frob_norm(&w).max(1.0);
        let da: Vec<c64> = a_next.iter().zip(&a).map(|(x, y)| x - y).collect();
        let rel_a = weighted_norm(&da, &beta) / weighted_norm(&a, &beta).max(1.0);
        history.push(step);
        w = w_next;
        a = a_next;
        if rel_w.max(rel_a) < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let a_star = map.lift_raw(&a);
    let sigma_a = svcalc::singular_values(&a_star)?;
    let objective_value = penalty_r_from_sigma(&sigma_a, tau) + data.misfit(&a, &beta, q);
    let cert = certificate_from_sigma(&sigma_w, tau, cfg.gap_tol);
    Ok(SolveResult {
        a_star,
        w_star: w,
        generator: a,
        sigma_w,
        sigma_a,
        iterations: history.len(),
        residual_history: history,
        objective_value,
        certificate: cert,
        final_tau: tau,
        converged,
        guaranteed: cfg.mode == Mode::FixedTau && convexity != Convexity::Nonconvex,
        convexity,
        tau_frozen: tracker.frozen.is_some(),
    })
}

/// Minimizes `R_tau(A) + q ||A - F||_F^2` over the structured subspace.
pub fn solve_basic(f: &ComplexMatrix, map: &StructureMap, cfg: &SolverConfig) -> Result<SolveResult> {
    let fg = check_structured(map, f)?;
    svcalc::check_finite(f)?;
    run(map, DataTerm::Basic { f: &fg }, fg.clone(), cfg, Convexity::StrictlyConvex)
}

/// The general operator: returns `(W', A')` for the data term `||M a - h||^2`.
pub fn general_step(
    w: &ComplexMatrix,
    a: &ComplexMatrix,
    h: &[c64],
    op: &SamplingOperator,
    map: &StructureMap,
    tau: f64,
    q: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    svcalc::Shrink::new(tau, q)?;
    svcalc::same_shape(w, a)?;
    check_operator(op, h, map)?;
    let ag = check_structured(map, a)?;
    let beta = map.beta_f64();
    let u = DataTerm::Sampled { op, h }.target(&ag, &beta);
    let z = shift_argument(map, w, &u, q);
    let (w_next, _) = shrink_matrix(&z, tau, q)?;
    let pw = map.average_raw(&w_next);
    let a_next: Generator = u.iter().zip(&pw).map(|(x, y)| (x * q - y) / (q - 1.0)).collect();
    Ok((w_next, map.lift_raw(&a_next)))
}

fn check_operator(op: &SamplingOperator, h: &[c64], map: &StructureMap) -> Result<(f64, f64)> {
    if op.cols() != map.omega_len() {
        return Err(invalid_input(format!(
            "operator acts on {} generator entries, structure has {}",
            op.cols(),
            map.omega_len()
        )));
    }
    if h.len() != op.rows() {
        return Err(invalid_input(format!("data has length {}, operator has {} rows", h.len(), op.rows())));
    }
    let (lo, hi) = op.gram_bounds(&map.beta_f64())?;
    if hi > 1.0 + GRAM_TOL {
        return Err(Error::Precondition(format!(
            "sampling operator has squared norm {hi:.6e} on the structured subspace, must be at most 1"
        )));
    }
    Ok((lo, hi))
}

fn classify(lo: f64) -> Convexity {
    if lo > 1.0 + GRAM_TOL {
        Convexity::StrictlyConvex
    } else if lo >= 1.0 - GRAM_TOL {
        Convexity::Convex
    } else {
        Convexity::Nonconvex
    }
}

/// Iterates the general operator from `W = 0` and the given starting generator.
pub fn solve_general(
    h: &[c64],
    op: &SamplingOperator,
    map: &StructureMap,
    a0: Generator,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let (lo, _) = check_operator(op, h, map)?;
    if a0.len() != map.omega_len() {
        return Err(invalid_input("starting generator length does not match the structure"));
    }
    // the data term carries weight q, so convexity needs q M*M >= I on the subspace
    let convexity = classify(lo * cfg.q);
    run(map, DataTerm::Sampled { op, h }, a0, cfg, convexity)
}

/// Classification of `R_tau(Lambda a) + sum mu |a - f|^2` by `min(mu / beta)`.
pub fn check_convexity_weighted(mu: &[f64], beta: &[f64], q: f64) -> Result<Convexity> {
    if mu.len() != beta.len() {
        return Err(invalid_input(format!("{} weights for {} generator entries", mu.len(), beta.len())));
    }
    if q.is_nan() || q <= 1.0 {
        return Err(invalid_param(format!("q must exceed 1, got {q}")));
    }
    let ratio_min = mu.iter().zip(beta).map(|(m, b)| m / b).fold(f64::INFINITY, f64::min);
    Ok(if ratio_min > 1.0 {
        Convexity::StrictlyConvex
    } else if ratio_min == 1.0 {
        Convexity::Convex
    } else {
        Convexity::Nonconvex
    })
}

fn check_weights(mu: &[f64], n: usize) -> Result<()> {
    if mu.len() != n {
        return Err(invalid_input(format!("{} weights for {n} entries", mu.len())));
    }
    if let Some((j, m)) = mu.iter().enumerate().find(|(_, m)| !(**m >= 0.0 && m.is_finite())) {
        return Err(invalid_input(format!("weight {j} is {m}, must be nonnegative")));
    }
    Ok(())
}

/// Minimizes `R_tau(Lambda a) + sum_l mu_l |a_l - f_l|^2`.
pub fn solve_weighted(f: &[c64], mu: &[f64], map: &StructureMap, cfg: &SolverConfig) -> Result<SolveResult> {
    let n = map.omega_len();
    if f.len() != n {
        return Err(invalid_input(format!("data has length {}, structure has {n} nodes", f.len())));
    }
    check_weights(mu, n)?;
    cfg.validate(map.rows(), map.cols())?;
    let beta = map.beta_f64();
    let worst = mu.iter().zip(&beta).map(|(m, b)| m / b).fold(0.0, f64::max);
    if worst > cfg.q * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "q = {} is below max(mu / beta) = {worst}",
            cfg.q
        )));
    }
    let convexity = check_convexity_weighted(mu, &beta, cfg.q)?;
    let scale: Vec<f64> = mu.iter().map(|m| (m / cfg.q).sqrt()).collect();
    let h: Vec<c64> = f.iter().zip(&scale).map(|(x, s)| x * *s).collect();
    let op = SamplingOperator::diagonal(scale);
    let a0: Generator = f.iter().zip(mu).zip(&beta).map(|((x, m), b)| x * (m / (cfg.q * b))).collect();
    run(map, DataTerm::Sampled { op: &op, h: &h }, a0, cfg, convexity)
}

/// Minimizes `R_tau(Lambda a) + sum_j mu_j |(I a - f)_j|^2` for an
/// interpolation operator `I` from generator nodes to sample points.
pub fn solve_unequal(
    f: &[c64],
    mu: &[f64],
    map: &StructureMap,
    interp: &SamplingOperator,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let j = interp.rows();
    if f.len() != j {
        return Err(invalid_input(format!("{} samples for an operator with {j} rows", f.len())));
    }
    if interp.cols() != map.omega_len() {
        return Err(invalid_input(format!(
            "interpolation acts on {} nodes, structure has {}",
            interp.cols(),
            map.omega_len()
        )));
    }
    check_weights(mu, j)?;
    cfg.validate(map.rows(), map.cols())?;
    let beta = map.beta_f64();
    let weighted = interp.scale_rows(&mu.iter().map(|m| m.sqrt()).collect::<Vec<_>>())?;
    let (lo, hi) = weighted.gram_bounds(&beta)?;
    if hi > cfg.q * (1.0 + GRAM_TOL) {
        return Err(Error::Precondition(format!(
            "weighted interpolation has squared norm {hi:.6e} on the structured subspace; q = {} is too small, need q >= {hi:.6e}",
            cfg.q
        )));
    }
    let convexity = classify(lo);
    let scale: Vec<f64> = mu.iter().map(|m| (m / cfg.q).sqrt()).collect();
    let op = interp.scale_rows(&scale)?;
    let h: Vec<c64> = f.iter().zip(&scale).map(|(x, s)| x * *s).collect();
    let mf: Vec<c64> = f.iter().zip(mu).map(|(x, m)| x * (m / cfg.q)).collect();
    let a0: Generator = interp.adjoint(&mf).iter().zip(&beta).map(|(x, b)| x / b).collect();
    run(map, DataTerm::Sampled { op: &op, h: &h }, a0, cfg, convexity)
}

fn certificate_from_sigma(sigma: &[f64], tau: f64, gap_tol: f64) -> Certificate {
    let margin = sigma.iter().map(|s| (s - tau).abs()).fold(f64::INFINITY, f64::min);
    Certificate { certified: margin > gap_tol * tau, margin }
}

/// `margin = min_j |sigma_j(W) - tau|`, certified when `margin > gap_tol tau`.
pub fn certificate(w_star: &ComplexMatrix, tau: f64, gap_tol: f64) -> Result<Certificate> {
    svcalc::positive("tau", tau)?;
    Ok(certificate_from_sigma(&svcalc::singular_values(w_star)?, tau, gap_tol))
}

/// `X = 2p (P_H W - F) + 2 P_perp W` and `Y = -2p (P_H W - F)`, `p = q / (q - 1)`.
pub fn dual_variables(
    w_star: &ComplexMatrix,
    f: &ComplexMatrix,
    map: &StructureMap,
    q: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    svcalc::same_shape(w_star, f)?;
    if q.is_nan() || q <= 1.0 {
        return Err(invalid_param(format!("q must exceed 1, got {q}")));
    }
    let p = q / (q - 1.0);
    let ph = crate::structure::project_h(map, w_star)?;
    let x = Mat::from_fn(f.nrows(), f.ncols(), |i, j| {
        (ph[(i, j)] - f[(i, j)]) * (2.0 * p) + (w_star[(i, j)] - ph[(i, j)]) * 2.0
    });
    let y = Mat::from_fn(f.nrows(), f.ncols(), |i, j| (ph[(i, j)] - f[(i, j)]) * (-2.0 * p));
    Ok((x, y))
}
