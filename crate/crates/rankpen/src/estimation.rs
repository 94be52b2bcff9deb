//! Exponential models, noise, interpolation, and frequency extraction.

use std::collections::HashMap;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::solver::SamplingOperator;
use crate::structure::{GridPoint, StructureMap};
use crate::svcalc::{self, SvdFactors};
use crate::{c64, ComplexMatrix};

const CONDITION_LIMIT: f64 = 1e12;
const SUBSPACE_RANK_TOL: f64 = 1e-10;
const EIGEN_GAP_TOL: f64 = 1e-6;

/// One term `c exp(zeta . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub c: c64,
    pub zeta: Vec<c64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TermDocument>", into = "Vec<TermDocument>")]
pub struct ExpModel {
    terms: Vec<ExpTerm>,
    dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermDocument {
    re_c: f64,
    im_c: f64,
    re_zeta: Vec<f64>,
    im_zeta: Vec<f64>,
}

impl TryFrom<Vec<TermDocument>> for ExpModel {
    type Error = Error;

    fn try_from(docs: Vec<TermDocument>) -> Result<Self> {
        let dim = docs.first().map_or(1, |d| d.re_zeta.len());
        let terms = docs
            .into_iter()
            .map(|d| {
                if d.re_zeta.len() != d.im_zeta.len() {
                    return Err(invalid_input("re_zeta and im_zeta lengths differ"));
                }
                Ok(ExpTerm {
                    c: c64::new(d.re_c, d.im_c),
                    zeta: d.re_zeta.iter().zip(&d.im_zeta).map(|(&r, &i)| c64::new(r, i)).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ExpModel::new(dim, terms)
    }
}

impl From<ExpModel> for Vec<TermDocument> {
    fn from(m: ExpModel) -> Self {
        m.terms
            .into_iter()
            .map(|t| TermDocument {
                re_c: t.c.re,
                im_c: t.c.im,
                re_zeta: t.zeta.iter().map(|z| z.re).collect(),
                im_zeta: t.zeta.iter().map(|z| z.im).collect(),
            })
            .collect()
    }
}

impl ExpModel {
    pub fn new(dim: usize, terms: Vec<ExpTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid_input("model dimension must be at least 1"));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.zeta.len() != dim {
                return Err(invalid_input(format!("term {k} has dimension {}, expected {dim}", t.zeta.len())));
            }
            let finite = |z: &c64| z.re.is_finite() && z.im.is_finite();
            if !finite(&t.c) || !t.zeta.iter().all(finite) {
                return Err(invalid_input(format!("term {k} is not finite")));
            }
        }
        Ok(Self { terms, dim })
    }

    /// 1-D model from `(c_k, zeta_k)` pairs.
    pub fn one_d(pairs: &[(c64, c64)]) -> Self {
        let terms = pairs.iter().map(|&(c, z)| ExpTerm { c, zeta: vec![z] }).collect();
        Self { terms, dim: 1 }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn frequencies(&self) -> Vec<Vec<c64>> {
        self.terms.iter().map(|t| t.zeta.clone()).collect()
    }

    pub fn coefficients(&self) -> Vec<c64> {
        self.terms.iter().map(|t| t.c).collect()
    }
}

/// `f(x_j) = sum_k c_k exp(zeta_k . x_j)`.
pub fn synthesize(model: &ExpModel, points: &[Vec<f64>]) -> Result<Vec<c64>> {
    points
        .iter()
        .enumerate()
        .map(|(j, x)| {
            if x.len() != model.dim {
                return Err(invalid_input(format!(
                    "point {j} has dimension {}, model has {}",
                    x.len(),
                    model.dim
                )));
            }
            Ok(model.terms.iter().map(|t| t.c * exponent(&t.zeta, x).exp()).sum())
        })
        .collect()
}

fn exponent(zeta: &[c64], x: &[f64]) -> c64 {
    zeta.iter().zip(x).map(|(z, v)| z * *v).sum()
}

/// Adds circular complex Gaussian noise scaled to the exact requested SNR.
///
/// `snr_db = +inf` returns the samples unchanged.
pub fn add_noise(samples: &[c64], snr_db: f64, seed: u64) -> Result<Vec<c64>> {
    if snr_db == f64::INFINITY {
        return Ok(samples.to_vec());
    }
    if !snr_db.is_finite() {
        return Err(invalid_param(format!("SNR must be finite or +inf, got {snr_db}")));
    }
    let signal: f64 = samples.iter().map(|z| z.norm_sqr()).sum();
    if signal == 0.0 {
        return Err(invalid_input("cannot set a finite SNR on a zero signal"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<c64> = samples
        .iter()
        .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let energy: f64 = noise.iter().map(|z| z.norm_sqr()).sum();
    let scale = (signal / (energy * 10f64.powf(snr_db / 10.0))).sqrt();
    Ok(samples.iter().zip(&noise).map(|(s, n)| s + n * scale).collect())
}

/// Measured `10 log10(|signal|^2 / |noisy - signal|^2)`.
pub fn measured_snr_db(signal: &[c64], noisy: &[c64]) -> f64 {
    let s: f64 = signal.iter().map(|z| z.norm_sqr()).sum();
    let n: f64 = signal.iter().zip(noisy).map(|(a, b)| (b - a).norm_sqr()).sum();
    10.0 * (s / n).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    Linear,
    /// Keys cubic convolution with `a = -1/2`.
    Cubic,
}

/// Equally spaced nodes `origin + spacing * n` for the listed integer `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpGrid {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub nodes: Vec<GridPoint>,
}

impl InterpGrid {
    /// Full block of `counts` nodes per axis, lexicographically ordered.
    pub fn rectangular(origin: Vec<f64>, spacing: Vec<f64>, counts: &[usize]) -> Self {
        Self { origin, spacing, nodes: crate::structure::rectangle(counts) }
    }

    /// The generator nodes of a structure map.
    pub fn for_structure(map: &StructureMap, origin: Vec<f64>, spacing: Vec<f64>) -> Self {
        Self { origin, spacing, nodes: map.omega_points().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.spacing.len()
    }

    pub fn position(&self, node: &[i64]) -> Vec<f64> {
        node.iter()
            .zip(&self.origin)
            .zip(&self.spacing)
            .map(|((&n, o), l)| o + l * n as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpSpec {
    pub grid: InterpGrid,
    pub kernel: Kernel,
    pub points: Vec<Vec<f64>>,
}

fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

fn lagrange(t: f64, first: i64) -> Vec<(i64, f64)> {
    let nodes: Vec<i64> = (first..first + 4).collect();
    nodes
        .iter()
        .map(|&n| {
            let w = nodes
                .iter()
                .filter(|&&m| m != n)
                .map(|&m| (t - m as f64) / (n - m) as f64)
                .product();
            (n, w)
        })
        .collect()
}

/// Stencils along one axis in order of preference. For the cubic kernel the
/// centred Keys stencil comes first, then one-sided cubic Lagrange stencils
/// for samples near an edge, then linear.
fn axis_candidates(t: f64, kernel: Kernel) -> Vec<Vec<(i64, f64)>> {
    let base = t.floor();
    let frac = t - base;
    let i0 = base as i64;
    if frac == 0.0 {
        return vec![vec![(i0, 1.0)]];
    }
    let linear = vec![(i0, 1.0 - frac), (i0 + 1, frac)];
    match kernel {
        Kernel::Linear => vec![linear],
        Kernel::Cubic => vec![
            vec![
                (i0 - 1, keys(frac + 1.0)),
                (i0, keys(frac)),
                (i0 + 1, keys(1.0 - frac)),
                (i0 + 2, keys(2.0 - frac)),
            ],
            lagrange(t, i0),
            lagrange(t, i0 - 2),
            linear,
        ],
    }
}

fn tensor_stencil(axes: &[&Vec<(i64, f64)>]) -> Vec<(GridPoint, f64)> {
    let mut out: Vec<(GridPoint, f64)> = vec![(vec![], 1.0)];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|(p, w)| {
                axis.iter().map(move |&(i, wi)| {
                    let mut q = p.clone();
                    q.push(i);
                    (q, w * wi)
                })
            })
            .collect();
    }
    out
}

/// Dense-equivalent interpolation operator from grid nodes to the sample points.
///
/// With the cubic kernel, a sample whose centred stencil leaves the node set
/// uses one-sided cubic stencils along the offending axes, and the linear
/// stencil as a last resort.
pub fn build_interp(spec: &InterpSpec) -> Result<SamplingOperator> {
    let grid = &spec.grid;
    let d = grid.dim();
    if grid.origin.len() != d || grid.nodes.iter().any(|n| n.len() != d) {
        return Err(invalid_input("grid origin, spacing and nodes disagree in dimension"));
    }
    if grid.spacing.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(invalid_input("grid spacing must be positive"));
    }
    let index: HashMap<&GridPoint, usize> = grid.nodes.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let lookup = |stencil: Vec<(GridPoint, f64)>| -> Option<Vec<(usize, f64)>> {
        stencil
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(p, w)| index.get(&p).map(|&i| (i, w)))
            .collect()
    };
    let mut rows = Vec::with_capacity(spec.points.len());
    for (j, x) in spec.points.iter().enumerate() {
        if x.len() != d || x.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input(format!("sample {j} is malformed")));
        }
        let candidates: Vec<Vec<Vec<(i64, f64)>>> = x
            .iter()
            .zip(&grid.origin)
            .zip(&grid.spacing)
            .map(|((v, o), l)| axis_candidates((v - o) / l, spec.kernel))
            .collect();
        // walk the candidate combinations in lexicographic order of preference
        let mut choice = vec![0usize; d];
        let row = loop {
            let axes: Vec<&Vec<(i64, f64)>> = choice.iter().zip(&candidates).map(|(&c, cand)| &cand[c]).collect();
            if let Some(row) = lookup(tensor_stencil(&axes)) {
                break Some(row);
            }
            let Some(axis) = (0..d).rev().find(|&a| choice[a] + 1 < candidates[a].len()) else {
                break None;
            };
            choice[axis] += 1;
            choice[axis + 1..].iter_mut().for_each(|c| *c = 0);
        };
        let row = row.ok_or_else(|| invalid_input(format!("sample {j} at {x:?} lies outside the grid")))?;
        rows.push(row);
    }
    SamplingOperator::sparse(rows, grid.nodes.len())
}

/// Frequencies extracted from data, with a flag when fewer than requested
/// could be resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqEstimate {
    pub freqs: Vec<c64>,
    pub complete: bool,
}

fn hankel_data(a: &[c64], rows: usize) -> ComplexMatrix {
    Mat::from_fn(rows, a.len() + 1 - rows, |i, j| a[i + j])
}

fn signal_rank(sigma: &[f64], k: usize) -> usize {
    svcalc::rank_from_sigma(sigma, SUBSPACE_RANK_TOL).min(k)
}

fn pinv_apply(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = svcalc::svd(a)?;
    let cutoff = d.sigma.first().copied().unwrap_or(0.0) * 1e-14;
    let inv: Vec<f64> = d.sigma.iter().map(|&s| if s > cutoff { 1.0 / s } else { 0.0 }).collect();
    let utb = d.u.adjoint() * b;
    let scaled = Mat::from_fn(utb.nrows(), utb.ncols(), |i, j| utb[(i, j)] * inv[i]);
    Ok(&d.v * scaled)
}

fn eigen(a: &ComplexMatrix) -> Result<(Vec<c64>, ComplexMatrix)> {
    let e = a.eigen().map_err(|_| Error::NoConvergence {
        routine: "eigen",
        rows: a.nrows(),
        cols: a.ncols(),
    })?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}

fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<c64>> {
    Ok(eigen(a)?.0)
}

/// Shift operator `pinv(S[first]) S[second]` for a basis `S` of a shift-invariant space.
fn shift_operator(basis: &ComplexMatrix, first: &[usize], second: &[usize]) -> Result<ComplexMatrix> {
    let k = basis.ncols();
    let s1 = Mat::from_fn(first.len(), k, |i, j| basis[(first[i], j)]);
    let s2 = Mat::from_fn(second.len(), k, |i, j| basis[(second[i], j)]);
    pinv_apply(&s1, &s2)
}

fn nodes_to_freqs(nodes: Vec<c64>, spacing: f64) -> Vec<c64> {
    let mut freqs: Vec<c64> = nodes.iter().map(|z| z.ln() / spacing).collect();
    freqs.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    freqs
}

fn check_pencil_input(len: usize, k: usize, spacing: f64) -> Result<()> {
    if k == 0 {
        return Err(invalid_param("K must be at least 1"));
    }
    if len < 2 * k + 1 {
        return Err(invalid_input(format!("{len} samples cannot resolve {k} exponentials, need {}", 2 * k + 1)));
    }
    svcalc::positive("spacing", spacing)
}

fn from_subspace(basis: &ComplexMatrix, r: usize, k: usize, spacing: f64) -> Result<FreqEstimate> {
    if r == 0 {
        return Ok(FreqEstimate { freqs: vec![], complete: false });
    }
    let sub = basis.get(.., ..r).to_owned();
    let n = sub.nrows();
    let first: Vec<usize> = (0..n - 1).collect();
    let second: Vec<usize> = (1..n).collect();
    let phi = shift_operator(&sub, &first, &second)?;
    Ok(FreqEstimate { freqs: nodes_to_freqs(eigenvalues(&phi)?, spacing), complete: r == k })
}

/// Matrix pencil on a denoised 1-D generator sampled with the given spacing.
///
/// Returns natural exponents `zeta` (nodes `exp(zeta * spacing)`), sorted by
/// imaginary part.
pub fn extract_freqs_1d(a: &[c64], k: usize, spacing: f64) -> Result<FreqEstimate> {
    check_pencil_input(a.len(), k, spacing)?;
    let rows = a.len() - a.len() / 2;
    let d = svcalc::svd(&hankel_data(a, rows))?;
    let r = signal_rank(&d.sigma, k);
    // the row space of the data matrix is spanned by conj(V)
    let right = Mat::from_fn(d.v.nrows(), d.v.ncols(), |i, j| d.v[(i, j)].conj());
    from_subspace(&right, r, k, spacing)
}

/// ESPRIT baseline on raw samples: rotational invariance of the signal
/// subspace of a Hankel lift with a window of one third of the samples.
pub fn esprit_1d(f: &[c64], k: usize, spacing: f64) -> Result<FreqEstimate> {
    check_pencil_input(f.len(), k, spacing)?;
    let window = (f.len() / 3).max(k + 1);
    let rows = f.len() + 1 - window;
    let d: SvdFactors = svcalc::svd(&hankel_data(f, rows))?;
    let r = if d.sigma.first().copied().unwrap_or(0.0) > 0.0 { k.min(d.sigma.len()) } else { 0 };
    from_subspace(&d.u, r, k, spacing)
}

/// Frequency vectors from the rank-K left singular subspace of a
/// general-domain Hankel approximant, using per-axis shift invariance over Xi.
///
/// Components are paired through the eigenvectors of the first axis shift
/// (or a fixed combination of all axes when those eigenvalues nearly coincide).
pub fn extract_freqs_nd(a_star: &ComplexMatrix, map: &StructureMap, k: usize, spacing: &[f64]) -> Result<Vec<Vec<c64>>> {
    let d = map.dim();
    if spacing.len() != d {
        return Err(invalid_input(format!("spacing has dimension {}, structure has {d}", spacing.len())));
    }
    if a_star.nrows() != map.rows() || a_star.ncols() != map.cols() {
        return Err(invalid_input("matrix shape does not match the structure"));
    }
    let rect = map
        .xi_rectangle()
        .ok_or_else(|| invalid_input("Xi must be a full rectangular block"))?;
    for (axis, &(_, count)) in rect.iter().enumerate() {
        if count < 2 {
            return Err(invalid_input(format!("Xi has a single node along axis {axis}; that component cannot be estimated")));
        }
    }
    if k == 0 || k > map.rows().min(map.cols()) {
        return Err(invalid_param(format!("K = {k} is out of range")));
    }
    let svd = svcalc::svd(a_star)?;
    let basis = svd.u.get(.., ..k).to_owned();
    let row_of: HashMap<&GridPoint, usize> = map.xi_points().iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut shifts = Vec::with_capacity(d);
    for (axis, &(lo, count)) in rect.iter().enumerate() {
        let mut first = Vec::new();
        let mut second = Vec::new();
        for (m, p) in map.xi_points().iter().enumerate() {
            if p[axis] < lo + count as i64 - 1 {
                let mut next = p.clone();
                next[axis] += 1;
                first.push(m);
                second.push(row_of[&next]);
            }
        }
        shifts.push(shift_operator(&basis, &first, &second)?);
    }

    let (vals, mut vecs) = eigen(&shifts[0])?;
    if min_gap(&vals) < EIGEN_GAP_TOL * vals.iter().map(|z| z.norm()).fold(0.0, f64::max) {
        let mut mix = Mat::zeros(k, k);
        for (i, s) in shifts.iter().enumerate() {
            let w = c64::from_polar(1.0 / (i + 1) as f64, 0.7 * i as f64);
            mix += Mat::from_fn(k, k, |r, c| s[(r, c)] * w);
        }
        vecs = eigen(&mix)?.1;
    }
    let lu = vecs.partial_piv_lu();
    let mut freqs = vec![vec![c64::new(0.0, 0.0); d]; k];
    for (axis, s) in shifts.iter().enumerate() {
        let t = faer::linalg::solvers::Solve::solve(&lu, &(s * &vecs));
        for (kk, f) in freqs.iter_mut().enumerate() {
            f[axis] = t[(kk, kk)].ln() / spacing[axis];
        }
    }
    freqs.sort_by(|a, b| {
        let (za, zb) = ((a[0] * spacing[0]).exp(), (b[0] * spacing[0]).exp());
        za.norm().total_cmp(&zb.norm()).then(za.arg().total_cmp(&zb.arg()))
    });
    Ok(freqs)
}

fn min_gap(vals: &[c64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            gap = gap.min((vals[i] - vals[j]).norm());
        }
    }
    gap
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFit {
    pub coeffs: Vec<c64>,
    pub residual_norm: f64,
    pub condition: f64,
    /// Set when the design matrix condition number exceeds `1e12`.
    pub ill_conditioned: bool,
}

/// Least-squares amplitudes for fixed frequencies.
pub fn fit_coeffs(freqs: &[Vec<c64>], points: &[Vec<f64>], f: &[c64]) -> Result<CoeffFit> {
    let k = freqs.len();
    if points.len() != f.len() {
        return Err(invalid_input(format!("{} points but {} samples", points.len(), f.len())));
    }
    if k == 0 {
        return Ok(CoeffFit {
            coeffs: vec![],
            residual_norm: f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    if points.len() < k {
        return Err(invalid_input(format!("{} samples for {k} unknowns", points.len())));
    }
    for (j, x) in points.iter().enumerate() {
        if freqs.iter().any(|z| z.len() != x.len()) {
            return Err(invalid_input(format!("point {j} dimension disagrees with the frequencies")));
        }
    }
    let design = Mat::from_fn(points.len(), k, |j, kk| exponent(&freqs[kk], &points[j]).exp());
    let rhs = Mat::from_fn(f.len(), 1, |j, _| f[j]);
    let sigma = svcalc::singular_values(&design)?;
    let condition = sigma[0] / sigma[k - 1];
    let sol = pinv_apply(&design, &rhs)?;
    let fitted = &design * &sol;
    let residual_norm = (0..f.len()).map(|j| (fitted[(j, 0)] - f[j]).norm_sqr()).sum::<f64>().sqrt();
    Ok(CoeffFit {
        coeffs: (0..k).map(|i| sol[(i, 0)]).collect(),
        residual_norm,
        condition,
        ill_conditioned: condition.is_nan() || condition > CONDITION_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cis(x: f64) -> c64 {
        c64::from_polar(1.0, x)
    }

    #[test]
    fn constant_model() {
        let m = ExpModel::one_d(&[(c64::new(1.0, 0.0), c64::new(0.0, 0.0))]);
        let f = synthesize(&m, &[vec![0.0], vec![1.5], vec![-2.0]]).unwrap();
        assert!(f.iter().all(|z| (z - c64::new(1.0, 0.0)).norm() < 1e-15));
        assert!(synthesize(&m, &[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn conjugate_terms_are_real() {
        let z = c64::new(-0.3, 2.0);
        let m = ExpModel::one_d(&[(c64::new(0.5, 0.2), z), (c64::new(0.5, -0.2), z.conj())]);
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.1]).collect();
        assert!(synthesize(&m, &pts).unwrap().iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn model_json_shape() {
        let m = ExpModel::new(2, vec![ExpTerm { c: c64::new(1.0, -1.0), zeta: vec![c64::new(0.0, 2.0), c64::new(-1.0, 0.5)] }]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v[0]["re_c"], 1.0);
        assert_eq!(v[0]["im_zeta"][1], 0.5);
        let back: ExpModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn noise_infinite_snr_is_identity() {
        let s = vec![c64::new(1.0, 2.0); 5];
        assert_eq!(add_noise(&s, f64::INFINITY, 3).unwrap(), s);
        assert!(add_noise(&[c64::new(0.0, 0.0); 3], 10.0, 1).is_err());
        assert!(add_noise(&s, f64::NAN, 1).is_err());
    }

    #[test]
    fn noise_exact_and_deterministic() {
        let s: Vec<c64> = (0..50).map(|i| cis(0.3 * i as f64)).collect();
        let a = add_noise(&s, 7.5, 11).unwrap();
        let b = add_noise(&s, 7.5, 11).unwrap();
        assert_eq!(a, b);
        assert!((measured_snr_db(&s, &a) - 7.5).abs() < 1e-10);
        assert_ne!(add_noise(&s, 7.5, 12).unwrap(), a);
    }

    #[test]
    fn interp_on_node_and_midpoint() {
        let grid = InterpGrid::rectangular(vec![0.0], vec![1.0], &[5]);
        let op = build_interp(&InterpSpec { grid: grid.clone(), kernel: Kernel::Linear, points: vec![vec![2.0], vec![2.5]] }).unwrap();
        let dense = op.to_dense();
        assert_eq!(dense[(0, 2)], c64::new(1.0, 0.0));
        assert_eq!((0..5).filter(|&j| dense[(0, j)] != c64::new(0.0, 0.0)).count(), 1);
        assert_eq!(dense[(1, 2)], c64::new(0.5, 0.0));
        assert_eq!(dense[(1, 3)], c64::new(0.5, 0.0));
        let outside = InterpSpec { grid, kernel: Kernel::Linear, points: vec![vec![4.5]] };
        assert!(build_interp(&outside).is_err());
    }

    #[test]
    fn cubic_is_one_sided_at_the_edges() {
        let grid = InterpGrid::rectangular(vec![0.0], vec![1.0], &[5]);
        let values: Vec<c64> = (0..5).map(|x| c64::new((x * x * x) as f64, 0.0)).collect();
        let points = vec![vec![0.25], vec![3.75]];
        let op = build_interp(&InterpSpec { grid, kernel: Kernel::Cubic, points: points.clone() }).unwrap();
        for (g, p) in op.forward(&values).iter().zip(&points) {
            assert!((g.re - p[0].powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_falls_back_to_linear_on_tiny_grids() {
        let grid = InterpGrid::rectangular(vec![0.0], vec![1.0], &[3]);
        let op = build_interp(&InterpSpec { grid, kernel: Kernel::Cubic, points: vec![vec![0.25]] }).unwrap();
        let dense = op.to_dense();
        assert!((dense[(0, 0)].re - 0.75).abs() < 1e-15);
        assert!((dense[(0, 1)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cubic_reproduces_quadratics() {
        let grid = InterpGrid::rectangular(vec![-1.0], vec![0.25], &[9]);
        let values: Vec<c64> = grid.nodes.iter().map(|n| {
            let x = grid.position(n)[0];
            c64::new(x * x - 0.5 * x, 0.0)
        }).collect();
        let op = build_interp(&InterpSpec { grid, kernel: Kernel::Cubic, points: vec![vec![0.1], vec![-0.37]] }).unwrap();
        let got = op.forward(&values);
        for (g, x) in got.iter().zip([0.1, -0.37]) {
            assert!((g.re - (x * x - 0.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_node_pencil() {
        let a: Vec<c64> = (0..9).map(|n| cis(2.0 * std::f64::consts::PI * 0.1 * n as f64)).collect();
        let e = extract_freqs_1d(&a, 1, 1.0).unwrap();
        assert!(e.complete);
        assert!((e.freqs[0] / c64::new(0.0, 2.0 * std::f64::consts::PI) - c64::new(0.1, 0.0)).norm() < 1e-10);
        let damped: Vec<c64> = (0..9).map(|n| (c64::new(-0.5, 3.0) * n as f64).exp()).collect();
        assert!((extract_freqs_1d(&damped, 1, 1.0).unwrap().freqs[0] - c64::new(-0.5, 3.0)).norm() < 1e-10);
        assert!((esprit_1d(&damped, 1, 1.0).unwrap().freqs[0] - c64::new(-0.5, 3.0)).norm() < 1e-10);
    }

    #[test]
    fn pencil_flags_rank_deficiency() {
        let a: Vec<c64> = (0..11).map(|n| cis(0.4 * n as f64)).collect();
        let e = extract_freqs_1d(&a, 3, 1.0).unwrap();
        assert!(!e.complete);
        assert_eq!(e.freqs.len(), 1);
        assert!(extract_freqs_1d(&a[..4], 2, 1.0).is_err());
    }

    #[test]
    fn fit_mean_for_zero_frequency() {
        let f = vec![c64::new(1.0, 0.0), c64::new(2.0, 1.0), c64::new(3.0, -1.0)];
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let fit = fit_coeffs(&[vec![c64::new(0.0, 0.0)]], &pts, &f).unwrap();
        assert!((fit.coeffs[0] - c64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(!fit.ill_conditioned);
    }

    #[test]
    fn fit_flags_duplicate_frequencies() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let z = vec![c64::new(0.0, 1.0)];
        let f = vec![c64::new(1.0, 0.0); 10];
        let fit = fit_coeffs(&[z.clone(), z], &pts, &f).unwrap();
        assert!(fit.ill_conditioned);
    }
}
