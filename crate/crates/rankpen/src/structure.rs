//! Structured subspaces: 1-D Hankel and general-domain Hankel matrices.
//!
//! A [`StructureMap`] assigns every matrix cell `(m, n)` to the generator
//! node `xi[m] + upsilon[n]`. Generator nodes are kept in lexicographic order.

use std::collections::{BTreeSet, HashMap};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::{c64, ComplexMatrix};

pub type GridPoint = Vec<i64>;
pub type Generator = Vec<c64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDocument", into = "MapDocument")]
pub struct StructureMap {
    dim: usize,
    xi: Vec<GridPoint>,
    upsilon: Vec<GridPoint>,
    omega: Vec<GridPoint>,
    // row-major over (m, n)
    cell: Vec<usize>,
    beta: Vec<usize>,
}

/// Serialized form: dimensions plus the two point lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MapDocument {
    rows: usize,
    cols: usize,
    dim: usize,
    xi: Vec<GridPoint>,
    upsilon: Vec<GridPoint>,
}

impl From<StructureMap> for MapDocument {
    fn from(m: StructureMap) -> Self {
        MapDocument {
            rows: m.rows(),
            cols: m.cols(),
            dim: m.dim,
            xi: m.xi,
            upsilon: m.upsilon,
        }
    }
}

impl TryFrom<MapDocument> for StructureMap {
    type Error = crate::Error;

    fn try_from(doc: MapDocument) -> Result<Self> {
        let map = general_domain_map(&doc.xi, &doc.upsilon)?;
        if map.rows() != doc.rows || map.cols() != doc.cols || map.dim != doc.dim {
            return Err(invalid_input("structure document dimensions disagree with its point lists"));
        }
        Ok(map)
    }
}

impl StructureMap {
    pub fn rows(&self) -> usize {
        self.xi.len()
    }

    pub fn cols(&self) -> usize {
        self.upsilon.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xi_points(&self) -> &[GridPoint] {
        &self.xi
    }

    pub fn upsilon_points(&self) -> &[GridPoint] {
        &self.upsilon
    }

    pub fn omega_points(&self) -> &[GridPoint] {
        &self.omega
    }

    pub fn omega_len(&self) -> usize {
        self.omega.len()
    }

    pub fn beta(&self) -> &[usize] {
        &self.beta
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(|&b| b as f64).collect()
    }

    pub fn cell_index(&self, m: usize, n: usize) -> usize {
        self.cell[m * self.cols() + n]
    }

    /// Position of `p` among the generator nodes.
    pub fn omega_position(&self, p: &[i64]) -> Option<usize> {
        self.omega.binary_search_by(|w| w.as_slice().cmp(p)).ok()
    }

    fn check_generator(&self, a: &[c64]) -> Result<()> {
        if a.len() == self.omega.len() {
            Ok(())
        } else {
            Err(invalid_input(format!(
                "generator has length {}, structure expects {}",
                a.len(),
                self.omega.len()
            )))
        }
    }

    fn check_matrix(&self, a: &ComplexMatrix) -> Result<()> {
        if a.nrows() == self.rows() && a.ncols() == self.cols() {
            Ok(())
        } else {
            Err(invalid_input(format!(
                "matrix is {}x{}, structure expects {}x{}",
                a.nrows(),
                a.ncols(),
                self.rows(),
                self.cols()
            )))
        }
    }

    pub(crate) fn lift_raw(&self, a: &[c64]) -> ComplexMatrix {
        let cols = self.cols();
        Mat::from_fn(self.rows(), cols, |m, n| a[self.cell[m * cols + n]])
    }

    pub(crate) fn adjoint_raw(&self, a: &ComplexMatrix) -> Generator {
        let cols = self.cols();
        let mut out = vec![c64::new(0.0, 0.0); self.omega.len()];
        for n in 0..cols {
            for m in 0..self.rows() {
                out[self.cell[m * cols + n]] += a[(m, n)];
            }
        }
        out
    }

    /// `beta^{-1} Lambda* A`, the generator of the projection onto the subspace.
    pub(crate) fn average_raw(&self, a: &ComplexMatrix) -> Generator {
        let mut g = self.adjoint_raw(a);
        for (x, &b) in g.iter_mut().zip(&self.beta) {
            *x /= b as f64;
        }
        g
    }

    /// Full rectangular extent of Xi, if it is one: per-axis (min, count).
    pub fn xi_rectangle(&self) -> Option<Vec<(i64, usize)>> {
        rectangle_of(&self.xi, self.dim)
    }
}

fn rectangle_of(points: &[GridPoint], dim: usize) -> Option<Vec<(i64, usize)>> {
    let first = points.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let extent: Vec<(i64, usize)> = (0..dim).map(|i| (lo[i], (hi[i] - lo[i] + 1) as usize)).collect();
    let total: usize = extent.iter().map(|e| e.1).product();
    let unique: BTreeSet<&GridPoint> = points.iter().collect();
    (total == unique.len()).then_some(extent)
}

/// 1-D Hankel structure: `(Lambda a)[m][n] = a[m + n]`.
pub fn hankel_map(n_rows: usize, n_cols: usize) -> Result<StructureMap> {
    if n_rows == 0 || n_cols == 0 {
        return Err(invalid_input("Hankel dimensions must be positive"));
    }
    let xi = (0..n_rows as i64).map(|i| vec![i]).collect();
    let upsilon = (0..n_cols as i64).map(|i| vec![i]).collect();
    let omega = (0..(n_rows + n_cols - 1) as i64).map(|i| vec![i]).collect();
    let mut cell = Vec::with_capacity(n_rows * n_cols);
    for m in 0..n_rows {
        cell.extend((0..n_cols).map(|n| m + n));
    }
    let beta = (0..n_rows + n_cols - 1)
        .map(|l| (l + 1).min(n_rows).min(n_cols).min(n_rows + n_cols - 1 - l))
        .collect();
    Ok(StructureMap { dim: 1, xi, upsilon, omega, cell, beta })
}

/// General-domain Hankel structure with generator nodes `Xi + Upsilon`.
pub fn general_domain_map(xi: &[GridPoint], upsilon: &[GridPoint]) -> Result<StructureMap> {
    if xi.is_empty() || upsilon.is_empty() {
        return Err(invalid_input("point lists must be nonempty"));
    }
    let dim = xi[0].len();
    if dim == 0 {
        return Err(invalid_input("grid points must have dimension at least 1"));
    }
    for (name, pts) in [("xi", xi), ("upsilon", upsilon)] {
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(invalid_input(format!(
                "{name} point {p:?} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        let unique: BTreeSet<&GridPoint> = pts.iter().collect();
        if unique.len() != pts.len() {
            return Err(invalid_input(format!("{name} contains duplicate points")));
        }
    }
    let add = |a: &GridPoint, b: &GridPoint| -> GridPoint { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let mut sums = BTreeSet::new();
    for x in xi {
        for y in upsilon {
            sums.insert(add(x, y));
        }
    }
    let omega: Vec<GridPoint> = sums.into_iter().collect();
    let position: HashMap<&GridPoint, usize> = omega.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut cell = Vec::with_capacity(xi.len() * upsilon.len());
    let mut beta = vec![0usize; omega.len()];
    for x in xi {
        for y in upsilon {
            let w = position[&add(x, y)];
            cell.push(w);
            beta[w] += 1;
        }
    }
    Ok(StructureMap {
        dim,
        xi: xi.to_vec(),
        upsilon: upsilon.to_vec(),
        omega,
        cell,
        beta,
    })
}

pub fn lift(map: &StructureMap, a: &[c64]) -> Result<ComplexMatrix> {
    map.check_generator(a)?;
    Ok(map.lift_raw(a))
}

/// `(Lambda* A)(w)`: sum of the cells assigned to node `w`.
pub fn adjoint_sum(map: &StructureMap, a: &ComplexMatrix) -> Result<Generator> {
    map.check_matrix(a)?;
    Ok(map.adjoint_raw(a))
}

/// Orthogonal projection onto the structured subspace.
pub fn project_h(map: &StructureMap, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    map.check_matrix(a)?;
    Ok(map.lift_raw(&map.average_raw(a)))
}

pub fn project_h_perp(map: &StructureMap, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = project_h(map, a)?;
    Ok(a - p)
}

/// Generator of a matrix that lies in the subspace (the cell average).
pub fn generator_of(map: &StructureMap, a: &ComplexMatrix) -> Result<Generator> {
    map.check_matrix(a)?;
    Ok(map.average_raw(a))
}

/// Nearest-node set Upsilon of the samples and the rectangular block Xi.
///
/// Rounding ties go away from zero.
pub fn build_grids(
    samples: &[Vec<f64>],
    spacing: &[f64],
    xi_shape: &[usize],
) -> Result<(Vec<GridPoint>, Vec<GridPoint>)> {
    if samples.is_empty() {
        return Err(invalid_input("no samples"));
    }
    let dim = spacing.len();
    if dim == 0 || xi_shape.len() != dim {
        return Err(invalid_input(format!(
            "spacing has dimension {dim} but xi_shape has {}",
            xi_shape.len()
        )));
    }
    if spacing.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(invalid_input("spacing must be positive"));
    }
    if xi_shape.contains(&0) {
        return Err(invalid_input("xi_shape entries must be at least 1"));
    }
    let mut nodes = BTreeSet::new();
    for (j, x) in samples.iter().enumerate() {
        if x.len() != dim {
            return Err(invalid_input(format!("sample {j} has dimension {}, expected {dim}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input(format!("sample {j} is not finite")));
        }
        nodes.insert(x.iter().zip(spacing).map(|(v, l)| (v / l).round() as i64).collect::<GridPoint>());
    }
    Ok((nodes.into_iter().collect(), rectangle(xi_shape)))
}

/// Lexicographically ordered block `{0..shape_0-1} x ... x {0..shape_d-1}`.
pub fn rectangle(shape: &[usize]) -> Vec<GridPoint> {
    let mut out: Vec<GridPoint> = vec![vec![]];
    for &s in shape {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..s as i64).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}
