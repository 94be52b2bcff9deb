//! Dense SVD, singular value functional calculus, and the penalty evaluators.

use faer::Mat;

use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::{c64, ComplexMatrix};

/// Thin SVD `A = U diag(sigma) V*` with `sigma` nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdFactors {
    /// Rebuilds `U diag(values) V*`, skipping trailing zero values.
    pub fn recompose(&self, values: &[f64]) -> ComplexMatrix {
        recompose(&self.u, values, &self.v)
    }
}

/// A scalar map on the nonnegative reals with `f(0) = 0` and a known
/// Lipschitz constant.
pub trait ScalarFunction {
    fn eval(&self, x: f64) -> f64;
    fn lipschitz(&self) -> f64;
}

/// The shrinkage `sigma -> max(min(sigma, tau), sigma / q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shrink {
    tau: f64,
    q: f64,
}

impl Shrink {
    pub fn new(tau: f64, q: f64) -> Result<Self> {
        check_tau_q(tau, q)?;
        Ok(Self { tau, q })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl ScalarFunction for Shrink {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        shrink_unchecked(x, self.tau, self.q)
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl ScalarFunction for Identity {
    fn eval(&self, x: f64) -> f64 {
        x
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// Wraps a closure together with a declared Lipschitz constant.
pub struct Lipschitz<F> {
    pub f: F,
    pub constant: f64,
}

impl<F: Fn(f64) -> f64> ScalarFunction for Lipschitz<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn lipschitz(&self) -> f64 {
        self.constant
    }
}

fn check_tau_q(tau: f64, q: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid_param(format!("tau must be positive and finite, got {tau}")));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(invalid_param(format!("q must lie in (1, inf), got {q}")));
    }
    Ok(())
}

pub fn check_finite(a: &ComplexMatrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(invalid_input(format!("non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdFactors> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(invalid_input("matrix has an empty dimension"));
    }
    check_finite(a)?;
    let f = a.thin_svd().map_err(|_| Error::NoConvergence {
        routine: "svd",
        rows: a.nrows(),
        cols: a.ncols(),
    })?;
    let sigma = f.S().column_vector().iter().map(|s| s.re).collect();
    Ok(SvdFactors {
        u: f.U().to_owned(),
        sigma,
        v: f.V().to_owned(),
    })
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(invalid_input("matrix has an empty dimension"));
    }
    check_finite(a)?;
    a.singular_values().map_err(|_| Error::NoConvergence {
        routine: "singular_values",
        rows: a.nrows(),
        cols: a.ncols(),
    })
}

pub(crate) fn recompose(u: &ComplexMatrix, values: &[f64], v: &ComplexMatrix) -> ComplexMatrix {
    let r = values.iter().rposition(|&s| s != 0.0).map_or(0, |p| p + 1);
    if r == 0 {
        return Mat::zeros(u.nrows(), v.nrows());
    }
    let us = Mat::from_fn(u.nrows(), r, |i, j| u[(i, j)] * values[j]);
    us * v.get(.., ..r).adjoint()
}

/// `U diag(f(sigma_j)) V*`.
pub fn apply_sv_function(a: &ComplexMatrix, f: &impl ScalarFunction) -> Result<ComplexMatrix> {
    let f0 = f.eval(0.0);
    if f0 != 0.0 {
        return Err(invalid_param(format!("scalar function must vanish at 0, got f(0) = {f0}")));
    }
    let d = svd(a)?;
    let values: Vec<f64> = d.sigma.iter().map(|&s| f.eval(s)).collect();
    Ok(d.recompose(&values))
}

pub fn shrink_s(sigma: f64, tau: f64, q: f64) -> Result<f64> {
    check_tau_q(tau, q)?;
    if sigma.is_nan() || sigma < 0.0 {
        return Err(invalid_param(format!("sigma must be nonnegative, got {sigma}")));
    }
    Ok(shrink_unchecked(sigma, tau, q))
}

#[inline]
pub(crate) fn shrink_unchecked(sigma: f64, tau: f64, q: f64) -> f64 {
    sigma.min(tau).max(sigma / q)
}

pub fn penalty_s_from_sigma(sigma: &[f64], tau: f64) -> f64 {
    sigma.iter().map(|&s| (s * s - tau * tau).max(0.0)).sum()
}

pub fn penalty_r_from_sigma(sigma: &[f64], tau: f64) -> f64 {
    sigma
        .iter()
        .map(|&s| {
            let gap = (tau - s).max(0.0);
            tau * tau - gap * gap
        })
        .sum()
}

/// `sum_j max(sigma_j^2 - tau^2, 0)`.
pub fn eval_s(a: &ComplexMatrix, tau: f64) -> Result<f64> {
    positive("tau", tau)?;
    Ok(penalty_s_from_sigma(&singular_values(a)?, tau))
}

/// `sum_j tau^2 - max(tau - sigma_j, 0)^2` over all `min(M, N)` singular values.
pub fn eval_r(a: &ComplexMatrix, tau: f64) -> Result<f64> {
    positive("tau", tau)?;
    Ok(penalty_r_from_sigma(&singular_values(a)?, tau))
}

/// `R_tau(A) + q ||A - F||_F^2`.
pub fn eval_objective(a: &ComplexMatrix, f: &ComplexMatrix, tau: f64, q: f64) -> Result<f64> {
    same_shape(a, f)?;
    Ok(eval_r(a, tau)? + q * frob_dist_sq(a, f))
}

/// Number of singular values above `tol * sigma_1`.
pub fn rank_eps(a: &ComplexMatrix, tol: f64) -> Result<usize> {
    positive("tol", tol)?;
    Ok(rank_from_sigma(&singular_values(a)?, tol))
}

pub fn rank_from_sigma(sigma: &[f64], tol: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().filter(|&&s| s > tol * s1).count(),
        _ => 0,
    }
}

pub(crate) fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid_param(format!("{name} must be positive and finite, got {x}")))
    }
}

pub(crate) fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.nrows() == b.nrows() && a.ncols() == b.ncols() {
        Ok(())
    } else {
        Err(invalid_input(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )))
    }
}

pub fn frob_norm(a: &ComplexMatrix) -> f64 {
    a.norm_l2()
}

pub fn frob_dist_sq(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc
}

/// Frobenius inner product `<A, B> = tr(B* A)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> c64 {
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)].conj();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> ComplexMatrix {
        Mat::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn shrink_branches() {
        assert_eq!(shrink_s(0.5, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(shrink_s(1.5, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(shrink_s(4.0, 1.0, 2.0).unwrap(), 2.0);
        assert_eq!(shrink_s(0.0, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn shrink_rejects_bad_q() {
        assert!(matches!(shrink_s(1.0, 1.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(shrink_s(1.0, 1.0, 0.5), Err(Error::InvalidParameter(_))));
        assert!(shrink_s(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn zero_matrix_svd() {
        let d = svd(&Mat::zeros(3, 2)).unwrap();
        assert!(d.sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn diagonal_svd() {
        let d = svd(&diag(&[3.0, 1.0])).unwrap();
        assert!((d.sigma[0] - 3.0).abs() < 1e-14);
        assert!((d.sigma[1] - 1.0).abs() < 1e-14);
        assert!((d.u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((d.v[(1, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut a = diag(&[1.0, 2.0]);
        a[(0, 1)] = c64::new(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn shrink_on_diagonal() {
        let out = apply_sv_function(&diag(&[4.0, 1.0]), &Shrink::new(2.0, 2.0).unwrap()).unwrap();
        assert!((out[(0, 0)] - c64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((out[(1, 1)] - c64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(out[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn function_must_vanish_at_zero() {
        let f = Lipschitz { f: |x: f64| x + 1.0, constant: 1.0 };
        assert!(apply_sv_function(&diag(&[1.0]), &f).is_err());
        let zero = Lipschitz { f: |_: f64| 0.0, constant: 0.0 };
        let out = apply_sv_function(&diag(&[3.0, 2.0]), &zero).unwrap();
        assert_eq!(frob_norm(&out), 0.0);
    }

    #[test]
    fn penalties_direct() {
        let a = diag(&[2.0, 0.5]);
        assert!((eval_s(&a, 1.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((eval_r(&a, 1.0).unwrap() - 1.75).abs() < 1e-12);
        let z = Mat::zeros(2, 3);
        assert_eq!(eval_s(&z, 1.0).unwrap(), 0.0);
        assert_eq!(eval_r(&z, 1.0).unwrap(), 0.0);
        assert!((eval_r(&diag(&[3.0, 2.0, 5.0]), 1.5).unwrap() - 3.0 * 2.25).abs() < 1e-12);
    }

    #[test]
    fn objective_small_cases() {
        let z = Mat::zeros(2, 2);
        assert_eq!(eval_objective(&z, &z, 1.0, 2.0).unwrap(), 0.0);
        let f = diag(&[2.0]);
        assert!((eval_objective(&f, &f, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(eval_objective(&z, &f, 1.0, 2.0).is_err());
    }

    #[test]
    fn rank_cases() {
        assert_eq!(rank_eps(&Mat::zeros(3, 3), 1e-8).unwrap(), 0);
        assert_eq!(rank_eps(&diag(&[5.0, 1e-14]), 1e-8).unwrap(), 1);
    }
}
