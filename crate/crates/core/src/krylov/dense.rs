//! Dense oracles: Cholesky solves and extreme eigenvalues, optionally of the
//! pencil `(D, D_ref)`. Above [`DENSE_EIGEN_LIMIT`] unknowns the extremes come
//! from Lanczos with full reorthogonalization instead of a full eigensolve.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::tpfa::DENSE_LIMIT;
use crate::Error;

/// Largest size handled by a full symmetric eigensolve.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

fn guard(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::TooLarge { size: n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Solves `D x = b` by Cholesky factorization.
pub fn dense_solve(d: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    guard(d.nrows())?;
    if b.len() != d.nrows() || !d.is_square() {
        return Err(contract!("dense_solve: {}x{} matrix with {} right-hand entries", d.nrows(), d.ncols(), b.len()));
    }
    let chol = d.clone().cholesky().ok_or(Error::NotSpd)?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: f64,
}

impl ConditionEstimate {
    fn new(lambda_min: f64, lambda_max: f64) -> Self {
        Self { lambda_min, lambda_max, cond: lambda_max / lambda_min }
    }
}

/// Extreme eigenvalues of `D`, or of the generalized problem `D x = l D_ref x`
/// when `d_ref` is given (reduced with the Cholesky factor of `D_ref`).
pub fn condition_estimate(d: &DMatrix<f64>, d_ref: Option<&DMatrix<f64>>) -> Result<ConditionEstimate> {
    let n = d.nrows();
    guard(n)?;
    let m = match d_ref {
        None => d.clone(),
        Some(r) => {
            if r.shape() != d.shape() {
                return Err(contract!("pencil matrices differ in shape"));
            }
            let l = r.clone().cholesky().ok_or(Error::NotSpd)?.unpack();
            // C = L^-1 D L^-T
            let y = l.solve_lower_triangular(d).ok_or(Error::NotSpd)?;
            let c = l.solve_lower_triangular(&y.transpose()).ok_or(Error::NotSpd)?;
            (&c + c.transpose()) * 0.5
        }
    };
    if n <= DENSE_EIGEN_LIMIT {
        let ev = SymmetricEigen::new(m).eigenvalues;
        return Ok(ConditionEstimate::new(ev.min(), ev.max()));
    }
    condition_estimate_operator(n, |x, y| {
        let v = &m * DVector::from_column_slice(x);
        y.copy_from_slice(v.as_slice());
    })
}

/// Extreme eigenvalues of a matrix-free symmetric operator via Lanczos.
pub fn condition_estimate_operator(n: usize, apply: impl FnMut(&[f64], &mut [f64])) -> Result<ConditionEstimate> {
    let (lo, hi) = lanczos_extremes(n, apply, 1e-10)?;
    Ok(ConditionEstimate::new(lo, hi))
}

/// Lanczos with full reorthogonalization. Stops once both extreme Ritz pairs
/// have residual `|beta_m s_m|` below `tol * |theta|`, or the Krylov space is
/// exhausted (then the values are exact up to rounding).
pub fn lanczos_extremes(n: usize, mut apply: impl FnMut(&[f64], &mut [f64]), tol: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(contract!("empty operator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x01a2_c705);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; n];
    let mut estimate = (0.0, 0.0);
    for step in 0..n {
        apply(&q, &mut w);
        let a = dot(&w, &q);
        alphas.push(a);
        basis.push(core::mem::take(&mut q));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let beta = libm::sqrt(dot(&w, &w));
        let m = alphas.len();
        let check = m == n || beta == 0.0 || step % 8 == 7;
        if check {
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i.abs_diff(j) == 1 {
                    betas[i.min(j)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (imin, imax) = extreme_indices(eig.eigenvalues.as_slice());
            let (lo, hi) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
            estimate = (lo, hi);
            let res = |i: usize| (beta * eig.eigenvectors[(m - 1, i)]).abs();
            if m == n || beta <= f64::EPSILON * hi.abs() || (res(imin) <= tol * lo.abs() && res(imax) <= tol * hi.abs()) {
                return Ok(estimate);
            }
        }
        betas.push(beta);
        q = w.iter().map(|v| v / beta).collect();
    }
    Ok(estimate)
}

fn extreme_indices(ev: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in ev.iter().enumerate() {
        if v < ev[lo] {
            lo = i;
        }
        if v > ev[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::scalar::dot(a, b)
}

fn normalize(v: &mut [f64]) {
    let s = libm::sqrt(dot(v, v));
    for x in v {
        *x /= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryConfig, GridSpec, OrthotropicField};
    use crate::tpfa::{assemble_dense, build_system};

    #[test]
    fn two_by_two_solve() {
        let d = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]);
        let x = dense_solve(&d, &[2.0, 2.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let i = DMatrix::<f64>::identity(3, 3);
        assert_eq!(dense_solve(&i, &[1.0, 2.0, 3.0]).unwrap(), [1.0, 2.0, 3.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(dense_solve(&bad, &[1.0, 1.0]), Err(Error::NotSpd));
    }

    #[test]
    fn dirichlet_chain_spectrum() {
        // tridiag(-1, 2, -1) of size 4: 2 - 2 cos((k+1) pi / 5)
        let b = DMatrix::from_fn(4, 4, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let mut ev: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, v) in ev.iter().enumerate() {
            let expect = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / 5.0);
            assert!((v - expect).abs() < 1e-14);
        }
        let c = condition_estimate(&b, None).unwrap();
        assert!((c.lambda_min - ev[0]).abs() < 1e-14);
    }

    #[test]
    fn pencil_of_equal_matrices() {
        let d = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]);
        let c = condition_estimate(&d, Some(&d)).unwrap();
        assert!((c.cond - 1.0).abs() < 1e-14);
        let singular = DMatrix::zeros(2, 2);
        assert!(condition_estimate(&d, Some(&singular)).is_err());
    }

    #[test]
    fn lanczos_matches_full_eigensolve() {
        let f = OrthotropicField::from_fn(GridSpec::unit_cube(8).unwrap(), |x, y, z| {
            [1.0 + x, 2.0 + libm::sin(7.0 * y), 1.0 + 5.0 * z * z]
        })
        .unwrap();
        let d = assemble_dense(&build_system(&f, BoundaryConfig::unit_z()).unwrap()).unwrap();
        let full = condition_estimate(&d, None).unwrap();
        let lz = condition_estimate_operator(d.nrows(), |x, y| crate::krylov::LinearOperator::apply(&d, x, y).unwrap()).unwrap();
        assert!((lz.lambda_min - full.lambda_min).abs() < 1e-8 * full.lambda_min);
        assert!((lz.lambda_max - full.lambda_max).abs() < 1e-8 * full.lambda_max);
    }
}
