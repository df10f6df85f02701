//! The tridiagonal blocks `T(i', j')` the reference operator decouples into
//! after cosine transforms in x and y.
//!
//! `T(i', j') = (lx(i') kx + ly(j') ky) I + Z`, with `lx(m) = 2(1 - cos(m pi/nx))`
//! (likewise `ly`) and `Z` the z-chain of the reference medium: off-diagonal
//! `-kz`, diagonal `2 kz` inside, `kz + 2 kin` on the first row and
//! `kz + 2 kout` on the last (`2 kin + 2 kout` when `nz = 1`).
//!
//! Only the two weight tables and the `nz` chain diagonal are stored; each
//! column is eliminated on the fly.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::ReferenceParams;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::scalar::Real;
use crate::Error;

/// `2(1 - cos(m pi / n))`, written as `4 sin^2(m pi / 2n)` to keep small modes accurate.
pub fn eigen_weight(m: usize, n: usize) -> f64 {
    let s = libm::sin(core::f64::consts::PI * m as f64 / (2 * n) as f64);
    4.0 * s * s
}

#[derive(Debug, Clone)]
pub struct TridiagFactors<T> {
    nx: usize,
    ny: usize,
    nz: usize,
    /// `lx(i') kx_ref`
    shift_x: Vec<T>,
    /// `ly(j') ky_ref`
    shift_y: Vec<T>,
    /// Chain diagonal without the x/y shift.
    base: Vec<T>,
    /// `kz_ref`; the off-diagonal is its negative.
    kz: T,
}

/// Chain diagonal of the reference medium.
fn chain_base(nz: usize, kz: f64, kin: f64, kout: f64) -> Vec<f64> {
    (0..nz)
        .map(|k| {
            let mut d = 0.0;
            if k > 0 {
                d += kz;
            }
            if k + 1 < nz {
                d += kz;
            }
            if k == 0 {
                d += 2.0 * kin;
            }
            if k + 1 == nz {
                d += 2.0 * kout;
            }
            d
        })
        .collect()
}

/// Builds the block data and checks that elimination without pivoting stays
/// positive. The `(0, 0)` block has the smallest pivots (adding a positive
/// shift only increases them), so checking it covers every column.
pub fn build_tridiag<T: Real>(grid: &GridSpec, refs: &ReferenceParams) -> Result<TridiagFactors<T>> {
    if refs.refs().iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(crate::error::config!("reference parameters must be positive and finite: {:?}", refs.refs()));
    }
    let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
    let base = chain_base(nz, refs.kz_ref, refs.kin_ref, refs.kout_ref);
    let mut pivot = base[0];
    for &b in &base[1..] {
        if pivot <= 0.0 {
            break;
        }
        pivot = b - refs.kz_ref * refs.kz_ref / pivot;
    }
    if pivot <= 0.0 || !pivot.is_finite() {
        return Err(Error::NotSpd);
    }
    let c = |v: f64| T::from_f64(v);
    Ok(TridiagFactors {
        nx,
        ny,
        nz,
        shift_x: (0..nx).map(|m| c(eigen_weight(m, nx) * refs.kx_ref)).collect(),
        shift_y: (0..ny).map(|m| c(eigen_weight(m, ny) * refs.ky_ref)).collect(),
        base: base.into_iter().map(c).collect(),
        kz: c(refs.kz_ref),
    })
}

impl<T: Real> TridiagFactors<T> {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    /// Dense copy of `T(i', j')`.
    pub fn dense_block(&self, ip: usize, jp: usize) -> DMatrix<f64> {
        let nz = self.nz;
        let s = (self.shift_x[ip] + self.shift_y[jp]).as_f64();
        let kz = self.kz.as_f64();
        DMatrix::from_fn(nz, nz, |a, b| {
            if a == b {
                s + self.base[a].as_f64()
            } else if a.abs_diff(b) == 1 {
                -kz
            } else {
                0.0
            }
        })
    }

    /// Solves every `(i', j')` column of `data` (laid out `[k][j'][i']`) in
    /// place. `cp` must have the same length as `data`; it receives the
    /// modified super-diagonal of each column.
    ///
    /// The sweep runs slice by slice so the inner loop over columns is contiguous.
    pub fn solve_batch(&self, data: &mut [T], cp: &mut [T]) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let s = nx * ny;
        assert_eq!(data.len(), s * nz);
        assert_eq!(cp.len(), s * nz);
        let kz = self.kz;
        for jp in 0..ny {
            let sy = self.shift_y[jp];
            for ip in 0..nx {
                let c = jp * nx + ip;
                let d = self.shift_x[ip] + (sy + self.base[0]);
                debug_assert!(d > T::zero());
                cp[c] = -kz / d;
                data[c] /= d;
            }
        }
        for k in 1..nz {
            let (prev_d, cur_d) = data[(k - 1) * s..(k + 1) * s].split_at_mut(s);
            let (prev_c, cur_c) = cp[(k - 1) * s..(k + 1) * s].split_at_mut(s);
            let bk = self.base[k];
            for jp in 0..ny {
                let sy = self.shift_y[jp] + bk;
                for ip in 0..nx {
                    let c = jp * nx + ip;
                    let denom = self.shift_x[ip] + sy + kz * prev_c[c];
                    debug_assert!(denom > T::zero(), "non-positive pivot in column ({ip}, {jp})");
                    cur_c[c] = -kz / denom;
                    cur_d[c] = (cur_d[c] + kz * prev_d[c]) / denom;
                }
            }
        }
        for k in (0..nz.saturating_sub(1)).rev() {
            let (cur_d, next_d) = data[k * s..(k + 2) * s].split_at_mut(s);
            let cur_c = &cp[k * s..(k + 1) * s];
            for c in 0..s {
                cur_d[c] -= cur_c[c] * next_d[c];
            }
        }
    }

    /// Solves a single contiguous column.
    pub fn solve_column(&self, ip: usize, jp: usize, rhs: &mut [T], cp: &mut [T]) {
        let nz = self.nz;
        let (sx, sy) = (self.shift_x[ip], self.shift_y[jp]);
        let kz = self.kz;
        let mut d = sx + (sy + self.base[0]);
        if nz > 1 {
            cp[0] = -kz / d;
        }
        rhs[0] /= d;
        for k in 1..nz {
            d = sx + (sy + self.base[k]) + kz * cp[k - 1];
            assert!(d > T::zero(), "non-positive pivot");
            if k + 1 < nz {
                cp[k] = -kz / d;
            }
            rhs[k] = (rhs[k] + kz * rhs[k - 1]) / d;
        }
        for k in (0..nz.saturating_sub(1)).rev() {
            rhs[k] -= cp[k] * rhs[k + 1];
        }
    }
}
