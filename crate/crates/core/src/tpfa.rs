//! Two-point flux approximation of `-div(K grad p) = f` with fixed potentials
//! on the two z faces and no-flux conditions on the rest.
//!
//! Everything is written in the h-scaled form: each conductivity is divided by
//! the squared spacing along its axis, face coefficients are harmonic means of
//! the two neighbouring scaled cells, and a Dirichlet face contributes twice
//! the scaled `kz` of the cell it bounds. Cells outside the domain carry the
//! value zero, so the boundary potentials appear only in the right-hand side.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{contract, Result};
use crate::grid::{Axis, BoundaryConfig, GridSpec, OrthotropicField};
use crate::par;
use crate::scalar::Real;

/// Largest system [`assemble_dense`] will build.
pub const DENSE_LIMIT: usize = 4096;

/// Square-spacing scaled conductivities `k / h^2`, per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledField {
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    pub kz: Vec<f64>,
}

pub fn scale_field(field: &OrthotropicField) -> ScaledField {
    let g = field.grid();
    let s = |a: &[f64], h: f64| a.iter().map(|v| v / (h * h)).collect::<Vec<_>>();
    ScaledField { kx: s(field.kx(), g.hx()), ky: s(field.ky(), g.hy()), kz: s(field.kz(), g.hz()) }
}

#[inline]
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 / (1.0 / a + 1.0 / b)
}

/// The assembled operator in matrix-free form.
///
/// Face arrays use the same x-fastest order as the cells they sit between:
/// `tx` has `(nx-1) * ny * nz` entries (face between `i-1` and `i` stored at
/// `(k * ny + j) * (nx - 1) + i - 1`), `ty` has `nx * (ny-1) * nz` and `tz`
/// has `nx * ny * (nz-1)`. `t_in` and `t_out` hold the `nx * ny` Dirichlet
/// face coefficients on `k = 0` and `k = nz - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem<T = f64> {
    pub grid: GridSpec,
    pub tx: Vec<T>,
    pub ty: Vec<T>,
    pub tz: Vec<T>,
    pub t_in: Vec<T>,
    pub t_out: Vec<T>,
    pub boundary: BoundaryConfig,
}

/// Builds the canonical z-directed system. Other directions are handled by
/// permuting the field first.
pub fn build_system(field: &OrthotropicField, boundary: BoundaryConfig) -> Result<DiscreteSystem<f64>> {
    if boundary.axis != Axis::Z {
        return Err(contract!(
            "build_system expects a z-directed boundary; permute the field for axis {}",
            boundary.axis
        ));
    }
    let g = *field.grid();
    let s = scale_field(field);
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let mut tx = Vec::with_capacity((nx - 1) * ny * nz);
    let mut ty = Vec::with_capacity(nx * (ny - 1) * nz);
    let mut tz = Vec::with_capacity(nx * ny * (nz - 1));
    for k in 0..nz {
        for j in 0..ny {
            for i in 1..nx {
                tx.push(harmonic_mean(s.kx[g.idx(i - 1, j, k)], s.kx[g.idx(i, j, k)]));
            }
        }
    }
    for k in 0..nz {
        for j in 1..ny {
            for i in 0..nx {
                ty.push(harmonic_mean(s.ky[g.idx(i, j - 1, k)], s.ky[g.idx(i, j, k)]));
            }
        }
    }
    for k in 1..nz {
        for j in 0..ny {
            for i in 0..nx {
                tz.push(harmonic_mean(s.kz[g.idx(i, j, k - 1)], s.kz[g.idx(i, j, k)]));
            }
        }
    }
    let last = (nz - 1) * nx * ny;
    let t_in = s.kz[..nx * ny].iter().map(|v| 2.0 * v).collect();
    let t_out = s.kz[last..].iter().map(|v| 2.0 * v).collect();
    Ok(DiscreteSystem { grid: g, tx, ty, tz, t_in, t_out, boundary })
}

impl<T: Real> DiscreteSystem<T> {
    /// Operator with the same constant coefficient on every face of each kind:
    /// `[tx, ty, tz, t_in, t_out]`.
    pub fn uniform(grid: GridSpec, coeffs: [f64; 5], boundary: BoundaryConfig) -> Self {
        let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
        let c = |v: f64, n: usize| alloc::vec![T::from_f64(v); n];
        Self {
            grid,
            tx: c(coeffs[0], (nx - 1) * ny * nz),
            ty: c(coeffs[1], nx * (ny - 1) * nz),
            tz: c(coeffs[2], nx * ny * (nz - 1)),
            t_in: c(coeffs[3], nx * ny),
            t_out: c(coeffs[4], nx * ny),
            boundary,
        }
    }

    /// Copy of the system in another precision.
    pub fn cast<U: Real>(&self) -> DiscreteSystem<U> {
        let c = |a: &[T]| a.iter().map(|v| U::from_f64(v.as_f64())).collect();
        DiscreteSystem {
            grid: self.grid,
            tx: c(&self.tx),
            ty: c(&self.ty),
            tz: c(&self.tz),
            t_in: c(&self.t_in),
            t_out: c(&self.t_out),
            boundary: self.boundary,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = A u` with the 7-point stencil.
    pub fn apply(&self, u: &[T], out: &mut [T]) -> Result<()> {
        let n = self.len();
        if u.len() != n || out.len() != n {
            return Err(contract!(
                "operator expects vectors of length {n}, got {} and {}",
                u.len(),
                out.len()
            ));
        }
        let (nx, ny, nz) = (self.grid.nx, self.grid.ny, self.grid.nz);
        let slice = nx * ny;
        par::for_each_chunk_mut(out, slice, |k, out_k| {
            let base = k * slice;
            for j in 0..ny {
                let row = j * nx;
                let fx = (k * ny + j) * (nx - 1);
                for i in 0..nx {
                    let c = base + row + i;
                    let uc = u[c];
                    let mut acc = T::zero();
                    if i > 0 {
                        acc += self.tx[fx + i - 1] * (uc - u[c - 1]);
                    }
                    if i + 1 < nx {
                        acc += self.tx[fx + i] * (uc - u[c + 1]);
                    }
                    if j > 0 {
                        acc += self.ty[(k * (ny - 1) + j - 1) * nx + i] * (uc - u[c - nx]);
                    }
                    if j + 1 < ny {
                        acc += self.ty[(k * (ny - 1) + j) * nx + i] * (uc - u[c + nx]);
                    }
                    if k > 0 {
                        acc += self.tz[c - slice] * (uc - u[c - slice]);
                    } else {
                        acc += self.t_in[row + i] * uc;
                    }
                    if k + 1 < nz {
                        acc += self.tz[c] * (uc - u[c + slice]);
                    }
                    if k + 1 == nz {
                        acc += self.t_out[row + i] * uc;
                    }
                    out_k[row + i] = acc;
                }
            }
        });
        Ok(())
    }

    /// Diagonal of the operator.
    pub fn diagonal(&self) -> Vec<T> {
        let g = &self.grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let slice = nx * ny;
        let mut d = alloc::vec![T::zero(); g.len()];
        for (i, j, k) in g.cells() {
            let c = g.idx(i, j, k);
            let fx = (k * ny + j) * (nx - 1);
            let mut acc = T::zero();
            if i > 0 {
                acc += self.tx[fx + i - 1];
            }
            if i + 1 < nx {
                acc += self.tx[fx + i];
            }
            if j > 0 {
                acc += self.ty[(k * (ny - 1) + j - 1) * nx + i];
            }
            if j + 1 < ny {
                acc += self.ty[(k * (ny - 1) + j) * nx + i];
            }
            if k > 0 {
                acc += self.tz[c - slice];
            } else {
                acc += self.t_in[j * nx + i];
            }
            if k + 1 < nz {
                acc += self.tz[c];
            }
            if k + 1 == nz {
                acc += self.t_out[j * nx + i];
            }
            d[c] = acc;
        }
        d
    }
}

/// Right-hand side for the constant boundary potentials of `sys.boundary`.
pub fn build_rhs<T: Real>(sys: &DiscreteSystem<T>) -> Vec<T> {
    let (p_in, p_out) = (sys.boundary.p_in, sys.boundary.p_out);
    build_rhs_with_profiles(sys, |_, _| p_in, |_, _| p_out)
}

/// Right-hand side for Dirichlet data sampled at the centres of the inflow
/// (`z = 0`) and outflow (`z = lz`) faces.
pub fn build_rhs_with_profiles<T: Real>(
    sys: &DiscreteSystem<T>,
    inflow: impl Fn(f64, f64) -> f64,
    outflow: impl Fn(f64, f64) -> f64,
) -> Vec<T> {
    let g = &sys.grid;
    let mut b = alloc::vec![T::zero(); g.len()];
    let last = (g.nz - 1) * g.slice_len();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let [x, y, _] = g.cell_center(i, j, 0);
            let f = j * g.nx + i;
            b[f] += sys.t_in[f] * T::from_f64(inflow(x, y));
            b[last + f] += sys.t_out[f] * T::from_f64(outflow(x, y));
        }
    }
    b
}

/// Adds the midpoint-rule source `f(cell centre)` to every entry of `b`.
pub fn add_source<T: Real>(sys: &DiscreteSystem<T>, b: &mut [T], f: impl Fn(f64, f64, f64) -> f64) -> Result<()> {
    let g = &sys.grid;
    if b.len() != g.len() {
        return Err(contract!("rhs has {} entries, grid needs {}", b.len(), g.len()));
    }
    for (i, j, k) in g.cells() {
        let [x, y, z] = g.cell_center(i, j, k);
        b[g.idx(i, j, k)] += T::from_f64(f(x, y, z));
    }
    Ok(())
}

/// Dense copy of the operator; oracle use only.
pub fn assemble_dense<T: Real>(sys: &DiscreteSystem<T>) -> Result<DMatrix<f64>> {
    let n = sys.len();
    if n > DENSE_LIMIT {
        return Err(crate::Error::TooLarge { size: n, limit: DENSE_LIMIT });
    }
    let g = &sys.grid;
    let (nx, ny) = (g.nx, g.ny);
    let slice = nx * ny;
    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut couple = |a: usize, b: usize, t: f64| {
        d[(a, a)] += t;
        d[(b, b)] += t;
        d[(a, b)] -= t;
        d[(b, a)] -= t;
    };
    for (i, j, k) in g.cells() {
        let c = g.idx(i, j, k);
        if i > 0 {
            couple(c, c - 1, sys.tx[(k * ny + j) * (nx - 1) + i - 1].as_f64());
        }
        if j > 0 {
            couple(c, c - nx, sys.ty[(k * (ny - 1) + j - 1) * nx + i].as_f64());
        }
        if k > 0 {
            couple(c, c - slice, sys.tz[c - slice].as_f64());
        }
    }
    let last = (g.nz - 1) * slice;
    for f in 0..slice {
        d[(f, f)] += sys.t_in[f].as_f64();
        d[(last + f, last + f)] += sys.t_out[f].as_f64();
    }
    Ok(d)
}

fn unscale(t: f64, hz: f64) -> f64 {
    // t = 2 kz / hz^2, the flux factor 2 kz / hz is t * hz
    t * hz
}

/// Unscaled normal fluxes `v` (positive along +z) through the outflow faces
/// `k = nz - 1/2`, `nx * ny` entries.
pub fn reconstruct_boundary_flux<T: Real>(sys: &DiscreteSystem<T>, p: &[T]) -> Result<Vec<f64>> {
    let g = &sys.grid;
    if p.len() != g.len() {
        return Err(contract!("solution has {} entries, grid needs {}", p.len(), g.len()));
    }
    let last = (g.nz - 1) * g.slice_len();
    let p_out = sys.boundary.p_out;
    Ok(sys
        .t_out
        .iter()
        .enumerate()
        .map(|(f, t)| unscale(t.as_f64(), g.hz()) * (p[last + f].as_f64() - p_out))
        .collect())
}

/// Unscaled fluxes (positive along +z) through the inflow faces `k = -1/2`.
pub fn reconstruct_inflow_flux<T: Real>(sys: &DiscreteSystem<T>, p: &[T]) -> Result<Vec<f64>> {
    let g = &sys.grid;
    if p.len() != g.len() {
        return Err(contract!("solution has {} entries, grid needs {}", p.len(), g.len()));
    }
    let p_in = sys.boundary.p_in;
    Ok(sys
        .t_in
        .iter()
        .enumerate()
        .map(|(f, t)| unscale(t.as_f64(), g.hz()) * (p_in - p[f].as_f64()))
        .collect())
}

/// `kappa_eff = lz * sum(v_out) / (nx * ny * (p_in - p_out))`.
pub fn effective_conductivity<T>(sys: &DiscreteSystem<T>, outflow: &[f64]) -> f64 {
    let g = &sys.grid;
    let total: f64 = outflow.iter().sum();
    g.lz * total / ((g.nx * g.ny) as f64 * (sys.boundary.p_in - sys.boundary.p_out))
}

/// Midpoint-rule L2 distance between cell values and an exact solution.
pub fn l2_error_midpoint<T: Real>(grid: &GridSpec, p: &[T], exact: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for (i, j, k) in grid.cells() {
        let [x, y, z] = grid.cell_center(i, j, k);
        let e = p[grid.idx(i, j, k)].as_f64() - exact(x, y, z);
        s += e * e;
    }
    libm::sqrt(s * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gen_center_ball, BoundaryConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: GridSpec, contrast: f64, seed: u64) -> OrthotropicField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.len();
        let mut draw = || (0..n).map(|_| libm::pow(contrast, rng.gen::<f64>())).collect::<Vec<_>>();
        let (kx, ky, kz) = (draw(), draw(), draw());
        OrthotropicField::new(g, kx, ky, kz).unwrap()
    }

    fn apply(sys: &DiscreteSystem, u: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; u.len()];
        sys.apply(u, &mut out).unwrap();
        out
    }

    #[test]
    fn scale_examples() {
        let g = GridSpec::new(1, 1, 2, 1.0, 1.0, 1.0).unwrap();
        let f = OrthotropicField::homogeneous(g, [1.0, 1.0, 4.0]).unwrap();
        let s = scale_field(&f);
        assert_eq!(s.kx, [1.0, 1.0]);
        assert_eq!(s.kz, [16.0, 16.0]);
        let s3 = scale_field(&f.scaled(3.0).unwrap());
        assert_eq!(s3.kz, [48.0, 48.0]);
    }

    #[test]
    fn homogeneous_transmissibilities() {
        let n = 4;
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(n).unwrap(), [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let n2 = (n * n) as f64;
        assert!(sys.tx.iter().chain(&sys.ty).chain(&sys.tz).all(|&t| (t - n2).abs() < 1e-12));
        assert!(sys.t_in.iter().chain(&sys.t_out).all(|&t| (t - 2.0 * n2).abs() < 1e-12));
        assert_eq!(sys.tx.len(), 3 * 16);
    }

    #[test]
    fn harmonic_face_value() {
        assert!((harmonic_mean(0.01, 1.0) - 2.0 / 101.0).abs() < 1e-15);
        assert!((harmonic_mean(0.01, 1.0) - 0.019802).abs() < 1e-6);
    }

    #[test]
    fn faces_match_harmonic_formula() {
        let g = GridSpec::new(3, 4, 5, 1.0, 2.0, 0.5).unwrap();
        let f = random_field(g, 100.0, 3);
        let s = scale_field(&f);
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let (i, j, k) = (2, 3, 4);
        let tx = sys.tx[(k * g.ny + j) * (g.nx - 1) + i - 1];
        assert_eq!(tx, harmonic_mean(s.kx[g.idx(i - 1, j, k)], s.kx[g.idx(i, j, k)]));
        for &t in &sys.tx {
            assert!(t > 0.0);
        }
        assert_eq!(sys.t_in[g.nx + 1], 2.0 * s.kz[g.idx(1, 1, 0)]);
        assert_eq!(sys.t_out[g.nx + 1], 2.0 * s.kz[g.idx(1, 1, g.nz - 1)]);
    }

    #[test]
    fn non_z_boundary_rejected() {
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(2).unwrap(), [1.0; 3]).unwrap();
        let b = BoundaryConfig::new(Axis::X, 1.0, 0.0).unwrap();
        assert!(build_system(&f, b).is_err());
    }

    #[test]
    fn two_cell_operator() {
        let g = GridSpec::new(1, 1, 2, 1.0, 1.0, 2.0).unwrap();
        let f = OrthotropicField::homogeneous(g, [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        assert_eq!(apply(&sys, &[1.0, 0.0]), [3.0, -1.0]);
        let d = assemble_dense(&sys).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]));
    }

    #[test]
    fn constant_vector_only_sees_dirichlet_faces() {
        let g = GridSpec::new(3, 4, 5, 1.0, 1.0, 1.0).unwrap();
        let f = random_field(g, 10.0, 5);
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let c = 2.5;
        let out = apply(&sys, &alloc::vec![c; g.len()]);
        let slice = g.slice_len();
        for (p, &v) in out.iter().enumerate() {
            let expect = match p / slice {
                0 => sys.t_in[p] * c,
                k if k == g.nz - 1 => sys.t_out[p - k * slice] * c,
                _ => 0.0,
            };
            assert!((v - expect).abs() <= 1e-12 * expect.abs().max(1.0), "{p}: {v} vs {expect}");
        }
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(2).unwrap(), [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let mut out = alloc::vec![0.0; 8];
        assert!(matches!(sys.apply(&[0.0; 7], &mut out), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn operator_is_symmetric() {
        for (n, seed) in [(4usize, 1u64), (9, 2), (16, 3), (32, 4)] {
            let g = GridSpec::new(n, n.max(2) - 1, n, 1.0, 1.0, 1.0).unwrap();
            let sys = build_system(&random_field(g, 1000.0, seed), BoundaryConfig::unit_z()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 10);
            let u: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let w: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let (au, aw) = (apply(&sys, &u), apply(&sys, &w));
            let lhs = crate::scalar::dot(&au, &w);
            let rhs = crate::scalar::dot(&u, &aw);
            let scale = crate::scalar::norm2(&au) * crate::scalar::norm2(&w);
            assert!((lhs - rhs).abs() <= 1e-13 * scale, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn dense_matches_operator_columns() {
        let g = GridSpec::unit_cube(4).unwrap();
        let sys = build_system(&random_field(g, 50.0, 9), BoundaryConfig::unit_z()).unwrap();
        let d = assemble_dense(&sys).unwrap();
        assert_eq!(d, d.transpose());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let j = rng.gen_range(0..g.len());
            let mut e = alloc::vec![0.0; g.len()];
            e[j] = 1.0;
            let col = apply(&sys, &e);
            for r in 0..g.len() {
                assert!((d[(r, j)] - col[r]).abs() <= 1e-13 * d[(j, j)]);
            }
        }
        for (a, b) in sys.diagonal().iter().zip(d.diagonal().iter()) {
            assert!((a - b).abs() <= 1e-13 * b);
        }
    }

    #[test]
    fn dense_guard() {
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(17).unwrap(), [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        assert!(matches!(assemble_dense(&sys), Err(crate::Error::TooLarge { .. })));
    }

    #[test]
    fn operator_positive_definite() {
        for seed in 0..4 {
            let g = GridSpec::new(6, 5, 6, 1.0, 1.0, 1.0).unwrap();
            let sys = build_system(&random_field(g, 1000.0, seed), BoundaryConfig::unit_z()).unwrap();
            let ev = assemble_dense(&sys).unwrap().symmetric_eigenvalues();
            assert!(ev.min() > 0.0);
        }
    }

    #[test]
    fn rhs_and_linear_profile() {
        let n = 4;
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(n).unwrap(), [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let b = build_rhs(&sys);
        assert!(b[..16].iter().all(|&v| (v - 32.0).abs() < 1e-12));
        assert!(b[16..].iter().all(|&v| v == 0.0));
        // exact discrete solution is linear in k
        let g = sys.grid;
        let p: Vec<f64> = g.cells().map(|(_, _, k)| 1.0 - (k as f64 + 0.5) / n as f64).collect();
        let ap = apply(&sys, &p);
        for (x, y) in ap.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let v = reconstruct_boundary_flux(&sys, &p).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!((effective_conductivity(&sys, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrated_face_has_zero_flux() {
        let g = GridSpec::new(2, 2, 3, 1.0, 1.0, 1.0).unwrap();
        let f = OrthotropicField::homogeneous(g, [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::new(Axis::Z, 2.0, 0.7).unwrap()).unwrap();
        let p = alloc::vec![0.7; g.len()];
        assert!(reconstruct_boundary_flux(&sys, &p).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn source_is_midpoint_sampled() {
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(3).unwrap(), [1.0; 3]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let b0 = build_rhs(&sys);
        let mut b = b0.clone();
        add_source(&sys, &mut b, |_, _, _| 0.0).unwrap();
        assert_eq!(b, b0);
        add_source(&sys, &mut b, |_, _, _| 1.0).unwrap();
        for (x, y) in b.iter().zip(&b0) {
            assert_eq!(*x, y + 1.0);
        }
    }

    #[test]
    fn l2_error_examples() {
        let g = GridSpec::unit_cube(4).unwrap();
        let exact = |x: f64, y: f64, z: f64| x + 2.0 * y - z;
        let p: Vec<f64> = g.cells().map(|(i, j, k)| {
            let [x, y, z] = g.cell_center(i, j, k);
            exact(x, y, z)
        }).collect();
        assert_eq!(l2_error_midpoint(&g, &p, exact), 0.0);
        let shifted: Vec<f64> = p.iter().map(|v| v + 0.3).collect();
        assert!((l2_error_midpoint(&g, &shifted, exact) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn center_ball_system_builds() {
        let f = gen_center_ball(8, 10.0).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        assert_eq!(sys.t_in.len(), 64);
    }

    #[test]
    fn uniform_system_matches_homogeneous_field() {
        let g = GridSpec::new(3, 4, 5, 1.0, 1.0, 1.0).unwrap();
        let f = OrthotropicField::homogeneous(g, [2.0, 3.0, 4.0]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let s = scale_field(&f);
        let u = DiscreteSystem::<f64>::uniform(
            g,
            [s.kx[0], s.ky[0], s.kz[0], 2.0 * s.kz[0], 2.0 * s.kz[0]],
            BoundaryConfig::unit_z(),
        );
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs());
        assert!(close(&sys.tx, &u.tx) && close(&sys.tz, &u.tz) && close(&sys.t_out, &u.t_out));
    }
}
