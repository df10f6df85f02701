//! Brute-force checks of the fast path against direct computations: direct-sum
//! cosine transforms, dense Cholesky solves and dense generalized eigenvalues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use etc_core::krylov::{condition_estimate, dense_solve, PcgOptions};
use etc_core::preconditioner::{coefficient_stats, FctPreconditioner, Preconditioner, RefMode};
use etc_core::scalar::norm2;
use etc_core::tpfa::{assemble_dense, build_rhs, build_system};
use etc_core::transforms::{dct1d_ref_backward, dct1d_ref_forward, SlabPlan};
use etc_core::{pcg, BoundaryConfig, DiscreteSystem, GridSpec, OrthotropicField, ReferenceParams};

use crate::error::Result;

/// Outcome of one oracle suite: the worst error seen against its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.limit
    }
}

/// Reference operator for `refs`: uniform couplings with the boundary layers
/// carrying the factor 2 of a half-cell distance.
pub fn reference_system(grid: GridSpec, refs: &ReferenceParams) -> DiscreteSystem {
    let [kx, ky, kz, kin, kout] = refs.refs();
    DiscreteSystem::uniform(grid, [kx, ky, kz, 2.0 * kin, 2.0 * kout], BoundaryConfig::unit_z())
}

/// Separable 2D DCT-II of every z-slice by direct summation.
pub fn dct2_direct(data: &[f64], nx: usize, ny: usize, backward: bool) -> Vec<f64> {
    let t = |v: &[f64]| if backward { dct1d_ref_backward(v) } else { dct1d_ref_forward(v) };
    let mut out = data.to_vec();
    for slice in out.chunks_mut(nx * ny) {
        for row in slice.chunks_mut(nx) {
            let r = t(row);
            row.copy_from_slice(&r);
        }
        for i in 0..nx {
            let col: Vec<f64> = (0..ny).map(|j| slice[j * nx + i]).collect();
            for (j, v) in t(&col).into_iter().enumerate() {
                slice[j * nx + i] = v;
            }
        }
    }
    out
}

fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Batched fast transform against the direct sum, both directions, plus the
/// round trip, for every `(nx, ny)` in `sizes` squared and each `nz`.
pub fn transform_oracle(sizes: &[usize], nzs: &[usize], seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut cases) = (0.0f64, 0);
    for &nx in sizes {
        for &ny in sizes {
            for &nz in nzs {
                let plan = SlabPlan::<f64>::new(nx, ny, nz)?;
                let mut ws = plan.workspaces(etc_core::workers());
                let u: Vec<f64> = (0..nx * ny * nz).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut fwd = u.clone();
                plan.forward_batch(&mut fwd, &mut ws)?;
                worst = worst.max(rel_inf(&fwd, &dct2_direct(&u, nx, ny, false)));
                let mut bwd = u.clone();
                plan.backward_batch(&mut bwd, &mut ws)?;
                worst = worst.max(rel_inf(&bwd, &dct2_direct(&u, nx, ny, true)));
                plan.backward_batch(&mut fwd, &mut ws)?;
                worst = worst.max(rel_inf(&fwd, &u));
                cases += 1;
            }
        }
    }
    Ok(Check { name: "fast cosine transform vs direct sum", cases, worst, limit: 1e-12 })
}

fn random_refs(rng: &mut ChaCha8Rng) -> [f64; 5] {
    std::array::from_fn(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
}

/// `|A_ref M^-1 r - r| / |r|` on random grids, reference values and vectors.
/// Every other instance realizes `A_ref` as the TPFA stencil of a homogeneous
/// field (so `kin = kout = kz`); the rest use independent boundary values.
pub fn preconditioner_exactness(instances: usize, max_dims: [usize; 3], seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..instances {
        let [nx, ny, nz] = max_dims.map(|m| rng.gen_range(1..=m));
        let grid = GridSpec::new(nx, ny, nz, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))?;
        let (sys, refs) = if case % 2 == 0 {
            let k = [rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)];
            let sys = build_system(&OrthotropicField::homogeneous(grid, k)?, BoundaryConfig::unit_z())?;
            let refs = RefMode::Opt.params(&coefficient_stats(&sys));
            (sys, refs)
        } else {
            let stats = etc_core::CoefficientStats::uniform(random_refs(&mut rng));
            let refs = ReferenceParams::with_stats(random_refs(&mut rng), &stats);
            (reference_system(grid, &refs), refs)
        };
        let mut m = FctPreconditioner::<f64>::new(&grid, refs)?;
        let r: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut z = vec![0.0; r.len()];
        m.apply(&r, &mut z)?;
        let mut az = vec![0.0; r.len()];
        sys.apply(&z, &mut az)?;
        let d: Vec<f64> = az.iter().zip(&r).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&d) / norm2(&r));
    }
    Ok(Check { name: "reference operator times preconditioner is identity", cases: instances, worst, limit: 1e-11 })
}

/// Random log-uniform conductivities with `max/min <= contrast`.
pub fn random_field(grid: GridSpec, contrast: f64, rng: &mut ChaCha8Rng) -> Result<OrthotropicField> {
    let mut draw = || (0..grid.len()).map(|_| contrast.powf(rng.gen::<f64>())).collect::<Vec<_>>();
    let (a, b, c) = (draw(), draw(), draw());
    Ok(OrthotropicField::new(grid, a, b, c)?)
}

fn random_small_grid(rng: &mut ChaCha8Rng, max_n: usize) -> Result<GridSpec> {
    let [nx, ny, nz] = [(); 3].map(|_| rng.gen_range(1..=max_n));
    Ok(GridSpec::new(nx, ny, nz, 1.0, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))?)
}

/// FCT-preconditioned PCG against a dense Cholesky solve.
pub fn pcg_vs_dense(instances: usize, max_n: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let grid = random_small_grid(&mut rng, max_n)?;
        let contrast = 10f64.powf(rng.gen_range(0.0..3.0));
        let sys = build_system(&random_field(grid, contrast, &mut rng)?, BoundaryConfig::unit_z())?;
        let b = build_rhs(&sys);
        let exact = dense_solve(&assemble_dense(&sys)?, &b)?;
        let mut m = FctPreconditioner::<f64>::new(&grid, RefMode::Opt.params(&coefficient_stats(&sys)))?;
        let out = pcg(&sys, &mut m, &b, &PcgOptions { rtol: 1e-10, max_iter: 1024 })?;
        let d: Vec<f64> = out.solution.iter().zip(&exact).map(|(a, b)| a - b).collect();
        worst = worst.max(if out.converged { norm2(&d) / norm2(&exact) } else { f64::INFINITY });
    }
    Ok(Check { name: "PCG vs dense solve", cases: instances, worst, limit: 1e-8 })
}

/// `Cond(A_ref^-1 A) / (L''/L')`, which the spectral-equivalence bound keeps
/// below one, for both reference modes.
pub fn condition_bound(instances: usize, max_n: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let grid = random_small_grid(&mut rng, max_n)?;
        let contrast = 10f64.powf(rng.gen_range(0.0..3.0));
        let sys = build_system(&random_field(grid, contrast, &mut rng)?, BoundaryConfig::unit_z())?;
        let d = assemble_dense(&sys)?;
        let stats = coefficient_stats(&sys);
        for mode in [RefMode::Opt, RefMode::One] {
            let refs = mode.params(&stats);
            let d_ref = assemble_dense(&reference_system(grid, &refs))?;
            let c = condition_estimate(&d, Some(&d_ref))?;
            worst = worst.max(c.cond / refs.objective());
        }
    }
    Ok(Check { name: "preconditioned condition number within the bound", cases: 2 * instances, worst, limit: 1.0 + 1e-8 })
}

/// All suites at small sizes; `max_n` bounds the transform sizes and the
/// random grids.
pub fn run_all(max_n: usize) -> Result<Vec<Check>> {
    let sizes: Vec<usize> = (1..=max_n.max(1)).collect();
    let n = max_n.clamp(1, 6);
    Ok(vec![
        transform_oracle(&sizes, &[1, 3], 1)?,
        preconditioner_exactness(20, [max_n.max(1); 3], 2)?,
        pcg_vs_dense(10, n, 3)?,
        condition_bound(10, n, 4)?,
    ])
}
