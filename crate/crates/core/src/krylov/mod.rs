//! Preconditioned conjugate gradient and the dense oracles used to check it.

mod dense;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use dense::{
    condition_estimate, condition_estimate_operator, dense_solve, lanczos_extremes, ConditionEstimate,
    DENSE_EIGEN_LIMIT,
};

use crate::error::{contract, Result};
use crate::preconditioner::{Preconditioner, ReferenceParams};
use crate::scalar::{axpy, dot, norm2, xpby, Real};
use crate::tpfa::DiscreteSystem;
use crate::Error;

/// Symmetric positive definite operator `y = A x`.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()>;
}

impl<T: Real> LinearOperator<T> for DiscreteSystem<T> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        DiscreteSystem::apply(self, x, y)
    }
}

impl LinearOperator<f64> for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols() || y.len() != self.nrows() {
            return Err(contract!("dense operator is {}x{}", self.nrows(), self.ncols()));
        }
        for (r, yi) in y.iter_mut().enumerate() {
            *yi = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    /// Stop once `|r| / |b| <= rtol`.
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, max_iter: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `|r_k| / |b|` for `k = 0..=iterations`.
    pub history: Vec<f64>,
}

/// Preconditioned conjugate gradient from a zero initial guess.
///
/// The update order is the textbook one with a single operator and a single
/// preconditioner application per iteration; the vector `z` first holds
/// `A w` and is then overwritten by `M^-1 r`. The relative residual is checked
/// right after `r` is updated, and the initial residual is the first history
/// entry, so `iterations == history.len() - 1`.
///
/// A zero right-hand side returns the zero vector after 0 iterations.
// negated comparisons are deliberate: NaN must fail every positivity check
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn pcg<T, A, M>(a: &A, m: &mut M, b: &[T], opts: &PcgOptions) -> Result<PcgOutcome<T>>
where
    T: Real,
    A: LinearOperator<T> + ?Sized,
    M: Preconditioner<T> + ?Sized,
{
    let n = a.dim();
    if b.len() != n {
        return Err(contract!("right-hand side has {} entries, operator has {n}", b.len()));
    }
    if !(opts.rtol > 0.0) || opts.max_iter == 0 {
        return Err(contract!("rtol must be positive and max_iter at least 1"));
    }
    let mut p = vec![T::zero(); n];
    let b_norm = norm2(b);
    if !b_norm.is_finite() {
        return Err(Error::Breakdown { iteration: 0, reason: "right-hand side is not finite".into() });
    }
    if b_norm == T::zero() {
        return Ok(PcgOutcome { solution: p, iterations: 0, converged: true, history: vec![0.0] });
    }
    let eps = T::epsilon() * T::from_f64(1e2);
    let mut r = b.to_vec();
    let mut z = vec![T::zero(); n];
    m.apply(&r, &mut z)?;
    let mut w = z.clone();
    let mut rho = dot(&r, &z);
    let mut history = vec![1.0];
    let mut converged = 1.0 <= opts.rtol;
    if !converged && !(rho > T::zero()) {
        return Err(breakdown(0, "r.z is not positive", rho));
    }
    let mut it = 0;
    while !converged && it < opts.max_iter {
        it += 1;
        a.apply(&w, &mut z)?;
        let zw = dot(&z, &w);
        if !(zw > eps * norm2(&z) * norm2(&w)) {
            return Err(breakdown(it, "w.Aw is not positive", zw));
        }
        let alpha = rho / zw;
        axpy(alpha, &w, &mut p);
        axpy(-alpha, &z, &mut r);
        let rel = (norm2(&r) / b_norm).as_f64();
        if rel.is_nan() {
            return Err(Error::Breakdown { iteration: it, reason: "residual became NaN".into() });
        }
        history.push(rel);
        if rel <= opts.rtol {
            converged = true;
            break;
        }
        m.apply(&r, &mut z)?;
        let rho_new = dot(&r, &z);
        if !(rho_new > T::zero()) {
            return Err(breakdown(it, "r.z is not positive", rho_new));
        }
        xpby(&z, rho_new / rho, &mut w);
        rho = rho_new;
    }
    Ok(PcgOutcome { solution: p, iterations: it, converged, history })
}

fn breakdown<T: Real>(iteration: usize, what: &str, value: T) -> Error {
    Error::Breakdown { iteration, reason: alloc::format!("{what} ({value})") }
}

/// What a solve produced, in the form the pipeline serializes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// `|r_k| / |b|`, starting with the initial residual.
    pub relative_residuals: Vec<f64>,
    pub kappa_eff: Option<f64>,
    pub l2_error: Option<f64>,
    pub prep_seconds: f64,
    pub exec_seconds: f64,
    /// `"f64"` or `"f32"`.
    pub precision: &'static str,
    pub preconditioner: String,
    pub ref_params: Option<ReferenceParams>,
}

impl SolveReport {
    pub fn new<T: Real>(outcome: &PcgOutcome<T>, preconditioner: impl Into<String>) -> Self {
        Self {
            iterations: outcome.iterations,
            converged: outcome.converged,
            relative_residuals: outcome.history.clone(),
            kappa_eff: None,
            l2_error: None,
            prep_seconds: 0.0,
            exec_seconds: 0.0,
            precision: T::NAME,
            preconditioner: preconditioner.into(),
            ref_params: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryConfig, GridSpec, OrthotropicField};
    use crate::preconditioner::{coefficient_stats, solve_reference_lp, FctPreconditioner, Identity, Jacobi, Ssor};
    use crate::tpfa::{assemble_dense, build_rhs, build_system};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(g: GridSpec, contrast: f64, seed: u64) -> DiscreteSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..g.len()).map(|_| libm::pow(contrast, rng.gen::<f64>())).collect::<Vec<_>>();
        let (a, b, c) = (draw(), draw(), draw());
        build_system(&OrthotropicField::new(g, a, b, c).unwrap(), BoundaryConfig::unit_z()).unwrap()
    }

    #[test]
    fn single_cell_one_iteration() {
        let sys = random_system(GridSpec::new(1, 1, 1, 1.0, 1.0, 1.0).unwrap(), 10.0, 1);
        let out = pcg(&sys, &mut Identity, &[2.0], &PcgOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
    }

    #[test]
    fn matched_reference_is_exact() {
        let f = OrthotropicField::homogeneous(GridSpec::new(6, 5, 7, 1.0, 1.0, 1.0).unwrap(), [2.0, 3.0, 5.0]).unwrap();
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let refs = solve_reference_lp(&coefficient_stats(&sys));
        let mut pc = FctPreconditioner::new(&sys.grid, refs).unwrap();
        let out = pcg(&sys, &mut pc, &build_rhs(&sys), &PcgOptions { rtol: 1e-12, max_iter: 10 }).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.history[1] < 1e-14);
    }

    #[test]
    fn matches_dense_solve() {
        let g = GridSpec::new(5, 5, 5, 1.0, 1.0, 1.0).unwrap();
        let sys = random_system(g, 1e3, 7);
        let b = build_rhs(&sys);
        let refs = solve_reference_lp(&coefficient_stats(&sys));
        let mut pc = FctPreconditioner::new(&g, refs).unwrap();
        let out = pcg(&sys, &mut pc, &b, &PcgOptions { rtol: 1e-10, max_iter: 1024 }).unwrap();
        let x = dense_solve(&assemble_dense(&sys).unwrap(), &b).unwrap();
        let err = out.solution.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let nx = x.iter().map(|v| v * v).sum::<f64>();
        assert!(libm::sqrt(err / nx) < 1e-8);
    }

    #[test]
    fn history_shape_and_determinism() {
        let sys = random_system(GridSpec::unit_cube(6).unwrap(), 100.0, 3);
        let b = build_rhs(&sys);
        let opts = PcgOptions { rtol: 1e-8, max_iter: 500 };
        let first = pcg(&sys, &mut Jacobi::new(&sys), &b, &opts).unwrap();
        let second = pcg(&sys, &mut Jacobi::new(&sys), &b, &opts).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.history.len(), first.iterations + 1);
        assert_eq!(first.history[0], 1.0);
        assert!(*first.history.last().unwrap() <= 1e-8);
    }

    #[test]
    fn ssor_converges_with_decreasing_energy_error() {
        let g = GridSpec::unit_cube(8).unwrap();
        let sys = random_system(g, 100.0, 11);
        let b = build_rhs(&sys);
        let d = assemble_dense(&sys).unwrap();
        let x = dense_solve(&d, &b).unwrap();
        let mut energies = Vec::new();
        for max_iter in 1..30 {
            let out = pcg(&sys, &mut Ssor::new(&sys, 1.0).unwrap(), &b, &PcgOptions { rtol: 1e-12, max_iter }).unwrap();
            let e = nalgebra::DVector::from_iterator(g.len(), out.solution.iter().zip(&x).map(|(a, b)| a - b));
            energies.push((e.transpose() * &d * &e)[(0, 0)]);
        }
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let out = pcg(&sys, &mut Ssor::new(&sys, 1.0).unwrap(), &b, &PcgOptions { rtol: 1e-8, max_iter: 1024 }).unwrap();
        assert!(out.converged);
    }

    #[test]
    fn not_converged_is_reported() {
        let sys = random_system(GridSpec::unit_cube(8).unwrap(), 1e3, 5);
        let out = pcg(&sys, &mut Identity, &build_rhs(&sys), &PcgOptions { rtol: 1e-12, max_iter: 3 }).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.history.len(), 4);
    }

    #[test]
    fn zero_rhs_and_bad_input() {
        let sys = random_system(GridSpec::unit_cube(2).unwrap(), 10.0, 1);
        let out = pcg(&sys, &mut Identity, &[0.0; 8], &PcgOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(pcg(&sys, &mut Identity, &[0.0; 7], &PcgOptions::default()).is_err());
        let nan = [f64::NAN; 8];
        assert!(matches!(pcg(&sys, &mut Identity, &nan, &PcgOptions::default()), Err(Error::Breakdown { .. })));
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let d = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let err = pcg(&d, &mut Identity, &[0.0, 1.0], &PcgOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Breakdown { iteration: 1, .. }));
    }

    #[test]
    fn single_precision_solve() {
        let g = GridSpec::unit_cube(8).unwrap();
        let sys = random_system(g, 10.0, 2);
        let sys32 = sys.cast::<f32>();
        let refs = solve_reference_lp(&coefficient_stats(&sys));
        let mut pc = FctPreconditioner::<f32>::new(&g, refs).unwrap();
        let out = pcg(&sys32, &mut pc, &build_rhs(&sys32), &PcgOptions { rtol: 1e-5, max_iter: 200 }).unwrap();
        assert!(out.converged);
        assert!(out.solution.iter().all(|v| v.is_finite()));
        let report = SolveReport::new(&out, pc.name());
        assert_eq!(report.precision, "f32");
    }
}
