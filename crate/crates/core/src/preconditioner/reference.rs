//! Reference-medium parameters.
//!
//! With face statistics `min_d`, `max_d` for the five groups (x, y, z faces and
//! the two Dirichlet layers), the reference medium `ref_d` gives the bounds
//! `L' = min_d min_d/ref_d` and `L'' = max_d max_d/ref_d`. In log space the
//! ratio `L''/L'` becomes the linear program
//!
//! ```text
//! min  l'' - l'
//! s.t. c_d + l'  <= log min_d
//!      c_d + l'' >= log max_d        for every group d
//! ```
//!
//! Any feasible point has `l'' - l' >= log max_d - log min_d` for each `d`, so
//! the optimum is at least `L = max_d log(max_d/min_d)`. The point
//! `c_d = (log min_d + log max_d)/2`, `l' = -L/2`, `l'' = L/2` is feasible and
//! attains it, which gives the closed form `ref_d = sqrt(min_d max_d)`.

use crate::scalar::Real;
use crate::tpfa::DiscreteSystem;

/// Group order used by every array in this module.
pub const GROUPS: [&str; 5] = ["x", "y", "z", "in", "out"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        values.fold(None, |acc, v| match acc {
            None => Some(Bounds { min: v, max: v }),
            Some(b) => Some(Bounds { min: b.min.min(v), max: b.max.max(v) }),
        })
    }

    pub fn log_ratio(&self) -> f64 {
        libm::log(self.max / self.min)
    }
}

/// Extremes of the scaled face coefficients. A face group is `None` when the
/// grid has a single cell along that axis; its reference value then never
/// enters the operator. The Dirichlet groups hold `kz / hz^2` of the boundary
/// layers, without the factor 2 that the boundary form carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientStats {
    pub groups: [Option<Bounds>; 5],
}

impl CoefficientStats {
    pub fn uniform(values: [f64; 5]) -> Self {
        Self { groups: values.map(|v| Some(Bounds { min: v, max: v })) }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { groups: self.groups.map(|g| g.map(|b| Bounds { min: b.min * c, max: b.max * c })) }
    }
}

pub fn coefficient_stats<T: Real>(sys: &DiscreteSystem<T>) -> CoefficientStats {
    let f = |a: &[T]| Bounds::of(a.iter().map(|v| v.as_f64()));
    let half = |a: &[T]| Bounds::of(a.iter().map(|v| v.as_f64() / 2.0));
    CoefficientStats { groups: [f(&sys.tx), f(&sys.ty), f(&sys.tz), half(&sys.t_in), half(&sys.t_out)] }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceParams {
    pub kx_ref: f64,
    pub ky_ref: f64,
    pub kz_ref: f64,
    pub kin_ref: f64,
    pub kout_ref: f64,
    /// Lower spectral-equivalence constant.
    pub lambda_lo: f64,
    /// Upper spectral-equivalence constant.
    pub lambda_hi: f64,
}

impl ReferenceParams {
    /// Reference values with the equivalence constants they induce for `stats`.
    pub fn with_stats(refs: [f64; 5], stats: &CoefficientStats) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (g, r) in stats.groups.iter().zip(refs) {
            if let Some(b) = g {
                lo = lo.min(b.min / r);
                hi = hi.max(b.max / r);
            }
        }
        let [kx_ref, ky_ref, kz_ref, kin_ref, kout_ref] = refs;
        Self { kx_ref, ky_ref, kz_ref, kin_ref, kout_ref, lambda_lo: lo, lambda_hi: hi }
    }

    pub fn refs(&self) -> [f64; 5] {
        [self.kx_ref, self.ky_ref, self.kz_ref, self.kin_ref, self.kout_ref]
    }

    /// Upper bound on the condition number of the preconditioned operator.
    pub fn objective(&self) -> f64 {
        self.lambda_hi / self.lambda_lo
    }
}

/// Optimal reference parameters in closed form (see the module docs).
pub fn solve_reference_lp(stats: &CoefficientStats) -> ReferenceParams {
    let mut refs = [0.0; 5];
    let (mut log_sum, mut present) = (0.0, 0);
    for (r, g) in refs.iter_mut().zip(&stats.groups) {
        if let Some(b) = g {
            *r = libm::sqrt(b.min * b.max);
            log_sum += libm::log(*r);
            present += 1;
        }
    }
    // absent groups: any positive value works; the geometric mean of the
    // others keeps the result scale-equivariant
    let filler = libm::exp(log_sum / present as f64);
    for (r, g) in refs.iter_mut().zip(&stats.groups) {
        if g.is_none() {
            *r = filler;
        }
    }
    ReferenceParams::with_stats(refs, stats)
}

/// Every reference value set to 1.
pub fn ones_reference(stats: &CoefficientStats) -> ReferenceParams {
    ReferenceParams::with_stats([1.0; 5], stats)
}

/// Optimal value of the log-space program: `max_d log(max_d/min_d)`.
pub fn lp_optimum(stats: &CoefficientStats) -> f64 {
    stats.groups.iter().flatten().map(Bounds::log_ratio).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryConfig, GridSpec, OrthotropicField};
    use crate::tpfa::build_system;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn homogeneous_stats() {
        let f = OrthotropicField::homogeneous(GridSpec::unit_cube(4).unwrap(), [1.0; 3]).unwrap();
        let s = coefficient_stats(&build_system(&f, BoundaryConfig::unit_z()).unwrap());
        for g in s.groups {
            assert_eq!(g, Some(Bounds { min: 16.0, max: 16.0 }));
        }
    }

    #[test]
    fn two_value_stats_match_scan() {
        let n = 4;
        let g = GridSpec::unit_cube(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let vals: alloc::vec::Vec<f64> = (0..g.len()).map(|_| if rng.gen::<bool>() { 0.01 } else { 1.0 }).collect();
        let f = OrthotropicField::new(g, vals.clone(), vals.clone(), vals.clone()).unwrap();
        let s = coefficient_stats(&build_system(&f, BoundaryConfig::unit_z()).unwrap());
        // scan all x-adjacent pairs directly
        let n2 = (n * n) as f64;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (i, j, k) in g.cells().filter(|c| c.0 > 0) {
            let h = crate::tpfa::harmonic_mean(vals[g.idx(i - 1, j, k)] * n2, vals[g.idx(i, j, k)] * n2);
            lo = lo.min(h);
            hi = hi.max(h);
        }
        let bx = s.groups[0].unwrap();
        assert_eq!((bx.min, bx.max), (lo, hi));
        assert!((lo - 0.01 * n2).abs() < 1e-12 && (hi - n2).abs() < 1e-12);
    }

    #[test]
    fn unit_stats_give_unit_refs() {
        let p = solve_reference_lp(&CoefficientStats::uniform([1.0; 5]));
        assert_eq!(p.refs(), [1.0; 5]);
        assert_eq!(p.objective(), 1.0);
        assert_eq!(ones_reference(&CoefficientStats::uniform([1.0; 5])).objective(), 1.0);
    }

    #[test]
    fn two_phase_isotropic() {
        let c = 3.0;
        let s = CoefficientStats { groups: [Some(Bounds { min: 0.01 * c, max: c }); 5] };
        let p = solve_reference_lp(&s);
        for r in p.refs() {
            assert!((r - 0.1 * c).abs() < 1e-14);
        }
        assert!((p.objective() - 100.0).abs() < 1e-10);
    }

    #[test]
    fn missing_groups_are_ignored() {
        let mut s = CoefficientStats::uniform([2.0, 3.0, 4.0, 5.0, 6.0]);
        s.groups[2] = None;
        let p = solve_reference_lp(&s);
        assert_eq!(p.objective(), 1.0);
        assert!(p.kz_ref > 0.0);
    }
}
