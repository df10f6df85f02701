//! Deterministic coefficient fields used by the experiments.
//!
//! Inclusions are voxelized by testing the cell centre only; there are no
//! sub-cell volume fractions.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridSpec, OrthotropicField};
use crate::error::{config, Result};

/// Manufactured smooth problem on the unit cube with
/// `K = diag(cos(pi y) + 2, 2 e^z, 3 cos(pi x) + 4)` and exact solution
/// `p = cos(pi x) cos(pi y) e^z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothProblem;

impl SmoothProblem {
    pub fn conductivity(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        [cos(PI * y) + 2.0, 2.0 * exp(z), 3.0 * cos(PI * x) + 4.0]
    }

    pub fn exact(&self, x: f64, y: f64, z: f64) -> f64 {
        cos(PI * x) * cos(PI * y) * exp(z)
    }

    /// `f = -div(K grad p)`.
    ///
    /// Each diagonal entry of `K` is constant along the direction it acts in,
    /// so `-div(K grad p) = -(kx p_xx + ky p_yy + kz p_zz)` with
    /// `p_xx = p_yy = -pi^2 p` and `p_zz = p`:
    ///
    /// ```text
    /// f = [pi^2 (cos(pi y) + 2 + 2 e^z) - (3 cos(pi x) + 4)] * p
    /// ```
    pub fn source(&self, x: f64, y: f64, z: f64) -> f64 {
        let p = self.exact(x, y, z);
        (PI * PI * (cos(PI * y) + 2.0 + 2.0 * exp(z)) - (3.0 * cos(PI * x) + 4.0)) * p
    }

    /// Dirichlet data on `z = 0`.
    pub fn inflow(&self, x: f64, y: f64) -> f64 {
        self.exact(x, y, 0.0)
    }

    /// Dirichlet data on `z = 1`.
    pub fn outflow(&self, x: f64, y: f64) -> f64 {
        self.exact(x, y, 1.0)
    }
}

pub fn gen_smooth_problem(n: usize) -> Result<(OrthotropicField, SmoothProblem)> {
    if n < 2 {
        return Err(config!("smooth problem needs n >= 2, got {n}"));
    }
    let problem = SmoothProblem;
    let field = OrthotropicField::from_fn(GridSpec::unit_cube(n)?, |x, y, z| problem.conductivity(x, y, z))?;
    Ok((field, problem))
}

/// Ball of radius 1/4 at the cube centre with conductivity `kappa_inc * I`,
/// unit matrix elsewhere.
pub fn gen_center_ball(n: usize, kappa_inc: f64) -> Result<OrthotropicField> {
    if n < 2 {
        return Err(config!("center ball needs n >= 2, got {n}"));
    }
    check_kappa(kappa_inc)?;
    let grid = GridSpec::unit_cube(n)?;
    OrthotropicField::from_fn(grid, |x, y, z| {
        let d2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) + (z - 0.5) * (z - 0.5);
        let k = if d2 <= 0.0625 { kappa_inc } else { 1.0 };
        [k, k, k]
    })
}

/// Overlapping balls with uniformly random centres and radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomBalls {
    pub count: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub kappa_inc: f64,
    pub seed: u64,
}

/// Fixed packings standing in for three random-inclusion microstructures of
/// increasing ball size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallPreset {
    /// 60 balls, radii 0.05..0.12.
    A,
    /// 30 balls, radii 0.08..0.16.
    B,
    /// 12 balls, radii 0.12..0.22.
    C,
}

impl BallPreset {
    pub fn params(self, kappa_inc: f64) -> RandomBalls {
        let (count, r_min, r_max, seed) = match self {
            BallPreset::A => (60, 0.05, 0.12, 0xA11CE),
            BallPreset::B => (30, 0.08, 0.16, 0xB0B),
            BallPreset::C => (12, 0.12, 0.22, 0xC0FFEE),
        };
        RandomBalls { count, r_min, r_max, kappa_inc, seed }
    }
}

impl RandomBalls {
    /// Ball centres and radii in draw order: `(cx, cy, cz, r)`.
    pub fn balls(&self) -> Vec<[f64; 4]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let cx: f64 = rng.gen();
                let cy: f64 = rng.gen();
                let cz: f64 = rng.gen();
                let u: f64 = rng.gen();
                [cx, cy, cz, self.r_min + (self.r_max - self.r_min) * u]
            })
            .collect()
    }
}

pub fn gen_random_balls(n: usize, spec: &RandomBalls) -> Result<OrthotropicField> {
    if n < 2 {
        return Err(config!("random balls need n >= 2, got {n}"));
    }
    if spec.count == 0 {
        return Err(config!("ball count must be at least 1"));
    }
    if !(spec.r_min > 0.0 && spec.r_min <= spec.r_max && spec.r_max < 0.5) {
        return Err(config!(
            "radii must satisfy 0 < r_min <= r_max < 1/2, got [{}, {}]",
            spec.r_min,
            spec.r_max
        ));
    }
    check_kappa(spec.kappa_inc)?;
    let grid = GridSpec::unit_cube(n)?;
    let mut inside = alloc::vec![false; grid.len()];
    let h = 1.0 / n as f64;
    for [cx, cy, cz, r] in spec.balls() {
        // cells whose centre can lie within r of the ball centre
        let span = |c: f64| {
            let lo = libm::floor((c - r) / h - 0.5).max(0.0) as usize;
            let hi = (libm::ceil((c + r) / h - 0.5) as isize).clamp(0, n as isize - 1) as usize;
            lo..=hi
        };
        for k in span(cz) {
            for j in span(cy) {
                for i in span(cx) {
                    let [x, y, z] = grid.cell_center(i, j, k);
                    let d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz);
                    if d2 <= r * r {
                        inside[grid.idx(i, j, k)] = true;
                    }
                }
            }
        }
    }
    let k: Vec<f64> = inside.iter().map(|&b| if b { spec.kappa_inc } else { 1.0 }).collect();
    OrthotropicField::new(grid, k.clone(), k.clone(), k)
}

/// Periodic array of three crossing channels.
///
/// The unit cell has conductivity `diag(2^psi, 5^psi, 10^psi)` inside the
/// axis-aligned bars `{y, z in (3/8, 5/8)}`, `{x, z in (3/8, 5/8)}` and
/// `{x, y in (3/8, 5/8)}`, and `diag(0.01, 0.1, 1)` elsewhere. The field is the
/// unit cell tiled `periods` times per axis, `cells_per_period` cells each.
pub fn gen_channels(cells_per_period: usize, periods: usize, psi: f64) -> Result<OrthotropicField> {
    if cells_per_period == 0 || !cells_per_period.is_multiple_of(8) {
        return Err(config!(
            "cells_per_period must be a positive multiple of 8 so the channel band (3/8, 5/8) is cell aligned, got {cells_per_period}"
        ));
    }
    if periods == 0 {
        return Err(config!("periods must be at least 1"));
    }
    if !(psi.is_finite() && psi > 0.0) {
        return Err(config!("psi must be positive, got {psi}"));
    }
    let n = cells_per_period * periods;
    let grid = GridSpec::unit_cube(n)?;
    let (lo, hi) = (3 * cells_per_period / 8, 5 * cells_per_period / 8);
    let band = |c: usize| (lo..hi).contains(&(c % cells_per_period));
    let channel = [pow(2.0, psi), pow(5.0, psi), pow(10.0, psi)];
    let matrix = [0.01, 0.1, 1.0];
    let len = grid.len();
    let (mut kx, mut ky, mut kz) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for (i, j, k) in grid.cells() {
        let (bx, by, bz) = (band(i), band(j), band(k));
        let v = if (by && bz) || (bx && bz) || (bx && by) { channel } else { matrix };
        kx.push(v[0]);
        ky.push(v[1]);
        kz.push(v[2]);
    }
    OrthotropicField::new(grid, kx, ky, kz)
}

fn check_kappa(kappa_inc: f64) -> Result<()> {
    if kappa_inc.is_finite() && kappa_inc > 0.0 {
        Ok(())
    } else {
        Err(config!("kappa_inc must be positive and finite, got {kappa_inc}"))
    }
}
