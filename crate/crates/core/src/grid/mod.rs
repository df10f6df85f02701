//! Voxel grid geometry and cell-centred orthotropic conductivity fields.
//!
//! All cell arrays are stored x-fastest: `index(i, j, k) = (k * ny + j) * nx + i`,
//! so every constant-`k` slice is one contiguous `nx * ny` block.

mod generate;

use alloc::vec::Vec;
use core::fmt;

use crate::error::{config, contract, Result};

pub use generate::{
    gen_center_ball, gen_channels, gen_random_balls, gen_smooth_problem, BallPreset, RandomBalls,
    SmoothProblem,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, lz: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(config!("cell counts must be positive, got {nx}x{ny}x{nz}"));
        }
        for (name, l) in [("lx", lx), ("ly", ly), ("lz", lz)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(config!("{name} must be positive and finite, got {l}"));
            }
        }
        Ok(Self { nx, ny, nz, lx, ly, lz })
    }

    /// `n^3` cells on the unit cube.
    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new(n, n, n, 1.0, 1.0, 1.0)
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn hz(&self) -> f64 {
        self.lz / self.nz as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hy() * self.hz()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat offset of cell `(i, j, k)`; errors when the index is out of range.
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> Result<usize> {
        if i >= self.nx || j >= self.ny || k >= self.nz {
            return Err(contract!(
                "cell ({i}, {j}, {k}) outside {}x{}x{} grid",
                self.nx,
                self.ny,
                self.nz
            ));
        }
        Ok(self.idx(i, j, k))
    }

    #[inline]
    pub(crate) fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Physical coordinates of the centre of cell `(i, j, k)`.
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            (i as f64 + 0.5) * self.hx(),
            (j as f64 + 0.5) * self.hy(),
            (k as f64 + 0.5) * self.hz(),
        ]
    }

    /// Iterates `(i, j, k)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        (0..nz).flat_map(move |k| (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j, k))))
    }
}

/// Dirichlet direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Axis {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(config!("unknown axis {other:?}, expected x, y or z")),
        }
    }
}

/// Fixed potentials on the two faces normal to `axis`; the other four faces are
/// insulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConfig {
    pub axis: Axis,
    pub p_in: f64,
    pub p_out: f64,
}

impl BoundaryConfig {
    pub fn new(axis: Axis, p_in: f64, p_out: f64) -> Result<Self> {
        if !(p_in.is_finite() && p_out.is_finite()) {
            return Err(config!("p_in and p_out must be finite"));
        }
        if p_in == p_out {
            return Err(config!(
                "p_in must differ from p_out (got {p_in} for both); kappa_eff is undefined otherwise"
            ));
        }
        Ok(Self { axis, p_in, p_out })
    }

    /// Unit drop along z: `p_in = 1`, `p_out = 0`.
    pub fn unit_z() -> Self {
        Self { axis: Axis::Z, p_in: 1.0, p_out: 0.0 }
    }
}

/// Per-cell diagonal conductivity `diag(kx, ky, kz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthotropicField {
    grid: GridSpec,
    kx: Vec<f64>,
    ky: Vec<f64>,
    kz: Vec<f64>,
}

type CellMap = fn(usize, usize, usize) -> (usize, usize, usize);

impl OrthotropicField {
    pub fn new(grid: GridSpec, kx: Vec<f64>, ky: Vec<f64>, kz: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        for (name, a) in [("kx", &kx), ("ky", &ky), ("kz", &kz)] {
            if a.len() != n {
                return Err(contract!("{name} has {} entries, grid needs {n}", a.len()));
            }
            if let Some(pos) = a.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(config!(
                    "{name}[{pos}] = {} is not strictly positive and finite",
                    a[pos]
                ));
            }
        }
        Ok(Self { grid, kx, ky, kz })
    }

    /// Samples `diag(f(x, y, z))` at every cell centre.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64, f64) -> [f64; 3]) -> Result<Self> {
        let n = grid.len();
        let (mut kx, mut ky, mut kz) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (i, j, k) in grid.cells() {
            let [x, y, z] = grid.cell_center(i, j, k);
            let [a, b, c] = f(x, y, z);
            kx.push(a);
            ky.push(b);
            kz.push(c);
        }
        Self::new(grid, kx, ky, kz)
    }

    pub fn homogeneous(grid: GridSpec, k: [f64; 3]) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, alloc::vec![k[0]; n], alloc::vec![k[1]; n], alloc::vec![k[2]; n])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }
    pub fn ky(&self) -> &[f64] {
        &self.ky
    }
    pub fn kz(&self) -> &[f64] {
        &self.kz
    }

    /// Conductivity array along `axis`.
    pub fn along(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.kx,
            Axis::Y => &self.ky,
            Axis::Z => &self.kz,
        }
    }

    pub fn into_parts(self) -> (GridSpec, Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.grid, self.kx, self.ky, self.kz)
    }

    /// Multiplies every entry by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let s = |a: &[f64]| a.iter().map(|v| v * c).collect::<Vec<_>>();
        Self::new(self.grid, s(&self.kx), s(&self.ky), s(&self.kz))
    }

    /// Transposes the data so that `axis` becomes the canonical z axis.
    ///
    /// `X` swaps x and z, `Y` swaps y and z, `Z` is the identity. Each swap is
    /// an involution, so applying the same axis twice restores the field. The
    /// conductivity component along `axis` always ends up in `kz`.
    pub fn axis_permute(&self, axis: Axis) -> Self {
        let g = &self.grid;
        let (grid, map): (GridSpec, CellMap) = match axis {
            Axis::Z => return self.clone(),
            Axis::X => (
                GridSpec { nx: g.nz, ny: g.ny, nz: g.nx, lx: g.lz, ly: g.ly, lz: g.lx },
                |i, j, k| (k, j, i),
            ),
            Axis::Y => (
                GridSpec { nx: g.nx, ny: g.nz, nz: g.ny, lx: g.lx, ly: g.lz, lz: g.ly },
                |i, j, k| (i, k, j),
            ),
        };
        let n = g.len();
        let (mut a, mut b, mut c) = (alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n]);
        for (i, j, k) in grid.cells() {
            let (si, sj, sk) = map(i, j, k);
            let src = g.idx(si, sj, sk);
            let dst = grid.idx(i, j, k);
            a[dst] = self.kx[src];
            b[dst] = self.ky[src];
            c[dst] = self.kz[src];
        }
        let (kx, ky, kz) = match axis {
            Axis::X => (c, b, a),
            Axis::Y => (a, c, b),
            Axis::Z => unreachable!(),
        };
        Self { grid, kx, ky, kz }
    }

    /// Smallest and largest conductivity along `axis`.
    pub fn range_along(&self, axis: Axis) -> (f64, f64) {
        self.along(axis)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
