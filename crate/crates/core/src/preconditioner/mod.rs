//! Preconditioners for the TPFA operator: the reference-medium solver built on
//! fast cosine transforms, and the classical SSOR / Jacobi / identity baselines.

mod fct;
mod reference;
mod tridiag;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use fct::FctPreconditioner;
pub use reference::{
    coefficient_stats, lp_optimum, ones_reference, solve_reference_lp, Bounds, CoefficientStats, ReferenceParams,
    GROUPS,
};
pub use tridiag::{build_tridiag, eigen_weight, TridiagFactors};

use crate::error::{config, contract, Result};
use crate::scalar::Real;
use crate::tpfa::DiscreteSystem;

/// `z = M^-1 r` for some symmetric positive definite `M`.
pub trait Preconditioner<T: Real> {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()>;

    fn name(&self) -> &'static str;
}

impl<T: Real, P: Preconditioner<T> + ?Sized> Preconditioner<T> for &mut P {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        (**self).apply(r, z)
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}

/// How the reference medium is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefMode {
    /// Optimal values from the log-space linear program.
    Opt,
    /// All five values set to one.
    One,
}

impl RefMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RefMode::Opt => "opt",
            RefMode::One => "one",
        }
    }

    pub fn params(self, stats: &CoefficientStats) -> ReferenceParams {
        match self {
            RefMode::Opt => solve_reference_lp(stats),
            RefMode::One => ones_reference(stats),
        }
    }
}

impl fmt::Display for RefMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opt" => Ok(RefMode::Opt),
            "one" => Ok(RefMode::One),
            _ => Err(config!("unknown reference mode {s:?}, expected opt or one")),
        }
    }
}

/// Preconditioner selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecondKind {
    Fct,
    Ssor { omega: f64 },
    Jacobi,
    None,
}

impl PrecondKind {
    pub fn tag(&self) -> &'static str {
        match self {
            PrecondKind::Fct => "fct",
            PrecondKind::Ssor { .. } => "ssor",
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::None => "none",
        }
    }

    /// Parses `fct`, `jacobi`, `none`, `ssor` or `ssor:<omega>`.
    pub fn parse(s: &str, default_omega: f64) -> Result<Self> {
        let kind = match s.split_once(':') {
            Some(("ssor", w)) => {
                let omega = w.parse::<f64>().map_err(|_| config!("bad SSOR relaxation {w:?}"))?;
                PrecondKind::Ssor { omega }
            }
            None => match s {
                "fct" => PrecondKind::Fct,
                "ssor" => PrecondKind::Ssor { omega: default_omega },
                "jacobi" => PrecondKind::Jacobi,
                "none" => PrecondKind::None,
                _ => return Err(config!("unknown preconditioner {s:?}, expected fct, ssor, jacobi or none")),
            },
            _ => return Err(config!("unknown preconditioner {s:?}")),
        };
        if let PrecondKind::Ssor { omega } = kind {
            check_omega(omega)?;
        }
        Ok(kind)
    }

    /// `ssor:1` style label, unique per configuration.
    pub fn label(&self) -> alloc::string::String {
        match self {
            PrecondKind::Ssor { omega } => alloc::format!("ssor:{omega}"),
            other => other.tag().into(),
        }
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 2.0 {
        Ok(())
    } else {
        Err(config!("SSOR relaxation must lie in (0, 2), got {omega}"))
    }
}

fn check_len(expect: usize, r: usize, z: usize) -> Result<()> {
    if r != expect || z != expect {
        return Err(contract!("preconditioner expects length {expect}, got {r} and {z}"));
    }
    Ok(())
}

/// `z = r`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        check_len(r.len(), r.len(), z.len())?;
        z.copy_from_slice(r);
        Ok(())
    }

    fn name(&self) -> &'static str {
        "none"
    }
}

/// `z_i = r_i / A_ii`.
#[derive(Debug, Clone)]
pub struct Jacobi<T> {
    inv_diag: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(sys: &DiscreteSystem<T>) -> Self {
        Self { inv_diag: sys.diagonal().into_iter().map(|d| T::one() / d).collect() }
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        check_len(self.inv_diag.len(), r.len(), z.len())?;
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = *ri * *d;
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "jacobi"
    }
}

/// Symmetric successive over-relaxation in lexicographic cell order:
/// `M = w/(2-w) (D/w + L) D^-1 (D/w + U)`, applied as a forward sweep, a
/// diagonal scaling and a backward sweep over the stencil.
#[derive(Debug, Clone)]
pub struct Ssor<'a, T> {
    sys: &'a DiscreteSystem<T>,
    omega: T,
    diag: Vec<T>,
}

impl<'a, T: Real> Ssor<'a, T> {
    pub fn new(sys: &'a DiscreteSystem<T>, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        Ok(Self { sys, omega: T::from_f64(omega), diag: sys.diagonal() })
    }
}

impl<T: Real> Preconditioner<T> for Ssor<'_, T> {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        let g = &self.sys.grid;
        check_len(g.len(), r.len(), z.len())?;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let slice = nx * ny;
        let (tx, ty, tz) = (&self.sys.tx, &self.sys.ty, &self.sys.tz);
        let w = self.omega;
        // (D/w + L) y = r, with L holding the -t couplings to lower neighbours
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = k * slice + j * nx + i;
                    let mut acc = r[c];
                    if i > 0 {
                        acc += tx[(k * ny + j) * (nx - 1) + i - 1] * z[c - 1];
                    }
                    if j > 0 {
                        acc += ty[(k * (ny - 1) + j - 1) * nx + i] * z[c - nx];
                    }
                    if k > 0 {
                        acc += tz[c - slice] * z[c - slice];
                    }
                    z[c] = acc * w / self.diag[c];
                }
            }
        }
        // y <- (2 - w)/w D y
        let two = T::from_f64(2.0);
        for (zi, d) in z.iter_mut().zip(&self.diag) {
            *zi *= *d * (two - w) / w;
        }
        // (D/w + U) z = y
        for k in (0..nz).rev() {
            for j in (0..ny).rev() {
                for i in (0..nx).rev() {
                    let c = k * slice + j * nx + i;
                    let mut acc = z[c];
                    if i + 1 < nx {
                        acc += tx[(k * ny + j) * (nx - 1) + i] * z[c + 1];
                    }
                    if j + 1 < ny {
                        acc += ty[(k * (ny - 1) + j) * nx + i] * z[c + nx];
                    }
                    if k + 1 < nz {
                        acc += tz[c] * z[c + slice];
                    }
                    z[c] = acc * w / self.diag[c];
                }
            }
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "ssor"
    }
}
