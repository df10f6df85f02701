//! Effective thermal conductivity of voxelized representative volume elements.
//!
//! The crate is `no_std` (with `alloc`). It contains the whole numerical path:
//!
//! * [`grid`]: voxel geometry, orthotropic coefficient fields and the
//!   deterministic test-case generators.
//! * [`tpfa`]: two-point flux approximation of the mixed Dirichlet/Neumann
//!   problem, applied matrix-free, plus boundary flux and `kappa_eff`.
//! * [`transforms`]: DCT-II by direct summation and the batched fast cosine
//!   transform built on a real FFT (Makhoul's pre/post phases).
//! * [`preconditioner`]: reference-medium parameters, the tridiagonal blocks,
//!   the fast cosine-transform preconditioner and classical baselines.
//! * [`krylov`]: preconditioned conjugate gradient and dense oracles.
//!
//! IO, file formats and the command line live in the `etc` crate.
#![cfg_attr(not(feature = "parallel"), no_std)]

extern crate alloc;

mod error;
mod fft;
mod par;

pub mod grid;
pub mod krylov;
pub mod preconditioner;
pub mod scalar;
pub mod tpfa;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{Axis, BoundaryConfig, GridSpec, OrthotropicField};
pub use krylov::{pcg, PcgOutcome, SolveReport};
pub use par::workers;
pub use preconditioner::{CoefficientStats, ReferenceParams};
pub use scalar::Real;
pub use tpfa::DiscreteSystem;
