use alloc::vec;
use alloc::vec::Vec;

use super::tridiag::{build_tridiag, TridiagFactors};
use super::{Preconditioner, ReferenceParams};
use crate::error::{contract, Result};
use crate::grid::GridSpec;
use crate::par;
use crate::scalar::Real;
use crate::transforms::{SlabPlan, SlabWorkspace};

/// Exact inverse of the reference operator: forward cosine transform of every
/// z-slice, one tridiagonal solve per `(i', j')` column, backward transform.
///
/// All buffers are allocated by [`FctPreconditioner::new`]; [`apply`] only
/// touches them.
///
/// [`apply`]: Preconditioner::apply
#[derive(Debug, Clone)]
pub struct FctPreconditioner<T> {
    refs: ReferenceParams,
    plan: SlabPlan<T>,
    workspaces: Vec<SlabWorkspace<T>>,
    factors: TridiagFactors<T>,
    cp: Vec<T>,
}

impl<T: Real> FctPreconditioner<T> {
    pub fn new(grid: &GridSpec, refs: ReferenceParams) -> Result<Self> {
        Self::with_workers(grid, refs, par::workers())
    }

    /// Same as [`Self::new`] with an explicit number of slice workspaces.
    /// One workspace keeps the whole application on the calling thread.
    pub fn with_workers(grid: &GridSpec, refs: ReferenceParams, workers: usize) -> Result<Self> {
        let plan = SlabPlan::new(grid.nx, grid.ny, grid.nz)?;
        let factors = build_tridiag(grid, &refs)?;
        Ok(Self {
            refs,
            workspaces: plan.workspaces(workers),
            plan,
            factors,
            cp: vec![T::zero(); grid.len()],
        })
    }

    pub fn refs(&self) -> &ReferenceParams {
        &self.refs
    }

    pub fn factors(&self) -> &TridiagFactors<T> {
        &self.factors
    }
}

impl<T: Real> Preconditioner<T> for FctPreconditioner<T> {
    fn apply(&mut self, r: &[T], z: &mut [T]) -> Result<()> {
        if r.len() != self.cp.len() || z.len() != r.len() {
            return Err(contract!(
                "preconditioner expects length {}, got {} and {}",
                self.cp.len(),
                r.len(),
                z.len()
            ));
        }
        z.copy_from_slice(r);
        self.plan.forward_batch(z, &mut self.workspaces)?;
        self.factors.solve_batch(z, &mut self.cp);
        self.plan.backward_batch(z, &mut self.workspaces)
    }

    fn name(&self) -> &'static str {
        "fct"
    }
}
