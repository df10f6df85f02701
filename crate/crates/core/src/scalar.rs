//! Floating-point abstraction shared by the solve path, plus the vector
//! kernels PCG needs.
//!
//! Reductions use a fixed blocking (sequential inside a block, pairwise across
//! blocks) so that results never depend on thread count or scheduling.

use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};

pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Short precision tag used in reports.
    const NAME: &'static str;

    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f64 {
    const NAME: &'static str = "f64";

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

const BLOCK: usize = 256;

fn block_dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&u, &v)| acc + u * v)
}

/// Deterministic dot product: sequential within blocks of 256, pairwise over
/// blocks. The split points depend only on the length.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let blocks = a.len().div_ceil(BLOCK);
    if blocks <= 1 {
        return block_dot(a, b);
    }
    let mid = (blocks / 2) * BLOCK;
    dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..])
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = x + beta * y`
pub fn xpby<T: Real>(x: &[T], beta: T, y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}
