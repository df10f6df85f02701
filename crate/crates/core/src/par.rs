//! Chunked loops that fan out over rayon when the `parallel` feature is on and
//! more than one worker is available. Each chunk is handled by exactly one
//! closure call, so results never depend on scheduling.

/// Number of workers the data-parallel kernels will use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers() > 1 {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Splits `data` into `chunk`-sized pieces and hands contiguous runs of them to
/// one scratch value each. `scratch.len()` fixes the number of groups; with a
/// single scratch value everything runs on the calling thread and nothing is
/// allocated.
pub(crate) fn for_each_chunk_grouped<T, S, F>(data: &mut [T], chunk: usize, scratch: &mut [S], f: F)
where
    T: Send,
    S: Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    assert!(!scratch.is_empty());
    let chunks = data.len().div_ceil(chunk);
    if scratch.len() == 1 || chunks <= 1 {
        let s = &mut scratch[0];
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(s, i, c));
        return;
    }
    let per_group = chunks.div_ceil(scratch.len());
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(per_group * chunk)
            .zip(scratch.par_iter_mut())
            .enumerate()
            .for_each(|(g, (d, s))| {
                for (c, sub) in d.chunks_mut(chunk).enumerate() {
                    f(s, g * per_group + c, sub);
                }
            });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (g, (d, s)) in data.chunks_mut(per_group * chunk).zip(scratch.iter_mut()).enumerate() {
            for (c, sub) in d.chunks_mut(chunk).enumerate() {
                f(s, g * per_group + c, sub);
            }
        }
    }
}
