//! DCT-II in the normalization the preconditioner relies on: the forward
//! transform is the plain cosine sum and the backward transform carries the
//! `2/N` factor and the `alpha` weights (`1/2` for the zero mode), so the two
//! are exact inverses.
//!
//! The fast 2D path works on `(x, y)` slices of a slab and follows Makhoul's
//! three phases: an even/odd reshuffle, a 2D FFT of the real reshuffled slice
//! (half spectrum along y), and a twiddle combination that reads the missing
//! half through conjugate symmetry.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;

use crate::error::{contract, Result};
use crate::fft::FftPlan;
use crate::par;
use crate::scalar::Real;

/// `u_hat[k] = sum_i u[i] cos(pi (2i+1) k / 2N)`, by direct summation.
pub fn dct1d_ref_forward(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|k| {
            u.iter()
                .enumerate()
                .map(|(i, &v)| v * libm::cos(PI * ((2 * i + 1) * k) as f64 / (2 * n) as f64))
                .sum()
        })
        .collect()
}

/// `u[i] = (2/N) sum_k alpha_k u_hat[k] cos(pi (2i+1) k / 2N)`.
pub fn dct1d_ref_backward(u_hat: &[f64]) -> Vec<f64> {
    let n = u_hat.len();
    (0..n)
        .map(|i| {
            let s: f64 = u_hat
                .iter()
                .enumerate()
                .map(|(k, &v)| alpha(k) * v * libm::cos(PI * ((2 * i + 1) * k) as f64 / (2 * n) as f64))
                .sum();
            2.0 / n as f64 * s
        })
        .collect()
}

/// Backward weight: `1/2` for the zero mode, `1` otherwise.
#[inline]
pub fn alpha(k: usize) -> f64 {
    if k == 0 {
        0.5
    } else {
        1.0
    }
}

/// Source index of the Makhoul reshuffle: `w[m] = v[perm(m)]`, even entries
/// ascending then odd entries descending.
#[inline]
pub fn makhoul_index(m: usize, n: usize) -> usize {
    if m <= (n - 1) / 2 {
        2 * m
    } else {
        2 * n - 2 * m - 1
    }
}

/// Writes the reshuffled `nx * ny` slice `v` into `out` (both x-fastest).
pub fn fct_pre_permute<T: Copy>(v: &[T], out: &mut [T], nx: usize, ny: usize) {
    for j in 0..ny {
        let sj = makhoul_index(j, ny);
        for i in 0..nx {
            out[j * nx + i] = v[sj * nx + makhoul_index(i, nx)];
        }
    }
}

/// Inverse of [`fct_pre_permute`].
pub fn fct_post_permute<T: Copy>(w: &[T], out: &mut [T], nx: usize, ny: usize) {
    for j in 0..ny {
        let sj = makhoul_index(j, ny);
        for i in 0..nx {
            out[sj * nx + makhoul_index(i, nx)] = w[j * nx + i];
        }
    }
}

/// Per-shape tables shared by every slice: FFT plans, reshuffle indices and
/// the quarter-wave twiddles `exp(-i pi k / 2N)`.
#[derive(Debug, Clone)]
pub struct SlabPlan<T> {
    nx: usize,
    ny: usize,
    nz: usize,
    fft_x: FftPlan<T>,
    fft_y: FftPlan<T>,
    perm_x: Vec<usize>,
    perm_y: Vec<usize>,
    quarter_x: Vec<Complex<T>>,
    quarter_y: Vec<Complex<T>>,
}

/// Scratch for transforming one slice at a time.
#[derive(Debug, Clone)]
pub struct SlabWorkspace<T> {
    /// Half spectrum, `(ny/2 + 1)` rows of `nx`, row-major in `j'`.
    spectrum: Vec<Complex<T>>,
    line: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

fn quarter_table<T: Real>(n: usize) -> Vec<Complex<T>> {
    (0..n)
        .map(|k| {
            let a = -PI * k as f64 / (2 * n) as f64;
            Complex::new(T::from_f64(libm::cos(a)), T::from_f64(libm::sin(a)))
        })
        .collect()
}

impl<T: Real> SlabPlan<T> {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(contract!("slab extents must be positive, got {nx}x{ny}x{nz}"));
        }
        Ok(Self {
            nx,
            ny,
            nz,
            fft_x: FftPlan::new(nx),
            fft_y: FftPlan::new(ny),
            perm_x: (0..nx).map(|m| makhoul_index(m, nx)).collect(),
            perm_y: (0..ny).map(|m| makhoul_index(m, ny)).collect(),
            quarter_x: quarter_table(nx),
            quarter_y: quarter_table(ny),
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn slice_len(&self) -> usize {
        self.nx * self.ny
    }

    fn half(&self) -> usize {
        self.ny / 2 + 1
    }

    pub fn workspace(&self) -> SlabWorkspace<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let scratch = self.fft_x.scratch_len().max(self.fft_y.scratch_len());
        SlabWorkspace {
            spectrum: vec![zero; self.half() * self.nx],
            line: vec![zero; self.nx.max(self.ny)],
            scratch: vec![zero; scratch],
        }
    }

    /// One workspace per worker, for [`Self::forward_batch`] and
    /// [`Self::backward_batch`].
    pub fn workspaces(&self, workers: usize) -> Vec<SlabWorkspace<T>> {
        (0..workers.clamp(1, self.nz)).map(|_| self.workspace()).collect()
    }

    fn check(&self, data: &[T], ws: &[SlabWorkspace<T>]) -> Result<()> {
        if data.len() != self.nx * self.ny * self.nz {
            return Err(contract!(
                "slab plan for {}x{}x{} got {} values",
                self.nx,
                self.ny,
                self.nz,
                data.len()
            ));
        }
        if ws.is_empty() || ws.iter().any(|w| w.spectrum.len() != self.half() * self.nx) {
            return Err(contract!("workspaces were not built by this plan"));
        }
        Ok(())
    }

    /// Forward 2D DCT-II of every z-slice, in place.
    pub fn forward_batch(&self, data: &mut [T], ws: &mut [SlabWorkspace<T>]) -> Result<()> {
        self.check(data, ws)?;
        par::for_each_chunk_grouped(data, self.slice_len(), ws, |w, _, s| self.forward_slice(s, w));
        Ok(())
    }

    /// Backward 2D DCT-II of every z-slice, in place.
    pub fn backward_batch(&self, data: &mut [T], ws: &mut [SlabWorkspace<T>]) -> Result<()> {
        self.check(data, ws)?;
        par::for_each_chunk_grouped(data, self.slice_len(), ws, |w, _, s| self.backward_slice(s, w));
        Ok(())
    }

    /// `W[j'][i']` for any `j'`, reading the upper half through
    /// `W[a][b] = conj(W[(nx - a) % nx][ny - b])`.
    #[inline]
    fn spectral(&self, spec: &[Complex<T>], i: usize, j: usize) -> Complex<T> {
        if j < self.half() {
            spec[j * self.nx + i]
        } else {
            let i2 = if i == 0 { 0 } else { self.nx - i };
            spec[(self.ny - j) * self.nx + i2].conj()
        }
    }

    pub fn forward_slice(&self, slice: &mut [T], ws: &mut SlabWorkspace<T>) {
        let (nx, ny, half) = (self.nx, self.ny, self.half());
        let zero = T::zero();
        let SlabWorkspace { spectrum, line, scratch } = ws;
        let line = &mut line[..ny];

        // reshuffle + real FFT along y, two columns per complex transform
        let mut i = 0;
        while i < nx {
            let pair = i + 1 < nx;
            let (si, si2) = (self.perm_x[i], if pair { self.perm_x[i + 1] } else { 0 });
            for (j, l) in line.iter_mut().enumerate() {
                let row = self.perm_y[j] * nx;
                let im = if pair { slice[row + si2] } else { zero };
                *l = Complex::new(slice[row + si], im);
            }
            self.fft_y.forward(line, scratch);
            let half_t = T::from_f64(0.5);
            for k in 0..half {
                let a = line[k];
                let b = line[(ny - k) % ny].conj();
                spectrum[k * nx + i] = (a + b) * half_t;
                if pair {
                    // (a - b) / 2i
                    let d = (a - b) * half_t;
                    spectrum[k * nx + i + 1] = Complex::new(d.im, -d.re);
                }
            }
            i += 2;
        }
        // full complex FFT along x for every stored row
        for row in spectrum.chunks_mut(nx) {
            self.fft_x.forward(row, scratch);
        }
        // twiddle combination
        let half_t = T::from_f64(0.5);
        for jp in 0..ny {
            for ip in 0..nx {
                let tx = self.quarter_x[ip];
                let v = if jp == 0 {
                    (tx * spectrum[ip]).re
                } else {
                    let ty = self.quarter_y[jp];
                    let s = ty * self.spectral(spectrum, ip, jp) + ty.conj() * self.spectral(spectrum, ip, ny - jp);
                    (tx * s).re * half_t
                };
                slice[jp * nx + ip] = v;
            }
        }
    }

    pub fn backward_slice(&self, slice: &mut [T], ws: &mut SlabWorkspace<T>) {
        let (nx, ny, half) = (self.nx, self.ny, self.half());
        let zero = T::zero();
        let SlabWorkspace { spectrum, line, scratch } = ws;
        let at = |i: usize, j: usize| if i == nx || j == ny { zero } else { slice[j * nx + i] };
        for jp in 0..half {
            for ip in 0..nx {
                let (mi, mj) = (nx - ip, ny - jp);
                let re = at(ip, jp) - at(mi, mj);
                let im = -(at(mi, jp) + at(ip, mj));
                let phase = (self.quarter_x[ip] * self.quarter_y[jp]).conj();
                spectrum[jp * nx + ip] = phase * Complex::new(re, im);
            }
        }
        for row in spectrum.chunks_mut(nx) {
            self.fft_x.inverse(row, scratch);
        }
        let line = &mut line[..ny];
        let scale = T::from_f64(1.0 / (nx * ny) as f64);
        let mut i = 0;
        while i < nx {
            let pair = i + 1 < nx;
            for (k, l) in line.iter_mut().enumerate() {
                let (x, y) = if k < half {
                    let x = spectrum[k * nx + i];
                    let y = if pair { spectrum[k * nx + i + 1] } else { Complex::new(zero, zero) };
                    (x, y)
                } else {
                    let x = spectrum[(ny - k) * nx + i].conj();
                    let y = if pair { spectrum[(ny - k) * nx + i + 1].conj() } else { Complex::new(zero, zero) };
                    (x, y)
                };
                let (x, y) = if k == 0 || 2 * k == ny {
                    (Complex::new(x.re, zero), Complex::new(y.re, zero))
                } else {
                    (x, y)
                };
                // x + i y
                *l = Complex::new(x.re - y.im, x.im + y.re);
            }
            self.fft_y.inverse(line, scratch);
            let si = self.perm_x[i];
            let si2 = if pair { self.perm_x[i + 1] } else { 0 };
            for (j, l) in line.iter().enumerate() {
                let row = self.perm_y[j] * nx;
                slice[row + si] = l.re * scale;
                if pair {
                    slice[row + si2] = l.im * scale;
                }
            }
            i += 2;
        }
    }
}
