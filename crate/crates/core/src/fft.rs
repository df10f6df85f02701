//! Small mixed-radix complex FFT (decimation in time, radix 4/2 butterflies
//! plus a generic odd-prime butterfly). Only what the cosine transforms need:
//! unnormalized forward transform, inverse by conjugation, caller-owned scratch.

use alloc::vec::Vec;

use num_complex::Complex;

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub(crate) struct FftPlan<T> {
    n: usize,
    /// `exp(-2 pi i k / n)` for `k < n`, evaluated in f64.
    twiddles: Vec<Complex<T>>,
    /// `(radix, remaining length)` pairs, outermost first.
    stages: Vec<(usize, usize)>,
    max_radix: usize,
}

fn factorize(mut n: usize) -> Vec<(usize, usize)> {
    let mut stages = Vec::new();
    let mut push = |p: usize, n: &mut usize| {
        *n /= p;
        stages.push((p, *n));
    };
    while n.is_multiple_of(4) {
        push(4, &mut n);
    }
    while n.is_multiple_of(2) {
        push(2, &mut n);
    }
    let mut p = 3;
    while n > 1 {
        while n.is_multiple_of(p) {
            push(p, &mut n);
        }
        p += 2;
        if p * p > n && n > 1 {
            push(n, &mut n);
        }
    }
    stages
}

impl<T: Real> FftPlan<T> {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n >= 1);
        let twiddles = (0..n)
            .map(|k| {
                let a = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                Complex::new(T::from_f64(libm::cos(a)), T::from_f64(libm::sin(a)))
            })
            .collect();
        let stages = factorize(n);
        let max_radix = stages.iter().map(|s| s.0).max().unwrap_or(1);
        Self { n, twiddles, stages, max_radix }
    }

    /// Scratch length [`Self::forward`] and [`Self::inverse`] require.
    pub(crate) fn scratch_len(&self) -> usize {
        self.n + self.max_radix
    }

    /// In-place `X_k = sum_j x_j exp(-2 pi i jk/n)`.
    pub(crate) fn forward(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n);
        if self.n == 1 {
            return;
        }
        let (input, bfly) = scratch.split_at_mut(self.n);
        input.copy_from_slice(data);
        self.work(data, input, 1, &self.stages, bfly);
    }

    /// In-place unnormalized inverse (`exp(+...)`), i.e. `n` times the true inverse.
    pub(crate) fn inverse(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        for v in data.iter_mut() {
            *v = v.conj();
        }
        self.forward(data, scratch);
        for v in data.iter_mut() {
            *v = v.conj();
        }
    }

    fn work(
        &self,
        out: &mut [Complex<T>],
        input: &[Complex<T>],
        fstride: usize,
        stages: &[(usize, usize)],
        bfly: &mut [Complex<T>],
    ) {
        let (p, m) = stages[0];
        if m == 1 {
            for q in 0..p {
                out[q] = input[q * fstride];
            }
        } else {
            for q in 0..p {
                self.work(&mut out[q * m..(q + 1) * m], &input[q * fstride..], fstride * p, &stages[1..], bfly);
            }
        }
        match p {
            2 => self.butterfly2(out, fstride, m),
            4 => self.butterfly4(out, fstride, m),
            _ => self.butterfly_generic(out, fstride, p, m, bfly),
        }
    }

    fn butterfly2(&self, out: &mut [Complex<T>], fstride: usize, m: usize) {
        let (a, b) = out.split_at_mut(m);
        for k in 0..m {
            let t = b[k] * self.twiddles[k * fstride];
            b[k] = a[k] - t;
            a[k] += t;
        }
    }

    fn butterfly4(&self, out: &mut [Complex<T>], fstride: usize, m: usize) {
        let tw = &self.twiddles;
        for k in 0..m {
            let s0 = out[k + m] * tw[k * fstride];
            let s1 = out[k + 2 * m] * tw[2 * k * fstride];
            let s2 = out[k + 3 * m] * tw[3 * k * fstride];
            let s5 = out[k] - s1;
            let f0 = out[k] + s1;
            let s3 = s0 + s2;
            let s4 = s0 - s2;
            out[k + 2 * m] = f0 - s3;
            out[k] = f0 + s3;
            // multiply s4 by -i
            out[k + m] = Complex::new(s5.re + s4.im, s5.im - s4.re);
            out[k + 3 * m] = Complex::new(s5.re - s4.im, s5.im + s4.re);
        }
    }

    fn butterfly_generic(&self, out: &mut [Complex<T>], fstride: usize, p: usize, m: usize, tmp: &mut [Complex<T>]) {
        let n = self.n;
        for u in 0..m {
            for q in 0..p {
                tmp[q] = out[u + q * m];
            }
            for q1 in 0..p {
                let k = u + q1 * m;
                let step = fstride * k % n;
                let mut idx = 0;
                let mut acc = tmp[0];
                for &t in &tmp[1..p] {
                    idx += step;
                    if idx >= n {
                        idx -= n;
                    }
                    acc += t * self.twiddles[idx];
                }
                out[k] = acc;
            }
        }
    }
}
