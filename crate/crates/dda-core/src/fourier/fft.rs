//! Mixed-radix complex FFT, forward direction only.
//!
//! Decimation in time over the smallest prime factor at each level; prime
//! lengths fall back to the O(p²) direct combine, which is all the
//! correctness-focused scope here needs (planes are ≤ 32 per side).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

fn smallest_factor(n: usize) -> usize {
    if n % 2 == 0 {
        return 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 2;
    }
    n
}

/// Planned forward DFT of a fixed length.
pub(crate) struct Cfft {
    n: usize,
    /// twiddles[t] = exp(-2πi·t/n)
    twiddles: Vec<Complex64>,
}

impl Cfft {
    pub(crate) fn new(n: usize) -> Self {
        debug_assert!(n >= 1);
        let mut twiddles = Vec::with_capacity(n);
        for t in 0..n {
            // Exact axis twiddles keep structurally zero bins exactly zero.
            let tw = if t == 0 {
                Complex64::new(1.0, 0.0)
            } else if 4 * t == n {
                Complex64::new(0.0, -1.0)
            } else if 2 * t == n {
                Complex64::new(-1.0, 0.0)
            } else if 4 * t == 3 * n {
                Complex64::new(0.0, 1.0)
            } else {
                let theta = -2.0 * PI * (t as f64) / (n as f64);
                Complex64::new(libm::cos(theta), libm::sin(theta))
            };
            twiddles.push(tw);
        }
        Cfft { n, twiddles }
    }

    /// Unnormalized forward DFT of `src` into `dst` (both of length `n`).
    pub(crate) fn forward(&self, src: &[Complex64], dst: &mut [Complex64]) {
        debug_assert_eq!(src.len(), self.n);
        debug_assert_eq!(dst.len(), self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); 0];
        self.recurse(src, 0, 1, dst, self.n, 1, &mut scratch);
    }

    fn recurse(
        &self,
        src: &[Complex64],
        src_off: usize,
        src_stride: usize,
        dst: &mut [Complex64],
        n: usize,
        tw_stride: usize,
        scratch: &mut Vec<Complex64>,
    ) {
        if n == 1 {
            dst[0] = src[src_off];
            return;
        }
        let p = smallest_factor(n);
        let m = n / p;
        for q in 0..p {
            self.recurse(
                src,
                src_off + q * src_stride,
                src_stride * p,
                &mut dst[q * m..(q + 1) * m],
                m,
                tw_stride * p,
                scratch,
            );
        }
        // Combine the p sub-transforms. For a fixed k the output slots
        // {k + j·m} coincide with the input slots {q·m + k}, so a p-sized
        // scratch row lets the butterfly run in place.
        scratch.resize(p, Complex64::new(0.0, 0.0));
        let total = self.n;
        for k in 0..m {
            for q in 0..p {
                let tw = self.twiddles[(q * k * tw_stride) % total];
                scratch[q] = dst[q * m + k] * tw;
            }
            for j in 0..p {
                let mut acc = scratch[0];
                for q in 1..p {
                    let tw = self.twiddles[(q * j * m * tw_stride) % total];
                    acc += scratch[q] * tw;
                }
                dst[k + j * m] = acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_dft(src: &[Complex64]) -> Vec<Complex64> {
        let n = src.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &x) in src.iter().enumerate() {
                    let theta = -2.0 * PI * ((t * k) % n) as f64 / n as f64;
                    acc += x * Complex64::new(libm::cos(theta), libm::sin(theta));
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft_across_lengths() {
        // 28 = 2·2·7 is the production size; 13 exercises the prime fallback.
        for n in [1usize, 2, 3, 4, 5, 6, 8, 12, 13, 16, 28] {
            let src: Vec<Complex64> = (0..n)
                .map(|t| Complex64::new((t as f64 * 0.7).sin() + 0.3, (t as f64 * 1.3).cos()))
                .collect();
            let plan = Cfft::new(n);
            let mut dst = vec![Complex64::new(0.0, 0.0); n];
            plan.forward(&src, &mut dst);
            let want = direct_dft(&src);
            for (got, want) in dst.iter().zip(&want) {
                assert!((got - want).norm() < 1e-10, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn delta_at_origin_is_exactly_flat() {
        // The nonzero datum rides the zero-exponent twiddle path, so every
        // bin must come out as exactly 1 + 0i; the transform pipeline leans
        // on this when identity statistics are wired in.
        for n in [2usize, 4, 7, 28] {
            let mut src = vec![Complex64::new(0.0, 0.0); n];
            src[0] = Complex64::new(1.0, 0.0);
            let plan = Cfft::new(n);
            let mut dst = src.clone();
            plan.forward(&src, &mut dst);
            for bin in &dst {
                assert_eq!(bin.re, 1.0);
                assert_eq!(bin.im, 0.0);
            }
        }
    }
}
