//! Deterministic 2D spectral kernel: FFT-based circular cross-correlation,
//! convolution, auto-correlation, and center shift, one channel at a time.
//!
//! Conventions (fixed, documented, and relied on by the transform pipeline):
//! - `fft2` is the unnormalized forward DFT; `ifft2` carries the 1/(H·W)
//!   factor. The DC term sits at index (0, 0).
//! - Cross-correlation conjugates its *second* argument:
//!   `ifft2(fft2(a) ⊙ conj(fft2(b)))`, so the zero lag of `a ⊗ b` lands at
//!   (0, 0). For the zero-phase kernels used by the transforms the other
//!   conjugation choice would coincide anyway.
//! - Everything is circular; outputs keep the input geometry. Raw op outputs
//!   keep zero lag at (0, 0); `center_shift` re-renders a lag map around the
//!   image center where a pipeline wants that.

mod fft;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use fft::Cfft;

/// One real-valued channel of an image or lag map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Plane {
    /// Builds a plane, rejecting bad lengths and non-finite entries.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidConfig {
                what: "plane dimensions must be positive",
            });
        }
        if values.len() != height * width {
            return Err(Error::BadLength {
                expected: height * width,
                got: values.len(),
            });
        }
        check_finite(height, width, &values)?;
        Ok(Plane {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Plane {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    /// Unit impulse scaled by `value` at (row, col).
    pub fn delta(height: usize, width: usize, row: usize, col: usize, value: f64) -> Self {
        let mut p = Plane::zeros(height, width);
        p.values[row * width + col] = value;
        p
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Plane {
            height,
            width,
            values,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Elementwise scaling. May overflow to non-finite for absurd factors;
    /// the spectral ops re-validate on entry.
    pub fn scaled(&self, factor: f64) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

/// Complex spectrum of a plane, same row-major layout, DC at (0, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, bins: Vec<Complex64>) -> Result<Self> {
        if bins.len() != height * width {
            return Err(Error::BadLength {
                expected: height * width,
                got: bins.len(),
            });
        }
        Ok(Spectrum {
            height,
            width,
            bins,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.bins[row * self.width + col]
    }

    /// Largest bin magnitude; used by the zero-phase property checks.
    pub fn peak_magnitude(&self) -> f64 {
        self.bins.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }
}

fn check_finite(height: usize, width: usize, values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: i / width,
                col: i % width,
                value: v,
            });
        }
    }
    let _ = height;
    Ok(())
}

fn check_same_shape(a: &Plane, b: &Plane) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Planned 2D transform for one geometry; reuse it in hot loops.
pub struct FftPlan {
    height: usize,
    width: usize,
    row: Cfft,
    col: Cfft,
}

impl FftPlan {
    pub fn new(height: usize, width: usize) -> Self {
        FftPlan {
            height,
            width,
            row: Cfft::new(width),
            col: Cfft::new(height),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Unnormalized forward DFT; DC at (0, 0) equals the sum of all values.
    pub fn fft2(&self, p: &Plane) -> Result<Spectrum> {
        if p.shape() != (self.height, self.width) {
            return Err(Error::ShapeMismatch {
                left: (self.height, self.width),
                right: p.shape(),
            });
        }
        check_finite(p.height, p.width, &p.values)?;
        let mut data: Vec<Complex64> = p.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_rows_cols(&mut data);
        Spectrum::new(self.height, self.width, data)
    }

    /// Inverse DFT with 1/(H·W) scaling. The imaginary part is discarded only
    /// when it is negligible next to the real part; anything bigger means the
    /// spectrum was not conjugate-symmetric and is reported as a logic error.
    pub fn ifft2(&self, s: &Spectrum) -> Result<Plane> {
        if (s.height, s.width) != (self.height, self.width) {
            return Err(Error::ShapeMismatch {
                left: (self.height, self.width),
                right: (s.height, s.width),
            });
        }
        // ifft(X) = conj(fft(conj(X))) / N
        let mut data: Vec<Complex64> = s.bins.iter().map(|b| b.conj()).collect();
        self.transform_rows_cols(&mut data);
        let norm = 1.0 / (self.height * self.width) as f64;
        let mut values = Vec::with_capacity(data.len());
        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        for bin in &data {
            let re = bin.re * norm;
            let im = -bin.im * norm;
            max_re = max_re.max(re.abs());
            max_im = max_im.max(im.abs());
            values.push(re);
        }
        let bound = 1e-9 * (max_re + 1.0);
        if max_im >= bound {
            return Err(Error::ResidualImaginary { max_im, bound });
        }
        Plane::new(self.height, self.width, values)
    }

    fn transform_rows_cols(&self, data: &mut [Complex64]) {
        let (h, w) = (self.height, self.width);
        let zero = Complex64::new(0.0, 0.0);
        let mut src = vec![zero; w.max(h)];
        let mut dst = vec![zero; w.max(h)];
        for r in 0..h {
            src[..w].copy_from_slice(&data[r * w..(r + 1) * w]);
            self.row.forward(&src[..w], &mut dst[..w]);
            data[r * w..(r + 1) * w].copy_from_slice(&dst[..w]);
        }
        for c in 0..w {
            for r in 0..h {
                src[r] = data[r * w + c];
            }
            self.col.forward(&src[..h], &mut dst[..h]);
            for r in 0..h {
                data[r * w + c] = dst[r];
            }
        }
    }

    /// `ifft2(fft2(a) ⊙ conj(fft2(b)))`; zero lag at (0, 0).
    pub fn cross_correlate(&self, a: &Plane, b: &Plane) -> Result<Plane> {
        check_same_shape(a, b)?;
        let fa = self.fft2(a)?;
        let fb = self.fft2(b)?;
        let bins: Vec<Complex64> = fa
            .bins
            .iter()
            .zip(&fb.bins)
            .map(|(x, y)| x * y.conj())
            .collect();
        self.ifft2(&Spectrum::new(self.height, self.width, bins)?)
    }

    /// Circular convolution `ifft2(fft2(a) ⊙ fft2(b))`.
    pub fn convolve(&self, a: &Plane, b: &Plane) -> Result<Plane> {
        check_same_shape(a, b)?;
        let fa = self.fft2(a)?;
        let fb = self.fft2(b)?;
        let bins: Vec<Complex64> = fa.bins.iter().zip(&fb.bins).map(|(x, y)| x * y).collect();
        self.ifft2(&Spectrum::new(self.height, self.width, bins)?)
    }
}

/// One-shot [`FftPlan::fft2`].
pub fn fft2(p: &Plane) -> Result<Spectrum> {
    FftPlan::new(p.height, p.width).fft2(p)
}

/// One-shot [`FftPlan::ifft2`].
pub fn ifft2(s: &Spectrum) -> Result<Plane> {
    FftPlan::new(s.height, s.width).ifft2(s)
}

/// One-shot [`FftPlan::cross_correlate`].
pub fn cross_correlate(a: &Plane, b: &Plane) -> Result<Plane> {
    check_same_shape(a, b)?;
    FftPlan::new(a.height, a.width).cross_correlate(a, b)
}

/// One-shot [`FftPlan::convolve`].
pub fn convolve(a: &Plane, b: &Plane) -> Result<Plane> {
    check_same_shape(a, b)?;
    FftPlan::new(a.height, a.width).convolve(a, b)
}

/// `cross_correlate(p, p)`. Its spectrum is |fft2(p)|², real and
/// nonnegative, which is what makes the transform kernels zero-phase.
pub fn autocorrelate(p: &Plane) -> Result<Plane> {
    cross_correlate(p, p)
}

/// Cyclic shift moving index (0, 0) to (⌊H/2⌋, ⌊W/2⌋); self-inverse when
/// both sides are even.
pub fn center_shift(p: &Plane) -> Plane {
    let (h, w) = p.shape();
    let (sh, sw) = (h / 2, w / 2);
    Plane::from_fn(h, w, |r, c| {
        p.at((r + h - sh) % h, (c + w - sw) % w)
    })
}
